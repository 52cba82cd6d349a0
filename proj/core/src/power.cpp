#include "varsig/power.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "varsig/beta.hpp"
#include "varsig/errors.hpp"
#include "varsig/exact.hpp"
#include "varsig/parallel.hpp"
#include "varsig/pvalue.hpp"
#include "varsig/rng.hpp"

namespace varsig {

std::vector<WSample> draw_null_w(Index h, Index count, std::uint64_t seed) {
  std::vector<WSample> out(count);
  for (Index j = 0; j < count; ++j) {
    Rng rng(derive_seed(seed, j));
    auto& s = out[j];
    s.provenance = WProvenance::sampled;
    s.w_left.resize(h - 1);
    s.w_right.resize(h - 1);
    for (Index i = 1; i < h; ++i) s.w_left[i - 1] = sample_beta(rng, 0.5 * static_cast<double>(i), 0.5);
    for (Index i = 1; i < h; ++i) s.w_right[i - 1] = sample_beta(rng, 0.5 * static_cast<double>(i), 0.5);
  }
  return out;
}

std::vector<WSample> sample_w(const PhiPath& path, Index n_w, std::uint64_t seed) {
  if (n_w < 1) throw ConfigError("N_W must be at least 1");
  const auto frame = decompose_w(path.base(), path.window());
  std::vector<WSample> out;
  out.reserve(n_w);
  out.push_back({frame.w_left, frame.w_right, WProvenance::observed});
  for (auto& s : draw_null_w(path.window().h, n_w - 1, seed)) out.push_back(std::move(s));
  return out;
}

std::string_view to_string(PowerEngine e) { return e == PowerEngine::exact ? "exact" : "mc"; }

TimeSeries rebuild_series(const PhiPath& path, const WSample& w) {
  const Window& win = path.window();
  if (w.w_left.size() + 1 != win.h || w.w_right.size() + 1 != win.h) throw ConfigError("W sample has wrong length");
  PhiFrame frame = decompose_w(path.base(), win);
  frame.w_left = w.w_left;
  frame.w_right = w.w_right;
  const auto sq = reconstruct_squares(frame);
  std::vector<double> values(path.base().values().begin(), path.base().values().end());
  const double mu = path.base().mu();
  for (Index k = 0; k < sq.size(); ++k) {
    const Index j = win.begin() + k;
    const double sign = values[j] < mu ? -1.0 : 1.0;
    values[j] = mu + sign * std::sqrt(std::max(sq[k], 0.0));
  }
  return TimeSeries(std::move(values), mu);
}

PValueReport power_p_value(const PhiPath& path, const DetectionResult& observed, Conditioning conditioning,
                           const std::vector<WSample>& samples, const PowerConfig& config) {
  if (samples.empty()) throw ConfigError("need at least the observed W sample");
  const Window& win = path.window();
  const auto bounds = two_sided_bounds(path.phi_obs(), win.h);
  const auto replay = replay_config(observed);
  if (config.engine == PowerEngine::exact) require_exact_compatible(replay);

  SamplerConfig sampler = config.sampler;
  if (samples.size() > 1) sampler.n = std::max<Index>(2, sampler.n / 2);

  std::vector<double> critical(samples.size(), 0.0);
  std::vector<double> total(samples.size(), 0.0);
  const auto one = [&](std::size_t j) {
    const bool is_observed = samples[j].provenance == WProvenance::observed;
    const PhiPath local = is_observed ? path : PhiPath(rebuild_series(path, samples[j]), win);
    if (config.engine == PowerEngine::exact) {
      const auto s = selection_set(local, replay, observed.changepoints, conditioning);
      const auto m = truncated_beta_masses(s, bounds, win.h);
      critical[j] = m.critical;
      total[j] = m.total;
    } else {
      const SelectionOracle oracle(local, replay, observed.changepoints, conditioning, sampler.early_stop);
      const auto design = evaluate_design(oracle, sampler.n, j == 0 ? sampler.seed : derive_seed(sampler.seed, j),
                                          is_observed ? std::optional<bool>(true) : std::nullopt, 1);
      const GpSurrogate gp(design.phis, std::vector<double>(design.selected.begin(), design.selected.end()),
                           sampler.length_scale);
      double crit = 0.0;
      double tot = 0.0;
      try {
        const ConditionedDensity density(gp, win.h);
        const auto m = gp_masses(density, bounds);
        crit = m.critical;
        tot = m.total;
      } catch (const NumericalUnderflow&) {
        // no selected design point for this W: contributes nothing
      }
      critical[j] = crit;
      total[j] = tot;
    }
  };
  parallel_for(samples.size(), config.sampler.workers, one);

  double crit_sum = 0.0;
  double total_sum = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    crit_sum += critical[j];
    total_sum += total[j];
  }
  PValueReport r;
  r.tau_hat = win.tau_hat;
  r.phi_obs = path.phi_obs();
  r.phi_lower = bounds.lower;
  r.phi_upper = bounds.upper;
  r.method = config.engine == PowerEngine::exact ? PValueMethod::exact_cusum : PValueMethod::mc_gp;
  r.conditioning = conditioning;
  r.p_value = mass_ratio(crit_sum, total_sum);
  r.diagnostics["N_W"] = static_cast<double>(samples.size());
  r.diagnostics["selected_mass"] = total_sum;
  return r;
}

}  // namespace varsig
