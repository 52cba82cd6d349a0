#include "varsig/mc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "varsig/beta.hpp"
#include "varsig/errors.hpp"
#include "varsig/parallel.hpp"

namespace varsig {

SelectionOracle::SelectionOracle(const PhiPath& path, DetectorConfig config, std::vector<Index> observed_model,
                                 Conditioning conditioning, bool early_stop)
    : path_(&path),
      config_(std::move(config)),
      observed_model_(std::move(observed_model)),
      conditioning_(conditioning),
      early_stop_(early_stop) {
  if (config_.algorithm == Algorithm::wbs) {
    if (config_.intervals.empty()) {
      config_.intervals = draw_intervals(path.size(), config_.n_intervals, config_.seed);
    }
    const SquareSums sums(path.squares());
    const auto& w = path.window();
    cache_.by_interval.resize(config_.intervals.size());
    for (Index i = 0; i < config_.intervals.size(); ++i) {
      const auto& iv = config_.intervals[i];
      if (iv.end <= w.begin() || iv.begin >= w.end()) {
        cache_.by_interval[i] = scan_interval(sums, config_.stat, iv);
      }
    }
  }
}

bool SelectionOracle::operator()(double phi) const {
  ++evaluations_;
  const Index tau = path_->window().tau_hat;
  AcceptHook hook;
  if (early_stop_) {
    if (conditioning_ == Conditioning::tau_in_model) {
      hook = [tau](Index cp) { return cp != tau; };
    } else {
      hook = [this](Index cp) {
        return std::binary_search(observed_model_.begin(), observed_model_.end(), cp);
      };
    }
  }
  DetectionResult run;
  try {
    run = detect_squares(path_->squares_at(phi), config_, hook, config_.algorithm == Algorithm::wbs ? &cache_ : nullptr);
  } catch (const DegenerateSegment& e) {
    throw DegenerateSegment(std::string("indicator evaluation failed at phi=") + std::to_string(phi) + ": " +
                            e.what());
  }
  if (conditioning_ == Conditioning::tau_in_model) return run.contains(tau);
  if (run.stopped_early) return false;
  return run.changepoints == observed_model_;
}

bool indicator(const PhiPath& path, const DetectorConfig& config, std::span<const Index> observed_model,
               Conditioning conditioning, double phi) {
  if (!(phi > 0.0 && phi < 1.0)) throw DegenerateInput("phi must lie in (0, 1)");
  const SelectionOracle oracle(path, config, {observed_model.begin(), observed_model.end()}, conditioning);
  return oracle(phi);
}

namespace {

double law_quantile(double z, const BetaLaw& law) {
  if (law.a == 1.0 && law.b == 1.0) return z;
  return beta_quantile(z, law.a, law.b);
}

}  // namespace

std::vector<double> stratified_sample(Index n, const BetaLaw& law, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(n);
  const double nd = static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    double z = (static_cast<double>(i) + u(rng)) / nd;
    out[i] = law_quantile(z, law);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> iid_sample(Index n, const BetaLaw& law, Rng& rng) {
  std::vector<double> out(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& x : out) x = (law.a == 1.0 && law.b == 1.0) ? u(rng) : sample_beta(rng, law.a, law.b);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> stratified_phis(Index n, PhiDistribution dist, Index h, std::uint64_t seed) {
  if (n < 1) throw ConfigError("need at least one stratum");
  Rng rng(seed);
  const BetaLaw law = dist == PhiDistribution::uniform01 ? BetaLaw{1.0, 1.0} : BetaLaw{null_shape(h), null_shape(h)};
  return stratified_sample(n, law, rng);
}

double importance_p_hat(std::span<const double> phis, std::span<const char> selected, std::span<const double> weights,
                        const TwoSidedBounds& bounds) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    if (!selected[i]) continue;
    const double w = weights.empty() ? 1.0 : weights[i];
    den += w;
    if (phis[i] <= bounds.lower || phis[i] >= bounds.upper) num += w;
  }
  if (!(den > 0.0)) throw NumericalUnderflow("no selected samples; the estimate is undefined");
  return std::clamp(num / den, 0.0, 1.0);
}

double naive_p_hat(std::span<const double> phis, std::span<const char> selected, const TwoSidedBounds& bounds) {
  return importance_p_hat(phis, selected, {}, bounds);
}

double proposal_p_hat(const SelectionOracle& oracle, const TwoSidedBounds& bounds, const BetaLaw& proposal, Index n,
                      bool stratified, Rng& rng) {
  const auto phis = stratified ? stratified_sample(n, proposal, rng) : iid_sample(n, proposal, rng);
  const double a = null_shape(oracle.path().window().h);
  std::vector<char> selected(phis.size());
  std::vector<double> weights(phis.size());
  for (std::size_t i = 0; i < phis.size(); ++i) {
    // quantiles of very flat proposals can round onto the boundary
    if (!(phis[i] > 0.0 && phis[i] < 1.0)) continue;
    selected[i] = oracle(phis[i]) ? 1 : 0;
    weights[i] = std::exp(log_beta_pdf(phis[i], a, a) - log_beta_pdf(phis[i], proposal.a, proposal.b));
  }
  return importance_p_hat(phis, selected, weights, bounds);
}

GpSurrogate::GpSurrogate(std::vector<double> design, std::vector<double> observations, double length_scale)
    : design_(std::move(design)),
      obs_(std::move(observations)),
      length_scale_(length_scale),
      rate_(1.0 / (2.0 * length_scale * length_scale)) {
  if (design_.empty() || design_.size() != obs_.size()) throw ConfigError("GP design and observations must match");
  if (!(length_scale > 0.0)) throw ConfigError("GP length-scale must be positive");
  for (std::size_t i = 1; i < design_.size(); ++i) {
    if (!(design_[i] - design_[i - 1] >= 1e-12)) {
      throw ConfigError("GP design points must be distinct (gap >= 1e-12) and sorted");
    }
  }
}

double GpSurrogate::mean(double phi) const {
  const auto it = std::upper_bound(design_.begin(), design_.end(), phi);
  if (it == design_.begin()) return std::exp(-rate_ * (design_.front() - phi)) * obs_.front();
  if (it == design_.end()) return std::exp(-rate_ * (phi - design_.back())) * obs_.back();
  const std::size_t i = static_cast<std::size_t>(it - design_.begin());
  const double d1 = phi - design_[i - 1];
  const double d2 = design_[i] - phi;
  if (d1 == 0.0) return obs_[i - 1];
  // E[f(phi) | f(x1), f(x2)] for an OU process; stable for tiny rate * gap.
  const double denom = -std::expm1(-2.0 * rate_ * (d1 + d2));
  const double w1 = std::exp(-rate_ * d1) * -std::expm1(-2.0 * rate_ * d2) / denom;
  const double w2 = std::exp(-rate_ * d2) * -std::expm1(-2.0 * rate_ * d1) / denom;
  return w1 * obs_[i - 1] + w2 * obs_[i];
}

GpSurrogate fit_gp(std::span<const double> design, std::span<const char> selected, double length_scale) {
  std::vector<std::size_t> order(design.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return design[a] < design[b]; });
  std::vector<double> x(design.size());
  std::vector<double> y(design.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    x[k] = design[order[k]];
    y[k] = selected[order[k]] ? 1.0 : 0.0;
  }
  return GpSurrogate(std::move(x), std::move(y), length_scale);
}

ConditionedDensity::ConditionedDensity(const GpSurrogate& surrogate, Index h)
    : surrogate_(surrogate), h_(h), cell_mass_(kCells), cumulative_(kCells + 1, 0.0) {
  const double a = null_shape(h);
  const double width = 1.0 / static_cast<double>(kCells);
  for (Index k = 0; k < kCells; ++k) {
    const double mid = (static_cast<double>(k) + 0.5) * width;
    cell_mass_[k] = surrogate_.mean(mid) * beta_pdf(mid, a, a) * width;
    cumulative_[k + 1] = cumulative_[k] + cell_mass_[k];
  }
  normalizer_ = cumulative_[kCells];
  if (!(normalizer_ > 0.0)) throw NumericalUnderflow("integral of p_hat * pi vanished; every indicator was 0");
}

double ConditionedDensity::unnormalized_mass(double lo, double hi) const {
  lo = std::clamp(lo, 0.0, 1.0);
  hi = std::clamp(hi, 0.0, 1.0);
  if (!(hi > lo)) return 0.0;
  const double width = 1.0 / static_cast<double>(kCells);
  const double a = null_shape(h_);
  const auto cell_of = [&](double x) { return std::min<Index>(kCells - 1, static_cast<Index>(x / width)); };
  const auto partial = [&](double from, double to) {
    if (!(to > from)) return 0.0;
    const double mid = 0.5 * (from + to);
    return surrogate_.mean(mid) * beta_pdf(mid, a, a) * (to - from);
  };
  const Index first = cell_of(lo);
  const Index last = cell_of(hi);
  if (first == last) {
    const double cell_lo = static_cast<double>(first) * width;
    if (lo == cell_lo && hi - lo >= width) return cell_mass_[first];
    return partial(lo, hi);
  }
  double total = 0.0;
  const double first_hi = static_cast<double>(first + 1) * width;
  total += lo == static_cast<double>(first) * width ? cell_mass_[first] : partial(lo, first_hi);
  total += cumulative_[last] - cumulative_[first + 1];
  const double last_lo = static_cast<double>(last) * width;
  total += hi >= 1.0 ? cell_mass_[last] : partial(last_lo, hi);
  return total;
}

double ConditionedDensity::proposal_density(double phi) const {
  if (phi < 0.0 || phi > 1.0) return 0.0;
  const Index k = std::min<Index>(kCells - 1, static_cast<Index>(phi * static_cast<double>(kCells)));
  return cell_mass_[k] / normalizer_ * static_cast<double>(kCells);
}

double ConditionedDensity::sample(Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double target = u(rng) * normalizer_;
  auto it = std::upper_bound(cumulative_.begin() + 1, cumulative_.end(), target);
  Index k = static_cast<Index>(it - cumulative_.begin()) - 1;
  k = std::min<Index>(k, kCells - 1);
  while (cell_mass_[k] <= 0.0 && k > 0) --k;
  const double width = 1.0 / static_cast<double>(kCells);
  return (static_cast<double>(k) + u(rng)) * width;
}

CriticalMass gp_masses(const ConditionedDensity& density, const TwoSidedBounds& bounds) {
  const double critical = density.unnormalized_mass(0.0, bounds.lower) + density.unnormalized_mass(bounds.upper, 1.0);
  return {critical, density.normalizer()};
}

double gp_direct_p(const ConditionedDensity& density, const TwoSidedBounds& bounds) {
  const auto m = gp_masses(density, bounds);
  return mass_ratio(m.critical, m.total);
}

IsResult gp_is_p(const ConditionedDensity& density, const SelectionOracle& oracle, const TwoSidedBounds& bounds,
                 Index n_tilde, Rng& rng, bool pool_design, Index workers) {
  std::vector<double> phis(n_tilde);
  for (auto& p : phis) p = density.sample(rng);
  std::vector<char> selected(n_tilde, 0);
  parallel_for(n_tilde, workers, [&](std::size_t i) { selected[i] = oracle(phis[i]) ? 1 : 0; });

  const double a = null_shape(density.h());
  std::vector<double> all(phis);
  std::vector<char> sel(selected);
  if (pool_design) {
    const auto& design = density.surrogate().design();
    const auto& obs = density.surrogate().observations();
    all.insert(all.end(), design.begin(), design.end());
    for (double y : obs) sel.push_back(y > 0.5 ? 1 : 0);
  }
  const double n_design = pool_design ? static_cast<double>(density.surrogate().design().size()) : 0.0;
  const double n_is = static_cast<double>(n_tilde);
  std::vector<double> weights(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double q = (n_design + n_is * density.proposal_density(all[i])) / (n_design + n_is);
    weights[i] = q > 0.0 ? beta_pdf(all[i], a, a) / q : 0.0;
  }
  IsResult r{0.0, static_cast<Index>(std::count(sel.begin(), sel.end(), 1)), static_cast<Index>(all.size())};
  r.p_value = importance_p_hat(all, sel, weights, bounds);
  return r;
}

std::string_view to_string(SamplerMode m) {
  switch (m) {
    case SamplerMode::gp_direct: return "gp";
    case SamplerMode::gp_is: return "gp-is";
    case SamplerMode::naive: return "naive";
    case SamplerMode::naive_stratified: return "naive-stratified";
  }
  return "?";
}

SamplerMode parse_sampler_mode(std::string_view s) {
  if (s == "gp" || s == "gp-direct") return SamplerMode::gp_direct;
  if (s == "gp-is") return SamplerMode::gp_is;
  if (s == "naive") return SamplerMode::naive;
  if (s == "naive-stratified") return SamplerMode::naive_stratified;
  throw ConfigError("unknown sampler mode: " + std::string(s));
}

GpDesign evaluate_design(const SelectionOracle& oracle, Index n, std::uint64_t seed, std::optional<bool> phi_obs_selected,
                         Index workers) {
  const double phi_obs = oracle.path().phi_obs();
  std::vector<double> phis = stratified_phis(n, PhiDistribution::uniform01, oracle.path().window().h, seed);
  std::erase_if(phis, [&](double p) { return std::abs(p - phi_obs) < 1e-12 || p <= 0.0 || p >= 1.0; });
  std::vector<char> selected(phis.size(), 0);
  parallel_for(phis.size(), workers, [&](std::size_t i) { selected[i] = oracle(phis[i]) ? 1 : 0; });
  const bool at_obs = phi_obs_selected ? *phi_obs_selected : oracle(phi_obs);
  const auto pos = std::lower_bound(phis.begin(), phis.end(), phi_obs) - phis.begin();
  phis.insert(phis.begin() + pos, phi_obs);
  selected.insert(selected.begin() + pos, at_obs ? 1 : 0);
  return {std::move(phis), std::move(selected)};
}

PValueReport mc_p_value(const PhiPath& path, const DetectionResult& observed, Conditioning conditioning,
                        const SamplerConfig& sampler) {
  if (sampler.n < 1) throw ConfigError("N must be at least 1");
  const Window& w = path.window();
  if (!observed.contains(w.tau_hat)) throw ConfigError("tau_hat is not a detected changepoint");
  const SelectionOracle oracle(path, replay_config(observed), observed.changepoints, conditioning, sampler.early_stop);
  const double phi_obs = path.phi_obs();
  const auto bounds = two_sided_bounds(phi_obs, w.h);
  PValueReport rep;
  rep.tau_hat = w.tau_hat;
  rep.phi_obs = phi_obs;
  rep.phi_lower = bounds.lower;
  rep.phi_upper = bounds.upper;
  rep.conditioning = conditioning;
  rep.diagnostics["N"] = static_cast<double>(sampler.n);

  switch (sampler.mode) {
    case SamplerMode::gp_direct:
    case SamplerMode::gp_is: {
      const auto design = evaluate_design(oracle, sampler.n, sampler.seed, true, sampler.workers);
      const GpSurrogate gp(design.phis, std::vector<double>(design.selected.begin(), design.selected.end()),
                           sampler.length_scale);
      const ConditionedDensity density(gp, w.h);
      rep.diagnostics["length_scale"] = sampler.length_scale;
      rep.diagnostics["design_selected"] =
          static_cast<double>(std::count(design.selected.begin(), design.selected.end(), 1));
      if (sampler.mode == SamplerMode::gp_direct) {
        rep.method = PValueMethod::mc_gp;
        rep.p_value = gp_direct_p(density, bounds);
      } else {
        rep.method = PValueMethod::mc_gp_is;
        Rng rng(derive_seed(sampler.seed, 1));
        const auto is = gp_is_p(density, oracle, bounds, sampler.n_tilde, rng, sampler.pool_design, sampler.workers);
        rep.p_value = is.p_value;
        rep.diagnostics["N_tilde"] = static_cast<double>(sampler.n_tilde);
        rep.diagnostics["is_selected"] = static_cast<double>(is.selected);
      }
      break;
    }
    case SamplerMode::naive:
    case SamplerMode::naive_stratified: {
      rep.method = PValueMethod::mc_naive;
      Rng rng(sampler.seed);
      const BetaLaw law{null_shape(w.h), null_shape(w.h)};
      std::vector<double> phis =
          sampler.mode == SamplerMode::naive ? iid_sample(sampler.n, law, rng) : stratified_sample(sampler.n, law, rng);
      std::vector<char> selected(phis.size(), 0);
      parallel_for(phis.size(), sampler.workers, [&](std::size_t i) { selected[i] = oracle(phis[i]) ? 1 : 0; });
      phis.push_back(phi_obs);
      selected.push_back(1);
      rep.p_value = naive_p_hat(phis, selected, bounds);
      rep.diagnostics["naive_selected"] = static_cast<double>(std::count(selected.begin(), selected.end(), 1));
      break;
    }
  }
  rep.diagnostics["detector_reruns"] = static_cast<double>(oracle.evaluations());
  return rep;
}

}  // namespace varsig
