#include "varsig/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "varsig/errors.hpp"
#include "varsig/pvalue.hpp"

namespace varsig {

void require_exact_compatible(const DetectorConfig& config) {
  if (config.stat != StatKind::cusum_squares || config.algorithm == Algorithm::pelt) {
    throw ConfigError("the exact engine needs CUSUM binary segmentation or WBS");
  }
  if (std::holds_alternative<Penalty>(config.stop)) throw ConfigError("the exact engine needs a threshold or count");
}

std::vector<Constraint> step_inequalities(const PhiPath& path, const DetectionStep& step,
                                          std::span<const Segment> competitors, std::optional<double> lambda) {
  std::vector<Constraint> out;
  if (!step.accepted) {
    const double lam = lambda.value_or(std::numeric_limits<double>::infinity());
    for (const auto& iv : competitors) {
      const auto range = admissible_splits(StatKind::cusum_squares, iv);
      if (range.empty()) continue;
      for (Index t = range.first; t <= range.last; ++t) {
        const auto g = cusum_phi_coeff(path, iv, t);
        out.push_back({lam - g.offset, -g.slope});
        out.push_back({lam + g.offset, g.slope});
      }
    }
    return out;
  }
  const auto chosen = cusum_phi_coeff(path, step.interval, step.split);
  const double sigma = step.value >= 0.0 ? 1.0 : -1.0;
  const LinearForm signed_chosen{sigma * chosen.offset, sigma * chosen.slope};
  if (lambda) out.push_back({signed_chosen.offset - *lambda, signed_chosen.slope});
  for (const auto& iv : competitors) {
    const auto range = admissible_splits(StatKind::cusum_squares, iv);
    if (range.empty()) continue;
    for (Index t = range.first; t <= range.last; ++t) {
      if (iv == step.interval && t == step.split) continue;
      const auto g = cusum_phi_coeff(path, iv, t);
      out.push_back({signed_chosen.offset - g.offset, signed_chosen.slope - g.slope});
      out.push_back({signed_chosen.offset + g.offset, signed_chosen.slope + g.slope});
    }
  }
  return out;
}

std::vector<Constraint> path_constraints(const PhiPath& path, const DetectorConfig& config,
                                         const DetectionResult& run) {
  require_exact_compatible(config);
  std::vector<Constraint> out;
  const auto append = [&out](std::vector<Constraint> more) { out.insert(out.end(), more.begin(), more.end()); };
  if (const auto* th = std::get_if<Threshold>(&config.stop)) {
    for (const auto& step : run.steps) {
      append(step_inequalities(path, step, candidate_intervals(config, step.segment), th->lambda));
    }
    return out;
  }
  // Greedy fixed-K: each pick beats every split of every frontier segment.
  std::vector<Segment> frontier{{0, path.size()}};
  for (const auto& step : run.steps) {
    std::vector<Segment> competitors;
    for (const auto& seg : frontier) {
      const auto c = candidate_intervals(config, seg);
      competitors.insert(competitors.end(), c.begin(), c.end());
    }
    append(step_inequalities(path, step, competitors, std::nullopt));
    auto it = std::find(frontier.begin(), frontier.end(), step.segment);
    if (it == frontier.end()) throw Error("segmentation trace does not match its frontier");
    *it = {step.segment.begin, step.split};
    frontier.insert(it + 1, Segment{step.split, step.segment.end});
  }
  return out;
}

IntervalUnion solve_interval(std::span<const Constraint> constraints) {
  double lo = 0.0;
  double hi = 1.0;
  for (const auto& c : constraints) {
    if (c.slope > 0.0) {
      lo = std::max(lo, -c.offset / c.slope);
    } else if (c.slope < 0.0) {
      hi = std::min(hi, -c.offset / c.slope);
    } else if (c.offset < 0.0) {
      return {};
    }
  }
  if (!(lo < hi)) return {};
  return IntervalUnion({{lo, hi}});
}

namespace {

constexpr double kMinGap = 1e-12;
constexpr std::size_t kMaxReplays = 200000;

struct Replay {
  Interval feasible;
  bool has_interval = false;
  bool selected = false;
};

}  // namespace

IntervalUnion selection_set(const PhiPath& path, const DetectorConfig& config, std::span<const Index> observed_model,
                            Conditioning conditioning, SelectionSetStats* stats) {
  require_exact_compatible(config);
  SelectionSetStats local;
  const Index tau = path.window().tau_hat;
  const auto replay = [&](double phi) {
    ++local.replays;
    if (local.replays > kMaxReplays) throw Error("selection set walk did not terminate");
    const auto run = detect_squares(path.squares_at(phi), config);
    Replay r;
    r.selected = conditioning == Conditioning::tau_in_model
                     ? run.contains(tau)
                     : std::equal(run.changepoints.begin(), run.changepoints.end(), observed_model.begin(),
                                  observed_model.end());
    const auto constraints = path_constraints(path, config, run);
    const auto iv = solve_interval(constraints);
    if (!iv.empty()) {
      r.feasible = iv.intervals().front();
      r.has_interval = true;
    }
    return r;
  };

  std::vector<Interval> kept;
  struct Gap {
    double lo;
    double hi;
    double probe;
  };
  std::vector<Gap> gaps{{0.0, 1.0, path.phi_obs()}};
  while (!gaps.empty()) {
    const Gap gap = gaps.back();
    gaps.pop_back();
    ++local.regions;
    const auto r = replay(gap.probe);
    const bool covers = r.has_interval && r.feasible.lo <= gap.probe && gap.probe <= r.feasible.hi;
    if (!covers || gap.hi - gap.lo < kMinGap) {
      // Measure-zero or rounding-level region: take the probe's event.
      ++local.ambiguous;
      if (r.selected) kept.push_back({gap.lo, gap.hi});
      continue;
    }
    const double lo = std::max(gap.lo, r.feasible.lo);
    const double hi = std::min(gap.hi, r.feasible.hi);
    if (r.selected) kept.push_back({lo, hi});
    if (lo > gap.lo) gaps.push_back({gap.lo, lo, 0.5 * (gap.lo + lo)});
    if (hi < gap.hi) gaps.push_back({hi, gap.hi, 0.5 * (hi + gap.hi)});
  }
  if (stats) *stats = local;
  return IntervalUnion(std::move(kept));
}

PValueReport exact_p_value(const PhiPath& path, const DetectionResult& observed, Conditioning conditioning) {
  const auto config = replay_config(observed);
  require_exact_compatible(config);
  const Index h = path.window().h;
  SelectionSetStats stats;
  const auto s = selection_set(path, config, observed.changepoints, conditioning, &stats);
  const auto bounds = two_sided_bounds(path.phi_obs(), h);
  const auto masses = truncated_beta_masses(s, bounds, h);

  PValueReport r;
  r.tau_hat = path.window().tau_hat;
  r.phi_obs = path.phi_obs();
  r.phi_lower = bounds.lower;
  r.phi_upper = bounds.upper;
  r.method = PValueMethod::exact_cusum;
  r.conditioning = conditioning;
  r.p_value = mass_ratio(masses.critical, masses.total);
  r.diagnostics["intervals"] = static_cast<double>(s.size());
  r.diagnostics["detector_reruns"] = static_cast<double>(stats.replays);
  r.diagnostics["ambiguous_regions"] = static_cast<double>(stats.ambiguous);
  r.diagnostics["s_measure"] = s.measure();
  r.diagnostics["s_beta_measure"] = masses.total;
  return r;
}

}  // namespace varsig
