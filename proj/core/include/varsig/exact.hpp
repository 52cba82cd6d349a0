#ifndef VARSIG_EXACT_HPP
#define VARSIG_EXACT_HPP

#include <optional>
#include <span>
#include <vector>

#include "varsig/detect.hpp"
#include "varsig/perturb.hpp"
#include "varsig/types.hpp"

namespace varsig {

/// Constraints are affine forms required to be >= 0 in phi.
using Constraint = LinearForm;

/// Inequalities one CUSUM segmentation step imposes on phi.
///
/// `competitors` lists every interval whose splits the step's choice had to
/// beat (for greedy fixed-K runs this spans the whole frontier). An
/// accepted step with a threshold emits sigma*G* >= lambda; every step
/// emits sigma*G* >= +-G for all competing (interval, split) pairs, with
/// sigma the sign of the chosen statistic. A rejected step emits
/// -lambda <= G <= lambda for every competitor.
std::vector<Constraint> step_inequalities(const PhiPath& path, const DetectionStep& step,
                                          std::span<const Segment> competitors, std::optional<double> lambda);

/// All constraints a CUSUM binseg/WBS run imposes; phi values satisfying
/// them reproduce the run's decisions exactly.
std::vector<Constraint> path_constraints(const PhiPath& path, const DetectorConfig& config,
                                         const DetectionResult& run);

/// Intersection of {phi : c(phi) >= 0} over constraints, clipped to [0,1].
/// Returns an empty union when infeasible.
IntervalUnion solve_interval(std::span<const Constraint> constraints);

struct SelectionSetStats {
  std::size_t replays = 0;
  std::size_t regions = 0;
  std::size_t ambiguous = 0;
};

/// S = {phi : the detector re-run on X'(phi) selects the event}, as a
/// union of intervals. Walks the phi axis: replays the detector at phi_obs
/// and then at the midpoint of each uncovered gap, keeping each replay's
/// exact feasible interval. Gaps narrower than 1e-12 are assigned by their
/// midpoint replay and counted as ambiguous.
IntervalUnion selection_set(const PhiPath& path, const DetectorConfig& config, std::span<const Index> observed_model,
                            Conditioning conditioning, SelectionSetStats* stats = nullptr);

/// Exact post-selection p-value for a changepoint found by CUSUM binseg or
/// WBS. `observed` is the run on the unperturbed data.
PValueReport exact_p_value(const PhiPath& path, const DetectionResult& observed, Conditioning conditioning);

/// Throws ConfigError unless the run can be handled by the exact engine.
void require_exact_compatible(const DetectorConfig& config);

}  // namespace varsig

#endif  // VARSIG_EXACT_HPP
