#ifndef VARSIG_DETECT_HPP
#define VARSIG_DETECT_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "varsig/types.hpp"

namespace varsig {

/// Half-open range [begin, end) of 0-based positions. A split t with
/// begin < t < end puts [begin, t) on the left and [t, end) on the right;
/// in 1-based terms this is the segment (begin+1 .. end) split after t.
struct Segment {
  Index begin = 0;
  Index end = 0;

  Index length() const noexcept { return end - begin; }
  bool contains(const Segment& o) const noexcept { return begin <= o.begin && o.end <= end; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

enum class StatKind { cusum_squares, likelihood_ratio };
enum class Algorithm { binseg, wbs, pelt };

struct Threshold {
  double lambda;
};
struct FixedCount {
  Index k;
};
struct Penalty {
  double beta;
};
using StopRule = std::variant<Threshold, FixedCount, Penalty>;

std::string_view to_string(StatKind k);
std::string_view to_string(Algorithm a);

/// Named detector such as "cusum-binseg" or "lr-pelt".
struct MethodSpec {
  Algorithm algorithm = Algorithm::binseg;
  StatKind stat = StatKind::cusum_squares;
};
MethodSpec parse_method_spec(std::string_view name);
std::string method_name(const MethodSpec& m);

/// Prefix sums over a vector of squared values.
class SquareSums {
 public:
  explicit SquareSums(std::span<const double> squares);
  double sum(Index begin, Index end) const noexcept { return prefix_[end] - prefix_[begin]; }
  double sum(const Segment& s) const noexcept { return sum(s.begin, s.end); }
  Index size() const noexcept { return prefix_.size() - 1; }

 private:
  std::vector<double> prefix_;
};

/// CUSUM of the mean of y on `segment` at `split`:
/// sqrt(nL nR / n) * (mean(left) - mean(right)).
double cusum_stat(std::span<const double> y, const Segment& segment, Index split);
double cusum_stat(const SquareSums& sums, const Segment& segment, Index split);

/// Gaussian profile likelihood-ratio statistic for a variance change:
/// n log(S/n) - nL log(SL/nL) - nR log(SR/nR) on centred squares.
/// Throws DegenerateSegment if any of the three sums is not positive.
double lr_stat(const TimeSeries& series, const Segment& segment, Index split);
double lr_stat(const SquareSums& sums, const Segment& segment, Index split);

/// Piecewise-variance segment cost n log(S/n) (negative profile
/// log-likelihood up to constants).
double segment_cost(double sum_squares, Index n);

/// Smallest piece length on each side of a split for the LR statistic and PELT.
inline constexpr Index kMinSegment = 2;

/// One decision of a segmentation run. For binseg `interval == segment`;
/// for WBS `interval` is the (drawn or full) interval the maximum came from.
struct DetectionStep {
  Segment segment;
  Segment interval;
  Index split = 0;
  double value = 0.0;
  /// +1 when the variance increases after the split, -1 otherwise.
  int direction = 0;
  bool accepted = false;
};

struct DetectorConfig {
  Algorithm algorithm = Algorithm::binseg;
  StatKind stat = StatKind::cusum_squares;
  StopRule stop = Threshold{0.0};
  /// WBS: explicit intervals; when empty, `n_intervals` are drawn with `seed`.
  std::vector<Segment> intervals;
  Index n_intervals = 0;
  std::uint64_t seed = 0;
};

struct DetectionResult {
  std::vector<Index> changepoints;
  std::vector<DetectionStep> steps;
  StatKind stat = StatKind::cusum_squares;
  Algorithm algorithm = Algorithm::binseg;
  StopRule stop = Threshold{0.0};
  std::vector<Segment> intervals;
  std::uint64_t seed = 0;
  /// Set when an early-stop hook ended the run.
  bool stopped_early = false;

  bool contains(Index cp) const;
};

/// Called after every accepted split with the split position; returning
/// false ends the run immediately.
using AcceptHook = std::function<bool(Index)>;

/// Cached scan results for WBS intervals whose statistic does not change
/// between re-runs, keyed by interval position in the stored list.
struct IntervalScan {
  Index split = 0;
  double score = 0.0;
  double value = 0.0;
  bool valid = false;
};
struct ScanCache {
  std::vector<std::optional<IntervalScan>> by_interval;
};

/// Draw WBS intervals uniformly over all (s, e) with at least 4 points.
std::vector<Segment> draw_intervals(Index series_length, Index count, std::uint64_t seed);

/// Run a detector on precomputed centred squares.
DetectionResult detect_squares(std::span<const double> squares, const DetectorConfig& config,
                               const AcceptHook& on_accept = {}, const ScanCache* cache = nullptr);

DetectionResult binary_segmentation(const TimeSeries& series, StatKind stat, const StopRule& stop);
DetectionResult wild_binary_segmentation(const TimeSeries& series, StatKind stat, const StopRule& stop,
                                         Index n_intervals, std::uint64_t seed);
DetectionResult wild_binary_segmentation(const TimeSeries& series, StatKind stat, const StopRule& stop,
                                         std::vector<Segment> intervals);
/// PELT for the piecewise-variance Gaussian model, minimum segment length 2.
DetectionResult pelt(const TimeSeries& series, double penalty);
/// Optimal partitioning without pruning; reference for PELT.
std::vector<Index> optimal_partition_exhaustive(std::span<const double> squares, double penalty);

/// Runs `config` on a series (draws WBS intervals once if needed).
DetectionResult run_detector(const TimeSeries& series, const DetectorConfig& config);

/// Config that replays `observed` verbatim: same algorithm, statistic,
/// stop rule and WBS interval list.
DetectorConfig replay_config(const DetectionResult& observed);

/// Intervals searched when a detector examines `segment`: the segment
/// itself first, then (WBS) every stored interval it contains, in order.
std::vector<Segment> candidate_intervals(const DetectorConfig& config, const Segment& segment);

/// Admissible splits inside an interval for a statistic: empty range when
/// the interval is too short.
struct SplitRange {
  Index first = 0;
  Index last = 0;  // inclusive
  bool empty() const noexcept { return last < first; }
};
SplitRange admissible_splits(StatKind stat, const Segment& interval);

/// Scan one interval for its best split. `score` is the maximised
/// quantity (|G| or Lambda), `value` the signed statistic.
IntervalScan scan_interval(const SquareSums& sums, StatKind stat, const Segment& interval);

}  // namespace varsig

#endif  // VARSIG_DETECT_HPP
