#include "varsig/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "varsig/errors.hpp"

namespace varsig {

std::string_view to_string(StatKind k) {
  return k == StatKind::cusum_squares ? "cusum-squares" : "likelihood-ratio";
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::binseg: return "binseg";
    case Algorithm::wbs: return "wbs";
    case Algorithm::pelt: return "pelt";
  }
  return "unknown";
}

MethodSpec parse_method_spec(std::string_view name) {
  const auto dash = name.find('-');
  if (dash == std::string_view::npos) throw ConfigError("unknown method: " + std::string(name));
  const auto stat = name.substr(0, dash);
  const auto algo = name.substr(dash + 1);
  MethodSpec m;
  if (stat == "cusum") {
    m.stat = StatKind::cusum_squares;
  } else if (stat == "lr") {
    m.stat = StatKind::likelihood_ratio;
  } else {
    throw ConfigError("unknown method: " + std::string(name));
  }
  if (algo == "binseg") {
    m.algorithm = Algorithm::binseg;
  } else if (algo == "wbs") {
    m.algorithm = Algorithm::wbs;
  } else if (algo == "pelt" && m.stat == StatKind::likelihood_ratio) {
    m.algorithm = Algorithm::pelt;
  } else {
    throw ConfigError("unknown method: " + std::string(name));
  }
  return m;
}

std::string method_name(const MethodSpec& m) {
  return std::string(m.stat == StatKind::cusum_squares ? "cusum-" : "lr-") + std::string(to_string(m.algorithm));
}

SquareSums::SquareSums(std::span<const double> squares) : prefix_(squares.size() + 1, 0.0) {
  for (std::size_t i = 0; i < squares.size(); ++i) prefix_[i + 1] = prefix_[i] + squares[i];
}

bool DetectionResult::contains(Index cp) const {
  return std::binary_search(changepoints.begin(), changepoints.end(), cp);
}

double cusum_stat(const SquareSums& sums, const Segment& segment, Index split) {
  const double nl = static_cast<double>(split - segment.begin);
  const double nr = static_cast<double>(segment.end - split);
  const double n = static_cast<double>(segment.length());
  const double left = sums.sum(segment.begin, split) / nl;
  const double right = sums.sum(split, segment.end) / nr;
  return std::sqrt(nl * nr / n) * (left - right);
}

double cusum_stat(std::span<const double> y, const Segment& segment, Index split) {
  return cusum_stat(SquareSums(y), segment, split);
}

double segment_cost(double sum_squares, Index n) {
  if (!(sum_squares > 0.0)) {
    throw DegenerateSegment("segment of length " + std::to_string(n) + " has zero sum of squares");
  }
  const double nd = static_cast<double>(n);
  return nd * std::log(sum_squares / nd);
}

double lr_stat(const SquareSums& sums, const Segment& segment, Index split) {
  const double total = sums.sum(segment);
  const double left = sums.sum(segment.begin, split);
  const double right = sums.sum(split, segment.end);
  if (!(total > 0.0 && left > 0.0 && right > 0.0)) {
    throw DegenerateSegment("zero partial sum of squares in segment [" + std::to_string(segment.begin + 1) +
                            ", " + std::to_string(segment.end) + "] at split " + std::to_string(split));
  }
  return segment_cost(total, segment.length()) - segment_cost(left, split - segment.begin) -
         segment_cost(right, segment.end - split);
}

double lr_stat(const TimeSeries& series, const Segment& segment, Index split) {
  const auto squares = series.centered_squares();
  return lr_stat(SquareSums(squares), segment, split);
}

SplitRange admissible_splits(StatKind stat, const Segment& interval) {
  const Index margin = stat == StatKind::cusum_squares ? 1 : kMinSegment;
  if (interval.length() < 2 * margin) return {1, 0};
  return {interval.begin + margin, interval.end - margin};
}

IntervalScan scan_interval(const SquareSums& sums, StatKind stat, const Segment& interval) {
  IntervalScan best;
  const auto range = admissible_splits(stat, interval);
  if (range.empty()) return best;
  for (Index t = range.first; t <= range.last; ++t) {
    const double value = stat == StatKind::cusum_squares ? cusum_stat(sums, interval, t)
                                                         : lr_stat(sums, interval, t);
    const double score = stat == StatKind::cusum_squares ? std::fabs(value) : value;
    if (!best.valid || score > best.score) {
      best = {t, score, value, true};
    }
  }
  return best;
}

std::vector<Segment> candidate_intervals(const DetectorConfig& config, const Segment& segment) {
  std::vector<Segment> out{segment};
  if (config.algorithm == Algorithm::wbs) {
    for (const auto& iv : config.intervals) {
      if (segment.contains(iv) && !(iv == segment)) out.push_back(iv);
    }
  }
  return out;
}

std::vector<Segment> draw_intervals(Index series_length, Index count, std::uint64_t seed) {
  std::vector<Segment> out;
  if (series_length < 4) return out;
  std::mt19937_64 rng(seed);
  // Uniform over pairs 0 <= b < e <= T with e - b >= 4, by rejection.
  std::uniform_int_distribution<Index> pick(0, series_length);
  out.reserve(count);
  while (out.size() < count) {
    Index b = pick(rng);
    Index e = pick(rng);
    if (b > e) std::swap(b, e);
    if (e - b >= 4) out.push_back({b, e});
  }
  return out;
}

namespace {

int direction_of(const SquareSums& sums, const Segment& interval, Index split) {
  const double left = sums.sum(interval.begin, split) / static_cast<double>(split - interval.begin);
  const double right = sums.sum(split, interval.end) / static_cast<double>(interval.end - split);
  return right > left ? +1 : -1;
}

struct SegmentBest {
  Segment interval;
  IntervalScan scan;
};

class Segmenter {
 public:
  Segmenter(std::span<const double> squares, const DetectorConfig& config, const AcceptHook& hook,
            const ScanCache* cache)
      : sums_(squares), config_(config), hook_(hook), cache_(cache) {}

  SegmentBest best_in(const Segment& segment) const {
    SegmentBest best{segment, {}};
    const auto scan_one = [&](const Segment& iv, std::optional<Index> stored_index) {
      IntervalScan s;
      if (stored_index && cache_ && *stored_index < cache_->by_interval.size() &&
          cache_->by_interval[*stored_index]) {
        s = *cache_->by_interval[*stored_index];
      } else {
        s = scan_interval(sums_, config_.stat, iv);
      }
      if (s.valid && (!best.scan.valid || s.score > best.scan.score)) best = {iv, s};
    };
    scan_one(segment, std::nullopt);
    if (config_.algorithm == Algorithm::wbs) {
      for (Index i = 0; i < config_.intervals.size(); ++i) {
        const auto& iv = config_.intervals[i];
        if (segment.contains(iv) && !(iv == segment)) scan_one(iv, i);
      }
    }
    return best;
  }

  DetectionStep make_step(const Segment& segment, const SegmentBest& b, bool accepted) const {
    return {segment, b.interval, b.scan.split, b.scan.value, direction_of(sums_, b.interval, b.scan.split),
            accepted};
  }

  void run_threshold(double lambda, DetectionResult& out) const {
    std::vector<Segment> stack{{0, sums_.size()}};
    while (!stack.empty()) {
      const Segment seg = stack.back();
      stack.pop_back();
      const auto best = best_in(seg);
      if (!best.scan.valid) continue;
      const bool accepted = best.scan.score >= lambda;
      out.steps.push_back(make_step(seg, best, accepted));
      if (!accepted) continue;
      out.changepoints.push_back(best.scan.split);
      if (hook_ && !hook_(best.scan.split)) {
        out.stopped_early = true;
        return;
      }
      stack.push_back({best.scan.split, seg.end});
      stack.push_back({seg.begin, best.scan.split});
    }
  }

  void run_count(Index k, DetectionResult& out) const {
    std::vector<std::pair<Segment, SegmentBest>> frontier;
    frontier.emplace_back(Segment{0, sums_.size()}, best_in({0, sums_.size()}));
    for (Index step = 0; step < k; ++step) {
      std::size_t chosen = frontier.size();
      for (std::size_t i = 0; i < frontier.size(); ++i) {
        const auto& scan = frontier[i].second.scan;
        if (!scan.valid) continue;
        if (chosen == frontier.size() || scan.score > frontier[chosen].second.scan.score) chosen = i;
      }
      if (chosen == frontier.size()) break;
      const auto [seg, best] = frontier[chosen];
      out.steps.push_back(make_step(seg, best, true));
      out.changepoints.push_back(best.scan.split);
      if (hook_ && !hook_(best.scan.split)) {
        out.stopped_early = true;
        return;
      }
      const Segment left{seg.begin, best.scan.split};
      const Segment right{best.scan.split, seg.end};
      frontier[chosen] = {left, best_in(left)};
      frontier.insert(frontier.begin() + static_cast<std::ptrdiff_t>(chosen) + 1, {right, best_in(right)});
    }
  }

 private:
  SquareSums sums_;
  const DetectorConfig& config_;
  const AcceptHook& hook_;
  const ScanCache* cache_;
};

std::vector<Index> pelt_impl(std::span<const double> squares, double penalty, bool prune) {
  const Index n = squares.size();
  if (std::isinf(penalty) || n < 2 * kMinSegment) return {};
  const SquareSums sums(squares);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // best[t]: optimal penalised cost of the first t points; best[0] = -penalty
  // so that every segment including the first pays the penalty once.
  std::vector<double> best(n + 1, kInf);
  std::vector<Index> last(n + 1, 0);
  best[0] = -penalty;
  std::vector<Index> candidates;
  // Pruning decided at time t only applies from t + kMinSegment on, since
  // t itself is not yet an admissible last changepoint before then.
  std::vector<std::vector<Index>> pending_prune(n + kMinSegment + 1);
  for (Index t = kMinSegment; t <= n; ++t) {
    const Index fresh = t - kMinSegment;
    if (fresh == 0 || best[fresh] < kInf) candidates.push_back(fresh);
    for (Index r : pending_prune[t]) std::erase(candidates, r);
    double f = kInf;
    Index arg = 0;
    for (Index tau : candidates) {
      const double c = best[tau] + segment_cost(sums.sum(tau, t), t - tau) + penalty;
      if (c < f) {
        f = c;
        arg = tau;
      }
    }
    best[t] = f;
    last[t] = arg;
    if (prune && t + kMinSegment <= n) {
      auto& slot = pending_prune[t + kMinSegment];
      for (Index tau : candidates) {
        if (best[tau] + segment_cost(sums.sum(tau, t), t - tau) > f) slot.push_back(tau);
      }
    }
  }
  std::vector<Index> cps;
  for (Index t = last[n]; t > 0; t = last[t]) cps.push_back(t);
  std::reverse(cps.begin(), cps.end());
  return cps;
}

}  // namespace

DetectionResult detect_squares(std::span<const double> squares, const DetectorConfig& config,
                               const AcceptHook& on_accept, const ScanCache* cache) {
  DetectionResult out;
  out.stat = config.stat;
  out.algorithm = config.algorithm;
  out.stop = config.stop;
  out.seed = config.seed;
  if (config.algorithm == Algorithm::pelt) {
    const auto* pen = std::get_if<Penalty>(&config.stop);
    if (!pen) throw ConfigError("PELT needs a penalty stop rule");
    if (!(pen->beta > 0.0)) throw ConfigError("PELT penalty must be positive");
    out.stat = StatKind::likelihood_ratio;
    out.changepoints = pelt_impl(squares, pen->beta, true);
    return out;
  }
  DetectorConfig local = config;
  if (config.algorithm == Algorithm::wbs && local.intervals.empty()) {
    local.intervals = draw_intervals(squares.size(), config.n_intervals, config.seed);
  }
  out.intervals = local.intervals;
  Segmenter seg(squares, local, on_accept, cache);
  if (const auto* th = std::get_if<Threshold>(&config.stop)) {
    seg.run_threshold(th->lambda, out);
  } else if (const auto* k = std::get_if<FixedCount>(&config.stop)) {
    seg.run_count(k->k, out);
  } else {
    throw ConfigError("binary segmentation needs a threshold or a changepoint count");
  }
  std::sort(out.changepoints.begin(), out.changepoints.end());
  return out;
}

DetectionResult run_detector(const TimeSeries& series, const DetectorConfig& config) {
  return detect_squares(series.centered_squares(), config);
}

DetectionResult binary_segmentation(const TimeSeries& series, StatKind stat, const StopRule& stop) {
  DetectorConfig cfg;
  cfg.algorithm = Algorithm::binseg;
  cfg.stat = stat;
  cfg.stop = stop;
  return run_detector(series, cfg);
}

DetectionResult wild_binary_segmentation(const TimeSeries& series, StatKind stat, const StopRule& stop,
                                         Index n_intervals, std::uint64_t seed) {
  if (n_intervals < 1) throw ConfigError("WBS needs at least one interval");
  DetectorConfig cfg;
  cfg.algorithm = Algorithm::wbs;
  cfg.stat = stat;
  cfg.stop = stop;
  cfg.n_intervals = n_intervals;
  cfg.seed = seed;
  cfg.intervals = draw_intervals(series.size(), n_intervals, seed);
  return run_detector(series, cfg);
}

DetectionResult wild_binary_segmentation(const TimeSeries& series, StatKind stat, const StopRule& stop,
                                         std::vector<Segment> intervals) {
  if (intervals.empty()) throw ConfigError("WBS needs at least one interval");
  for (const auto& iv : intervals) {
    if (!(iv.begin < iv.end && iv.end <= series.size())) throw ConfigError("WBS interval out of range");
  }
  DetectorConfig cfg;
  cfg.algorithm = Algorithm::wbs;
  cfg.stat = stat;
  cfg.stop = stop;
  cfg.n_intervals = intervals.size();
  cfg.intervals = std::move(intervals);
  return run_detector(series, cfg);
}

DetectionResult pelt(const TimeSeries& series, double penalty) {
  DetectorConfig cfg;
  cfg.algorithm = Algorithm::pelt;
  cfg.stat = StatKind::likelihood_ratio;
  cfg.stop = Penalty{penalty};
  return run_detector(series, cfg);
}

std::vector<Index> optimal_partition_exhaustive(std::span<const double> squares, double penalty) {
  return pelt_impl(squares, penalty, false);
}

DetectorConfig replay_config(const DetectionResult& observed) {
  DetectorConfig cfg;
  cfg.algorithm = observed.algorithm;
  cfg.stat = observed.stat;
  cfg.stop = observed.stop;
  cfg.intervals = observed.intervals;
  cfg.n_intervals = observed.intervals.size();
  cfg.seed = observed.seed;
  return cfg;
}

}  // namespace varsig
