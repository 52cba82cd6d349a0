#ifndef VARSIG_HARNESS_HPP
#define VARSIG_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varsig/detect.hpp"
#include "varsig/mc.hpp"
#include "varsig/types.hpp"

namespace varsig {

enum class ScenarioKind { qq, accuracy };
enum class InferenceEngine { automatic, exact, mc, power_exact, power_mc };

std::string_view to_string(ScenarioKind k);
std::string_view to_string(InferenceEngine e);
InferenceEngine parse_engine(std::string_view s);

struct Scenario {
  std::string name = "custom";
  ScenarioKind kind = ScenarioKind::qq;
  Index T = 200;
  /// Fixed true changepoints (0-based split positions).
  std::vector<Index> changepoints;
  /// When positive, this many changepoints are drawn per replicate from
  /// {min_gap, ..., T - min_gap} with pairwise gaps of at least min_gap.
  Index random_changepoints = 0;
  Index min_gap = 0;
  std::vector<double> segment_variances{1.0};
  double mu = 0.0;

  MethodSpec method;
  /// Threshold mode: lambda, or calibrated on an H0 pilot when empty.
  std::optional<double> lambda;
  std::optional<Index> k;
  std::optional<double> penalty;
  Index wbs_intervals = 100;
  Index pilot = 200;

  std::vector<Index> h_values{10};
  Conditioning conditioning = Conditioning::tau_in_model;
  InferenceEngine engine = InferenceEngine::automatic;
  std::vector<Index> n_values{100};
  Index n_tilde = 100;
  double length_scale = 100.0;
  SamplerMode mode = SamplerMode::gp_direct;
  std::vector<Index> n_w_values{1};

  /// Accuracy runs: statistics compared and hit radius.
  std::vector<StatKind> stats{StatKind::cusum_squares};
  Index radius = 10;

  Index replicates = 500;
  std::uint64_t seed = 1;
  Index workers = 1;
};

/// Checks the invariants; throws ConfigError naming the offending field.
void validate(const Scenario& s);

/// Flat `key = value` text; '#' starts a comment; lists are comma separated.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_text(const Scenario& s);

/// fig4a, table1, fig8, fig10.
Scenario builtin_scenario(std::string_view name);
std::vector<std::string> builtin_scenario_names();

/// True changepoints of one replicate (fixed or drawn).
std::vector<Index> replicate_changepoints(const Scenario& s, Index replicate);
TimeSeries generate(const Scenario& s, Index replicate);

/// Detector config of the scenario for one replicate; `lambda` fills a
/// threshold stop rule left open by the scenario.
DetectorConfig scenario_detector(const Scenario& s, Index replicate, std::optional<double> lambda);

/// Threshold at which about half of the H0 pilot runs detect something:
/// the median of the root-segment maximum statistic over `pilot` null series.
double calibrate_lambda(const Scenario& s);

struct QqSeries {
  std::string label;
  Index h = 0;
  Index n = 0;
  Index n_w = 1;
  std::vector<double> conditional;
  std::vector<double> naive;
  Index skipped_boundary = 0;
  Index failures = 0;
  double ks_stat = 0.0;
  double ks_p = 1.0;
  double naive_ks_stat = 0.0;
  double naive_ks_p = 1.0;
};

struct QqResult {
  Scenario scenario;
  std::optional<double> lambda;
  Index replicates_with_detection = 0;
  Index detections = 0;
  std::vector<QqSeries> series;
};

QqResult run_qq(const Scenario& s);

struct AccuracyResult {
  Scenario scenario;
  std::vector<Index> truths;
  /// hits[i][j]: share of replicates where stats[i] detected a change
  /// within the radius of truths[j].
  std::vector<std::vector<double>> hits;
};

AccuracyResult run_detection_accuracy(const Scenario& s);

/// Step-down Holm decisions at level alpha, in input order.
std::vector<bool> holm_bonferroni(std::span<const double> p_values, double alpha = 0.05);
/// Holm-adjusted p-values, in input order.
std::vector<double> holm_adjusted(std::span<const double> p_values);

/// One-sample KS distance to U(0,1).
double ks_statistic(std::vector<double> values);
/// Asymptotic KS tail probability with Stephens' small-sample correction.
double ks_pvalue(double d, std::size_t n);

/// Shortest round-trip decimal form, independent of the locale.
std::string format_double(double x);

void write_qq_csv(std::ostream& out, const QqResult& r);
void write_accuracy_csv(std::ostream& out, const AccuracyResult& r);

}  // namespace varsig

#endif  // VARSIG_HARNESS_HPP
