#include "varsig/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "varsig/errors.hpp"
#include "varsig/exact.hpp"
#include "varsig/parallel.hpp"
#include "varsig/perturb.hpp"
#include "varsig/power.hpp"
#include "varsig/pvalue.hpp"
#include "varsig/rng.hpp"

namespace varsig {

namespace {

constexpr std::uint64_t kPilotSalt = 0x70696c6f74ULL;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto c = s.find(',');
    const auto item = trim(s.substr(0, c));
    if (!item.empty()) out.push_back(item);
    if (c == std::string_view::npos) break;
    s.remove_prefix(c + 1);
  }
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("scenario field '" + std::string(key) + "': not a number: " + std::string(v));
  }
  return out;
}

template <class T>
std::vector<T> parse_numbers(std::string_view key, std::string_view v) {
  std::vector<T> out;
  for (auto item : split_list(v)) out.push_back(parse_number<T>(key, item));
  return out;
}

StatKind parse_stat(std::string_view v) {
  if (v == "cusum") return StatKind::cusum_squares;
  if (v == "lr") return StatKind::likelihood_ratio;
  throw ConfigError("scenario field 'stats': unknown statistic " + std::string(v));
}

std::string_view stat_short(StatKind k) { return k == StatKind::cusum_squares ? "cusum" : "lr"; }

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

InferenceEngine resolve_engine(const Scenario& s, Index n_w) {
  const bool exact_ok = s.method.stat == StatKind::cusum_squares && s.method.algorithm != Algorithm::pelt;
  InferenceEngine e = s.engine;
  if (e == InferenceEngine::automatic) e = exact_ok ? InferenceEngine::exact : InferenceEngine::mc;
  if (n_w > 1 && e == InferenceEngine::exact) e = InferenceEngine::power_exact;
  if (n_w > 1 && e == InferenceEngine::mc) e = InferenceEngine::power_mc;
  return e;
}

bool uses_n(InferenceEngine e) { return e == InferenceEngine::mc || e == InferenceEngine::power_mc; }

}  // namespace

std::string_view to_string(ScenarioKind k) { return k == ScenarioKind::qq ? "qq" : "accuracy"; }

std::string_view to_string(InferenceEngine e) {
  switch (e) {
    case InferenceEngine::automatic: return "auto";
    case InferenceEngine::exact: return "exact";
    case InferenceEngine::mc: return "mc";
    case InferenceEngine::power_exact: return "power-exact";
    case InferenceEngine::power_mc: return "power-mc";
  }
  return "?";
}

InferenceEngine parse_engine(std::string_view s) {
  if (s == "auto") return InferenceEngine::automatic;
  if (s == "exact") return InferenceEngine::exact;
  if (s == "mc") return InferenceEngine::mc;
  if (s == "power-exact") return InferenceEngine::power_exact;
  if (s == "power-mc") return InferenceEngine::power_mc;
  throw ConfigError("unknown engine: " + std::string(s));
}

void validate(const Scenario& s) {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("scenario field '" + field + "': " + why);
  };
  if (s.T < 4) fail("T", "series length must be at least 4");
  const Index n_changes = s.random_changepoints > 0 ? s.random_changepoints : s.changepoints.size();
  if (s.random_changepoints > 0 && !s.changepoints.empty()) fail("changepoints", "fixed and random changepoints both set");
  if (s.segment_variances.size() != n_changes + 1) fail("variances", "need one variance per segment");
  for (double v : s.segment_variances) {
    if (!(v > 0.0) || !std::isfinite(v)) fail("variances", "variances must be positive");
  }
  Index prev = 0;
  for (Index cp : s.changepoints) {
    if (cp <= prev || cp >= s.T) fail("changepoints", "must be increasing inside (0, T)");
    if (cp - prev < s.min_gap) fail("changepoints", "gap below min_gap");
    prev = cp;
  }
  if (!s.changepoints.empty() && s.T - prev < s.min_gap) fail("changepoints", "gap below min_gap");
  if (s.random_changepoints > 0 && (s.random_changepoints + 1) * s.min_gap > s.T) {
    fail("random_changepoints", "cannot place that many changes with min_gap");
  }
  const int stops = int(s.lambda.has_value()) + int(s.k.has_value()) + int(s.penalty.has_value());
  if (stops > 1) fail("lambda", "set only one of lambda, K, penalty");
  if (s.method.algorithm == Algorithm::pelt && !s.penalty) fail("penalty", "lr-pelt needs a penalty");
  if (s.method.algorithm != Algorithm::pelt && s.penalty) fail("penalty", "penalty applies to lr-pelt only");
  if (s.lambda && !(*s.lambda >= 0.0)) fail("lambda", "must be non-negative");
  if (s.penalty && !(*s.penalty > 0.0)) fail("penalty", "must be positive");
  if (s.method.algorithm == Algorithm::wbs && s.wbs_intervals == 0) fail("intervals", "WBS needs intervals");
  if (s.replicates < 1) fail("replicates", "must be at least 1");
  if (s.pilot < 1) fail("pilot", "must be at least 1");
  if (s.h_values.empty()) fail("h", "need at least one window half-width");
  for (Index h : s.h_values) {
    if (h < 1 || 2 * h > s.T) fail("h", "must satisfy 1 <= h <= T/2");
  }
  if (s.n_values.empty()) fail("N", "need at least one value");
  for (Index n : s.n_values) {
    if (n < 1) fail("N", "must be at least 1");
  }
  if (s.n_w_values.empty()) fail("n_w", "need at least one value");
  for (Index n : s.n_w_values) {
    if (n < 1) fail("n_w", "must be at least 1");
  }
  if (!(s.length_scale > 0.0)) fail("l", "must be positive");
  const bool exact_ok = s.method.stat == StatKind::cusum_squares && s.method.algorithm != Algorithm::pelt;
  if (!exact_ok && (s.engine == InferenceEngine::exact || s.engine == InferenceEngine::power_exact)) {
    fail("engine", "the exact engine requires a CUSUM binseg/WBS detector");
  }
  if (s.kind == ScenarioKind::accuracy) {
    if (s.changepoints.empty()) fail("changepoints", "accuracy runs need fixed true changepoints");
    if (s.stats.empty()) fail("stats", "need at least one statistic");
    if (!s.k && !s.lambda && !s.penalty) fail("K", "accuracy runs need an explicit stop rule");
  }
  if (s.workers < 1) fail("workers", "must be at least 1");
}

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::map<std::string, std::string, std::less<>> fields;
  Index line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("scenario line " + std::to_string(line_no) + ": expected key = value");
    }
    fields[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  for (const auto& [key, value] : fields) {
    const std::string_view v = value;
    if (key == "name") {
      s.name = value;
    } else if (key == "kind") {
      if (v == "qq") {
        s.kind = ScenarioKind::qq;
      } else if (v == "accuracy") {
        s.kind = ScenarioKind::accuracy;
      } else {
        throw ConfigError("scenario field 'kind': expected qq or accuracy");
      }
    } else if (key == "T") {
      s.T = parse_number<Index>(key, v);
    } else if (key == "changepoints") {
      s.changepoints = parse_numbers<Index>(key, v);
    } else if (key == "random_changepoints") {
      s.random_changepoints = parse_number<Index>(key, v);
    } else if (key == "min_gap") {
      s.min_gap = parse_number<Index>(key, v);
    } else if (key == "variances") {
      s.segment_variances = parse_numbers<double>(key, v);
    } else if (key == "mu") {
      s.mu = parse_number<double>(key, v);
    } else if (key == "method") {
      s.method = parse_method_spec(v);
    } else if (key == "lambda") {
      if (v == "calibrate") {
        s.lambda.reset();
      } else {
        s.lambda = parse_number<double>(key, v);
      }
    } else if (key == "K") {
      s.k = parse_number<Index>(key, v);
    } else if (key == "penalty") {
      s.penalty = parse_number<double>(key, v);
    } else if (key == "intervals") {
      s.wbs_intervals = parse_number<Index>(key, v);
    } else if (key == "pilot") {
      s.pilot = parse_number<Index>(key, v);
    } else if (key == "h") {
      s.h_values = parse_numbers<Index>(key, v);
    } else if (key == "conditioning") {
      s.conditioning = parse_conditioning(v);
    } else if (key == "engine") {
      s.engine = parse_engine(v);
    } else if (key == "N") {
      s.n_values = parse_numbers<Index>(key, v);
    } else if (key == "N_tilde") {
      s.n_tilde = parse_number<Index>(key, v);
    } else if (key == "l") {
      s.length_scale = parse_number<double>(key, v);
    } else if (key == "mode") {
      s.mode = parse_sampler_mode(v);
    } else if (key == "n_w") {
      s.n_w_values = parse_numbers<Index>(key, v);
    } else if (key == "stats") {
      s.stats.clear();
      for (auto item : split_list(v)) s.stats.push_back(parse_stat(item));
    } else if (key == "radius") {
      s.radius = parse_number<Index>(key, v);
    } else if (key == "replicates") {
      s.replicates = parse_number<Index>(key, v);
    } else if (key == "seed") {
      s.seed = parse_number<std::uint64_t>(key, v);
    } else if (key == "workers") {
      s.workers = parse_number<Index>(key, v);
    } else {
      throw ConfigError("scenario field '" + key + "': unknown key");
    }
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file " + path, 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_to_text(const Scenario& s) {
  std::ostringstream o;
  o << "name = " << s.name << '\n';
  o << "kind = " << to_string(s.kind) << '\n';
  o << "T = " << s.T << '\n';
  if (!s.changepoints.empty()) o << "changepoints = " << join(s.changepoints) << '\n';
  if (s.random_changepoints > 0) o << "random_changepoints = " << s.random_changepoints << '\n';
  o << "min_gap = " << s.min_gap << '\n';
  o << "variances = " << join(s.segment_variances) << '\n';
  o << "mu = " << format_double(s.mu) << '\n';
  o << "method = " << method_name(s.method) << '\n';
  if (s.k) {
    o << "K = " << *s.k << '\n';
  } else if (s.penalty) {
    o << "penalty = " << format_double(*s.penalty) << '\n';
  } else {
    o << "lambda = " << (s.lambda ? format_double(*s.lambda) : std::string("calibrate")) << '\n';
  }
  o << "intervals = " << s.wbs_intervals << '\n';
  o << "pilot = " << s.pilot << '\n';
  o << "h = " << join(s.h_values) << '\n';
  o << "conditioning = " << to_string(s.conditioning) << '\n';
  o << "engine = " << to_string(s.engine) << '\n';
  o << "N = " << join(s.n_values) << '\n';
  o << "N_tilde = " << s.n_tilde << '\n';
  o << "l = " << format_double(s.length_scale) << '\n';
  o << "mode = " << to_string(s.mode) << '\n';
  o << "n_w = " << join(s.n_w_values) << '\n';
  std::string stats;
  for (std::size_t i = 0; i < s.stats.size(); ++i) stats += (i ? "," : "") + std::string(stat_short(s.stats[i]));
  o << "stats = " << stats << '\n';
  o << "radius = " << s.radius << '\n';
  o << "replicates = " << s.replicates << '\n';
  o << "seed = " << s.seed << '\n';
  o << "workers = " << s.workers << '\n';
  return o.str();
}

Scenario builtin_scenario(std::string_view name) {
  Scenario s;
  s.name = std::string(name);
  if (name == "fig4a") {
    s.T = 200;
    s.h_values = {10, 20, 50};
    s.replicates = 500;
  } else if (name == "table1") {
    s.kind = ScenarioKind::accuracy;
    s.T = 400;
    s.changepoints = {100, 200, 300};
    s.segment_variances = {1.0, 4.0, 0.25, 1.0};
    s.k = 3;
    s.stats = {StatKind::cusum_squares, StatKind::likelihood_ratio};
    s.replicates = 200;
  } else if (name == "fig8") {
    s.method = {Algorithm::binseg, StatKind::likelihood_ratio};
    s.h_values = {20};
    s.engine = InferenceEngine::mc;
    s.n_values = {50, 100};
    s.replicates = 300;
  } else if (name == "fig10") {
    s.h_values = {20};
    s.engine = InferenceEngine::exact;
    s.n_w_values = {1, 5, 20};
    s.replicates = 300;
  } else {
    throw ConfigError("unknown built-in scenario: " + std::string(name));
  }
  validate(s);
  return s;
}

std::vector<std::string> builtin_scenario_names() { return {"fig4a", "table1", "fig8", "fig10"}; }

std::vector<Index> replicate_changepoints(const Scenario& s, Index replicate) {
  if (s.random_changepoints == 0) return s.changepoints;
  Rng rng(derive_seed(derive_seed(s.seed, replicate), 7));
  const Index lo = std::max<Index>(s.min_gap, 1);
  const Index hi = s.T - lo;
  std::uniform_int_distribution<Index> pick(lo, hi);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<Index> cps(s.random_changepoints);
    for (auto& c : cps) c = pick(rng);
    std::sort(cps.begin(), cps.end());
    bool ok = true;
    for (std::size_t i = 1; i < cps.size() && ok; ++i) ok = cps[i] - cps[i - 1] >= std::max<Index>(s.min_gap, 1);
    if (ok) return cps;
  }
  throw ConfigError("scenario field 'random_changepoints': could not place changes");
}

TimeSeries generate(const Scenario& s, Index replicate) {
  const auto cps = replicate_changepoints(s, replicate);
  Rng rng(derive_seed(s.seed, replicate));
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(s.T);
  std::size_t seg = 0;
  for (Index t = 0; t < s.T; ++t) {
    while (seg < cps.size() && t >= cps[seg]) ++seg;
    x[t] = s.mu + std::sqrt(s.segment_variances[seg]) * z(rng);
  }
  return TimeSeries(std::move(x), s.mu);
}

DetectorConfig scenario_detector(const Scenario& s, Index replicate, std::optional<double> lambda) {
  DetectorConfig c;
  c.algorithm = s.method.algorithm;
  c.stat = s.method.stat;
  if (s.k) {
    c.stop = FixedCount{*s.k};
  } else if (s.penalty) {
    c.stop = Penalty{*s.penalty};
  } else {
    const auto l = s.lambda ? s.lambda : lambda;
    if (!l) throw ConfigError("scenario field 'lambda': threshold not calibrated");
    c.stop = Threshold{*l};
  }
  if (c.algorithm == Algorithm::wbs) {
    c.n_intervals = s.wbs_intervals;
    c.seed = derive_seed(derive_seed(s.seed, replicate), 1);
  }
  return c;
}

double calibrate_lambda(const Scenario& s) {
  Scenario null = s;
  null.changepoints.clear();
  null.random_changepoints = 0;
  null.segment_variances = {s.segment_variances.front()};
  null.seed = s.seed ^ kPilotSalt;
  null.lambda = 0.0;
  null.k.reset();
  null.penalty.reset();
  std::vector<double> maxima(s.pilot);
  parallel_for(s.pilot, s.workers, [&](std::size_t i) {
    const auto series = generate(null, i);
    auto config = scenario_detector(null, i, 0.0);
    if (config.algorithm == Algorithm::wbs) config.intervals = draw_intervals(null.T, config.n_intervals, config.seed);
    const SquareSums sums(series.centered_squares());
    double best = 0.0;
    for (const auto& iv : candidate_intervals(config, {0, null.T})) {
      const auto scan = scan_interval(sums, config.stat, iv);
      if (scan.valid) best = std::max(best, scan.score);
    }
    maxima[i] = best;
  });
  const auto mid = maxima.begin() + static_cast<std::ptrdiff_t>(maxima.size() / 2);
  std::nth_element(maxima.begin(), mid, maxima.end());
  if (maxima.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(maxima.begin(), mid);
  return 0.5 * (lower + upper);
}

namespace {

struct Variant {
  Index h;
  Index n;
  Index n_w;
  InferenceEngine engine;
};

struct VariantOutcome {
  std::vector<double> conditional;
  std::vector<double> naive;
  Index skipped = 0;
  Index failures = 0;
};

double infer_one(const Scenario& s, const Variant& v, const PhiPath& path, const DetectionResult& run,
                 std::uint64_t seed) {
  SamplerConfig sampler;
  sampler.n = v.n;
  sampler.n_tilde = s.n_tilde;
  sampler.length_scale = s.length_scale;
  sampler.mode = s.mode;
  sampler.seed = seed;
  switch (v.engine) {
    case InferenceEngine::automatic:
    case InferenceEngine::exact: return exact_p_value(path, run, s.conditioning).p_value;
    case InferenceEngine::mc: return mc_p_value(path, run, s.conditioning, sampler).p_value;
    case InferenceEngine::power_exact:
    case InferenceEngine::power_mc: {
      PowerConfig pc;
      pc.engine = v.engine == InferenceEngine::power_exact ? PowerEngine::exact : PowerEngine::mc;
      pc.sampler = sampler;
      const auto samples = sample_w(path, v.n_w, derive_seed(seed, 0x77));
      return power_p_value(path, run, s.conditioning, samples, pc).p_value;
    }
  }
  return 1.0;
}

}  // namespace

QqResult run_qq(const Scenario& s) {
  validate(s);
  QqResult result;
  result.scenario = s;
  const bool threshold = !s.k && !s.penalty;
  if (threshold) result.lambda = s.lambda ? *s.lambda : calibrate_lambda(s);

  std::vector<Variant> variants;
  for (Index h : s.h_values) {
    for (Index nw : s.n_w_values) {
      const auto engine = resolve_engine(s, nw);
      if (uses_n(engine)) {
        for (Index n : s.n_values) variants.push_back({h, n, nw, engine});
      } else {
        variants.push_back({h, 0, nw, engine});
      }
    }
  }

  std::vector<std::vector<VariantOutcome>> per_rep(s.replicates);
  std::vector<Index> detections(s.replicates, 0);
  parallel_for(s.replicates, s.workers, [&](std::size_t rep) {
    auto& out = per_rep[rep];
    out.resize(variants.size());
    const auto series = generate(s, rep);
    const auto run = run_detector(series, scenario_detector(s, rep, result.lambda));
    detections[rep] = run.changepoints.size();
    const std::uint64_t rep_seed = derive_seed(s.seed, rep);
    for (std::size_t c = 0; c < run.changepoints.size(); ++c) {
      const Index cp = run.changepoints[c];
      for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        const auto& v = variants[vi];
        const Window w{cp, v.h};
        if (!w.fits(s.T)) {
          ++out[vi].skipped;
          continue;
        }
        try {
          const PhiPath path(series, w);
          const double naive = unconditional_p_value(two_sided_bounds(path.phi_obs(), v.h), v.h);
          const double p = infer_one(s, v, path, run, derive_seed(rep_seed, 100 + c));
          out[vi].conditional.push_back(p);
          out[vi].naive.push_back(naive);
        } catch (const Error&) {
          ++out[vi].failures;
        }
      }
    }
  });

  for (Index rep = 0; rep < s.replicates; ++rep) {
    result.detections += detections[rep];
    if (detections[rep] > 0) ++result.replicates_with_detection;
  }
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    const auto& v = variants[vi];
    QqSeries q;
    q.h = v.h;
    q.n = v.n;
    q.n_w = v.n_w;
    q.label = "h=" + std::to_string(v.h);
    if (v.n > 0) q.label += ",N=" + std::to_string(v.n);
    if (s.n_w_values.size() > 1 || v.n_w > 1) q.label += ",n_w=" + std::to_string(v.n_w);
    for (const auto& rep : per_rep) {
      const auto& o = rep[vi];
      q.conditional.insert(q.conditional.end(), o.conditional.begin(), o.conditional.end());
      q.naive.insert(q.naive.end(), o.naive.begin(), o.naive.end());
      q.skipped_boundary += o.skipped;
      q.failures += o.failures;
    }
    std::sort(q.conditional.begin(), q.conditional.end());
    std::sort(q.naive.begin(), q.naive.end());
    q.ks_stat = ks_statistic(q.conditional);
    q.ks_p = ks_pvalue(q.ks_stat, q.conditional.size());
    q.naive_ks_stat = ks_statistic(q.naive);
    q.naive_ks_p = ks_pvalue(q.naive_ks_stat, q.naive.size());
    result.series.push_back(std::move(q));
  }
  return result;
}

AccuracyResult run_detection_accuracy(const Scenario& s) {
  validate(s);
  AccuracyResult r;
  r.scenario = s;
  r.truths = s.changepoints;
  std::vector<std::vector<std::vector<char>>> hit(s.replicates);
  parallel_for(s.replicates, s.workers, [&](std::size_t rep) {
    const auto series = generate(s, rep);
    hit[rep].assign(s.stats.size(), std::vector<char>(r.truths.size(), 0));
    for (std::size_t i = 0; i < s.stats.size(); ++i) {
      Scenario si = s;
      si.method.stat = s.stats[i];
      const auto run = run_detector(series, scenario_detector(si, rep, s.lambda));
      for (std::size_t j = 0; j < r.truths.size(); ++j) {
        const auto truth = static_cast<long long>(r.truths[j]);
        for (Index cp : run.changepoints) {
          if (std::llabs(static_cast<long long>(cp) - truth) <= static_cast<long long>(s.radius)) {
            hit[rep][i][j] = 1;
            break;
          }
        }
      }
    }
  });
  r.hits.assign(s.stats.size(), std::vector<double>(r.truths.size(), 0.0));
  for (const auto& rep : hit) {
    for (std::size_t i = 0; i < rep.size(); ++i) {
      for (std::size_t j = 0; j < rep[i].size(); ++j) r.hits[i][j] += rep[i][j];
    }
  }
  for (auto& row : r.hits) {
    for (auto& x : row) x /= static_cast<double>(s.replicates);
  }
  return r;
}

std::vector<bool> holm_bonferroni(std::span<const double> p_values, double alpha) {
  const auto adj = holm_adjusted(p_values);
  std::vector<bool> out(adj.size());
  for (std::size_t i = 0; i < adj.size(); ++i) out[i] = adj[i] <= alpha;
  return out;
}

std::vector<double> holm_adjusted(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::vector<double> out(m);
  double running = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const double scaled = std::min(1.0, static_cast<double>(m - r) * p_values[order[r]]);
    running = std::max(running, scaled);
    out[order[r]] = running;
  }
  return out;
}

double ks_statistic(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = std::clamp(values[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  if (n == 0) return 1.0;
  const double rn = std::sqrt(static_cast<double>(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * d;
  if (lambda < 0.27) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_qq_csv(std::ostream& out, const QqResult& r) {
  out << "series,h,N,n_w,kind,rank,p_value,uniform_quantile\n";
  for (const auto& q : r.series) {
    const auto emit = [&](std::string_view kind, const std::vector<double>& ps) {
      const double n = static_cast<double>(ps.size());
      for (std::size_t i = 0; i < ps.size(); ++i) {
        out << '"' << q.label << "\"," << q.h << ',' << q.n << ',' << q.n_w << ',' << kind << ',' << i + 1 << ','
            << format_double(ps[i]) << ',' << format_double(static_cast<double>(i + 1) / (n + 1.0)) << '\n';
      }
    };
    emit("conditional", q.conditional);
    emit("naive", q.naive);
  }
}

void write_accuracy_csv(std::ostream& out, const AccuracyResult& r) {
  out << "statistic,truth,radius,hit_rate\n";
  for (std::size_t i = 0; i < r.hits.size(); ++i) {
    for (std::size_t j = 0; j < r.truths.size(); ++j) {
      out << stat_short(r.scenario.stats[i]) << ',' << r.truths[j] << ',' << r.scenario.radius << ','
          << format_double(r.hits[i][j]) << '\n';
    }
  }
}

}  // namespace varsig
