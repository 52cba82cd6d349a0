#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>

#include "input.hpp"
#include "report_json.hpp"
#include "varsig/detect.hpp"
#include "varsig/errors.hpp"
#include "varsig/exact.hpp"
#include "varsig/harness.hpp"
#include "varsig/mc.hpp"
#include "varsig/perturb.hpp"
#include "varsig/power.hpp"

namespace varsig::cli {

namespace {

struct Options {
  std::string input;
  std::optional<std::string> column;
  std::optional<double> mu;
  bool center = false;
  std::string method = "cusum-binseg";
  std::optional<double> lambda;
  std::optional<Index> k;
  std::optional<double> penalty;
  Index intervals = 100;
  std::uint64_t seed = 0;
  std::string output;

  Index h = 20;
  std::string conditioning = "tau-in-model";
  std::string engine = "auto";
  Index n = 100;
  double length_scale = 100.0;
  std::string mode = "gp";
  Index n_tilde = 100;
  Index n_w = 1;
  double alpha = 0.05;
  Index workers = 1;

  std::string scenario;
  std::string out_dir = ".";
  std::optional<std::uint64_t> sim_seed;
  std::optional<Index> replicates;
};

Index default_workers() {
  if (const char* env = std::getenv("VARSIG_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<Index>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void add_series_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--input", o.input, "Series file: one value per line, or CSV with --column")->required();
  cmd.add_option("--column", o.column, "CSV column (header name or 1-based position)");
  auto* mu = cmd.add_option("--mu", o.mu, "Known mean (default 0)");
  cmd.add_flag("--center", o.center, "Use the sample mean as mu")->excludes(mu);
  cmd.add_option("--method", o.method, "cusum-binseg, cusum-wbs, lr-binseg, lr-wbs or lr-pelt");
  cmd.add_option("--lambda", o.lambda, "Threshold stop rule");
  cmd.add_option("--K", o.k, "Fixed number of changepoints");
  cmd.add_option("--penalty", o.penalty, "PELT penalty");
  cmd.add_option("--intervals", o.intervals, "Number of WBS intervals");
  cmd.add_option("--seed", o.seed, "Seed for WBS intervals and samplers");
  cmd.add_option("--output", o.output, "Write JSON here instead of stdout");
}

TimeSeries load_series(const Options& o) {
  auto values = read_series_file(o.input, o.column);
  if (values.size() < 2) throw InputError("input has fewer than two values", 0);
  double mu = o.mu.value_or(0.0);
  if (o.center) mu = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return TimeSeries(std::move(values), mu);
}

DetectorConfig detector_config(const Options& o) {
  const auto spec = parse_method_spec(o.method);
  const int stops = int(o.lambda.has_value()) + int(o.k.has_value()) + int(o.penalty.has_value());
  if (stops != 1) throw ConfigError("give exactly one of --lambda, --K, --penalty");
  DetectorConfig c;
  c.algorithm = spec.algorithm;
  c.stat = spec.stat;
  if (spec.algorithm == Algorithm::pelt) {
    if (!o.penalty) throw ConfigError("lr-pelt needs --penalty");
    c.stop = Penalty{*o.penalty};
  } else if (o.penalty) {
    throw ConfigError("--penalty applies to lr-pelt only");
  } else if (o.k) {
    c.stop = FixedCount{*o.k};
  } else {
    c.stop = Threshold{*o.lambda};
  }
  if (c.algorithm == Algorithm::wbs) {
    if (o.intervals == 0) throw ConfigError("--intervals must be positive");
    c.n_intervals = o.intervals;
    c.seed = o.seed;
  }
  return c;
}

void emit(const Options& o, const ordered_json& j, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (o.output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.output, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + o.output);
  f << text;
}

ordered_json series_header(const char* command, const TimeSeries& s) {
  ordered_json j;
  j["schema"] = 1;
  j["command"] = command;
  j["n"] = s.size();
  j["mu"] = s.mu();
  return j;
}

int cmd_detect(const Options& o, std::ostream& out) {
  const auto series = load_series(o);
  const auto config = detector_config(o);
  const auto run = run_detector(series, config);
  auto j = series_header("detect", series);
  j["detection"] = detection_json(run);
  emit(o, j, out);
  return kOk;
}

int cmd_test(const Options& o, std::ostream& out) {
  const auto series = load_series(o);
  const auto config = detector_config(o);
  const auto conditioning = parse_conditioning(o.conditioning);
  const bool exact_ok = config.stat == StatKind::cusum_squares && config.algorithm != Algorithm::pelt;
  std::string engine = o.engine;
  if (engine == "auto") engine = exact_ok ? "exact" : "mc";
  if (engine != "exact" && engine != "mc") throw ConfigError("--engine must be auto, exact or mc");
  if (engine == "exact" && !exact_ok) throw ConfigError("the exact engine needs cusum-binseg or cusum-wbs");
  if (o.h < 1) throw ConfigError("--h must be positive");
  if (o.n_w < 1) throw ConfigError("--n-w must be at least 1");
  if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");

  SamplerConfig sampler;
  sampler.n = o.n;
  sampler.n_tilde = o.n_tilde;
  sampler.length_scale = o.length_scale;
  sampler.mode = parse_sampler_mode(o.mode);
  sampler.seed = o.seed;
  sampler.workers = o.workers;
  if (sampler.n < 1) throw ConfigError("--N must be at least 1");
  if (!(sampler.length_scale > 0.0)) throw ConfigError("--l must be positive");

  const auto run = run_detector(series, config);
  std::vector<ordered_json> entries;
  std::vector<double> pvals;
  std::vector<std::size_t> tested;
  for (const Index cp : run.changepoints) {
    const Window w{cp, o.h};
    if (!w.fits(series.size())) {
      ordered_json e;
      e["tau_hat"] = cp;
      e["skipped"] = "window [" + std::to_string(static_cast<long long>(cp) - static_cast<long long>(o.h)) + ", " +
                     std::to_string(cp + o.h) + ") exceeds the series [0, " + std::to_string(series.size()) + ")";
      entries.push_back(std::move(e));
      continue;
    }
    std::optional<PhiPath> path;
    try {
      path.emplace(series, w);
    } catch (const DegenerateInput& ex) {
      ordered_json e;
      e["tau_hat"] = cp;
      e["skipped"] = ex.what();
      entries.push_back(std::move(e));
      continue;
    }
    PValueReport rep;
    if (o.n_w > 1) {
      PowerConfig pc;
      pc.engine = engine == "exact" ? PowerEngine::exact : PowerEngine::mc;
      pc.sampler = sampler;
      rep = power_p_value(*path, run, conditioning, sample_w(*path, o.n_w, o.seed), pc);
    } else if (engine == "exact") {
      rep = exact_p_value(*path, run, conditioning);
    } else {
      rep = mc_p_value(*path, run, conditioning, sampler);
    }
    tested.push_back(entries.size());
    pvals.push_back(rep.p_value);
    entries.push_back(report_json(rep));
  }
  const auto adjusted = holm_adjusted(pvals);
  for (std::size_t i = 0; i < tested.size(); ++i) {
    entries[tested[i]]["holm_adjusted"] = adjusted[i];
    entries[tested[i]]["significant"] = adjusted[i] <= o.alpha;
  }

  auto j = series_header("test", series);
  j["h"] = o.h;
  j["alpha"] = o.alpha;
  j["engine"] = engine;
  if (engine == "mc") {
    j["sampler"] = {{"N", sampler.n},
                    {"l", sampler.length_scale},
                    {"mode", std::string(to_string(sampler.mode))},
                    {"N_tilde", sampler.n_tilde}};
  }
  j["n_w"] = o.n_w;
  j["detection"] = detection_json(run);
  j["changepoints"] = entries;
  emit(o, j, out);
  return kOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  namespace fs = std::filesystem;
  Scenario s;
  if (fs::is_regular_file(o.scenario)) {
    s = load_scenario(o.scenario);
  } else {
    const auto names = builtin_scenario_names();
    if (std::find(names.begin(), names.end(), o.scenario) == names.end()) {
      throw ConfigError("scenario '" + o.scenario + "' is neither a file nor a built-in scenario");
    }
    s = builtin_scenario(o.scenario);
  }
  if (o.sim_seed) s.seed = *o.sim_seed;
  if (o.replicates) s.replicates = *o.replicates;
  s.workers = o.workers;
  validate(s);

  fs::create_directories(o.out_dir);
  ordered_json j;
  j["schema"] = 1;
  j["command"] = "simulate";
  j["scenario"] = scenario_json(s);
  auto outputs = ordered_json::array();
  const auto write = [&](const std::string& file, const auto& writer) {
    const fs::path p = fs::path(o.out_dir) / file;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + p.string());
    writer(f);
    outputs.push_back(file);
  };
  if (s.kind == ScenarioKind::qq) {
    const auto r = run_qq(s);
    write(s.name + "_qq.csv", [&](std::ostream& f) { write_qq_csv(f, r); });
    j["summary"] = qq_summary_json(r);
  } else {
    const auto r = run_detection_accuracy(s);
    write(s.name + "_accuracy.csv", [&](std::ostream& f) { write_accuracy_csv(f, r); });
    j["summary"] = accuracy_json(r);
  }
  outputs.push_back(s.name + "_manifest.json");
  j["outputs"] = outputs;
  const std::string text = j.dump(2) + "\n";
  {
    std::ofstream f(fs::path(o.out_dir) / (s.name + "_manifest.json"), std::ios::binary);
    if (!f) throw ConfigError("cannot write manifest");
    f << text;
  }
  out << text;
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variance changepoint detection with post-selection p-values", "varsig"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  Options o;
  o.workers = default_workers();

  auto* detect = app.add_subcommand("detect", "Detect variance changepoints");
  add_series_options(*detect, o);

  auto* test = app.add_subcommand("test", "Detect changepoints and test each one");
  add_series_options(*test, o);
  test->add_option("--h", o.h, "Window half-width");
  test->add_option("--conditioning", o.conditioning, "tau-in-model or full-model");
  test->add_option("--engine", o.engine, "auto, exact or mc");
  test->add_option("--N", o.n, "GP design size");
  test->add_option("--l", o.length_scale, "GP length-scale");
  test->add_option("--mode", o.mode, "gp, gp-is, naive or naive-stratified");
  test->add_option("--N-tilde", o.n_tilde, "Importance samples for gp-is");
  test->add_option("--n-w", o.n_w, "W samples (1 = standard conditioning)");
  test->add_option("--alpha", o.alpha, "Holm-Bonferroni level");
  test->add_option("--workers", o.workers, "Worker threads (default $VARSIG_WORKERS or 1)");

  auto* simulate = app.add_subcommand("simulate", "Run a simulation scenario");
  simulate->add_option("--scenario", o.scenario, "Scenario file or built-in name (fig4a, table1, fig8, fig10)")
      ->required();
  simulate->add_option("--out-dir", o.out_dir, "Directory for CSV and manifest output");
  simulate->add_option("--seed", o.sim_seed, "Override the scenario seed");
  simulate->add_option("--replicates", o.replicates, "Override the replicate count");
  simulate->add_option("--workers", o.workers, "Worker threads (default $VARSIG_WORKERS or 1)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  if (o.workers < 1) {
    err << "error: --workers must be at least 1\n";
    return kConfigError;
  }
  try {
    if (detect->parsed()) return cmd_detect(o, out);
    if (test->parsed()) return cmd_test(o, out);
    return cmd_simulate(o, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DegenerateInput& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace varsig::cli
