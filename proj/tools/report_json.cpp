#include "report_json.hpp"

namespace varsig::cli {

namespace {

ordered_json segment_json(const Segment& s) { return ordered_json::array({s.begin, s.end}); }

std::string_view stat_name(StatKind k) { return k == StatKind::cusum_squares ? "cusum" : "lr"; }

}  // namespace

ordered_json stop_json(const StopRule& stop) {
  ordered_json j;
  if (const auto* t = std::get_if<Threshold>(&stop)) {
    j["type"] = "threshold";
    j["lambda"] = t->lambda;
  } else if (const auto* k = std::get_if<FixedCount>(&stop)) {
    j["type"] = "count";
    j["K"] = k->k;
  } else {
    j["type"] = "penalty";
    j["penalty"] = std::get<Penalty>(stop).beta;
  }
  return j;
}

ordered_json detection_json(const DetectionResult& r) {
  ordered_json j;
  j["method"] = method_name({r.algorithm, r.stat});
  j["stop"] = stop_json(r.stop);
  j["seed"] = r.seed;
  j["changepoints"] = r.changepoints;
  auto steps = ordered_json::array();
  for (const auto& s : r.steps) {
    ordered_json o;
    o["segment"] = segment_json(s.segment);
    o["interval"] = segment_json(s.interval);
    o["split"] = s.split;
    o["value"] = s.value;
    o["direction"] = s.direction;
    o["accepted"] = s.accepted;
    steps.push_back(std::move(o));
  }
  j["steps"] = std::move(steps);
  if (r.algorithm == Algorithm::wbs) {
    auto ivs = ordered_json::array();
    for (const auto& iv : r.intervals) ivs.push_back(segment_json(iv));
    j["intervals"] = std::move(ivs);
  }
  return j;
}

ordered_json report_json(const PValueReport& r) {
  ordered_json j;
  j["tau_hat"] = r.tau_hat;
  j["p_value"] = r.p_value;
  j["phi_obs"] = r.phi_obs;
  j["phi_lower"] = r.phi_lower;
  j["phi_upper"] = r.phi_upper;
  j["method"] = to_string(r.method);
  j["conditioning"] = to_string(r.conditioning);
  ordered_json d = ordered_json::object();
  for (const auto& [k, v] : r.diagnostics) d[k] = v;
  j["diagnostics"] = std::move(d);
  return j;
}

ordered_json scenario_json(const Scenario& s) {
  ordered_json j;
  j["name"] = s.name;
  j["kind"] = to_string(s.kind);
  j["T"] = s.T;
  j["changepoints"] = s.changepoints;
  j["random_changepoints"] = s.random_changepoints;
  j["min_gap"] = s.min_gap;
  j["variances"] = s.segment_variances;
  j["mu"] = s.mu;
  j["method"] = method_name(s.method);
  if (s.k) {
    j["K"] = *s.k;
  } else if (s.penalty) {
    j["penalty"] = *s.penalty;
  } else if (s.lambda) {
    j["lambda"] = *s.lambda;
  } else {
    j["lambda"] = "calibrate";
  }
  j["intervals"] = s.wbs_intervals;
  j["pilot"] = s.pilot;
  j["h"] = s.h_values;
  j["conditioning"] = to_string(s.conditioning);
  j["engine"] = to_string(s.engine);
  j["N"] = s.n_values;
  j["N_tilde"] = s.n_tilde;
  j["l"] = s.length_scale;
  j["mode"] = to_string(s.mode);
  j["n_w"] = s.n_w_values;
  auto stats = ordered_json::array();
  for (auto k : s.stats) stats.push_back(stat_name(k));
  j["stats"] = std::move(stats);
  j["radius"] = s.radius;
  j["replicates"] = s.replicates;
  j["seed"] = s.seed;
  return j;
}

ordered_json qq_summary_json(const QqResult& r) {
  ordered_json j;
  if (r.lambda) j["lambda"] = *r.lambda;
  j["replicates_with_detection"] = r.replicates_with_detection;
  j["detections"] = r.detections;
  auto series = ordered_json::array();
  for (const auto& q : r.series) {
    ordered_json o;
    o["label"] = q.label;
    o["h"] = q.h;
    if (q.n > 0) o["N"] = q.n;
    o["n_w"] = q.n_w;
    o["p_values"] = q.conditional.size();
    o["skipped_boundary"] = q.skipped_boundary;
    o["failures"] = q.failures;
    o["ks_statistic"] = q.ks_stat;
    o["ks_p"] = q.ks_p;
    o["naive_ks_statistic"] = q.naive_ks_stat;
    o["naive_ks_p"] = q.naive_ks_p;
    series.push_back(std::move(o));
  }
  j["series"] = std::move(series);
  return j;
}

ordered_json accuracy_json(const AccuracyResult& r) {
  ordered_json j;
  j["truths"] = r.truths;
  j["radius"] = r.scenario.radius;
  ordered_json rows = ordered_json::object();
  for (std::size_t i = 0; i < r.hits.size(); ++i) rows[std::string(stat_name(r.scenario.stats[i]))] = r.hits[i];
  j["hit_rates"] = std::move(rows);
  return j;
}

}  // namespace varsig::cli
