#ifndef VARSIG_TOOLS_REPORT_JSON_HPP
#define VARSIG_TOOLS_REPORT_JSON_HPP

#include <json.hpp>

#include "varsig/detect.hpp"
#include "varsig/harness.hpp"
#include "varsig/types.hpp"

namespace varsig::cli {

using nlohmann::ordered_json;

ordered_json stop_json(const StopRule& stop);
ordered_json detection_json(const DetectionResult& r);
ordered_json report_json(const PValueReport& r);
ordered_json scenario_json(const Scenario& s);
ordered_json qq_summary_json(const QqResult& r);
ordered_json accuracy_json(const AccuracyResult& r);

}  // namespace varsig::cli

#endif
