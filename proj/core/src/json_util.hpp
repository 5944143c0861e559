// Private JSON helpers shared by the core sources; not installed.
#ifndef MVREG_SRC_JSON_UTIL_HPP
#define MVREG_SRC_JSON_UTIL_HPP

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mvreg/evaluation.hpp"
#include "mvreg/projector.hpp"
#include "mvreg/registration.hpp"
#include "mvreg/se3.hpp"

namespace mvreg::detail {

using ordered_json = nlohmann::ordered_json;

nlohmann::json parse_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// {"matrix": [16 numbers, row-major]}
ordered_json pose_to_json(const Pose& pose);

/// Validates rigidity within `tolerance`; optionally projects the rotation
/// block onto SO(3) by polar decomposition before the final check.
Pose pose_from_json(const nlohmann::json& j, double tolerance, bool project);

/// [rho_x, rho_y, rho_z, phi_x, phi_y, phi_z]
ordered_json twist_to_json(const Twist& twist);
Twist twist_from_json(const nlohmann::json& j);

ordered_json geometry_to_json(const DetectorGeometry& geom);
DetectorGeometry geometry_from_json(const nlohmann::json& j);

ordered_json refine_config_to_json(const RefineConfig& cfg);
RefineConfig refine_config_from_json(const nlohmann::json& j);

ordered_json metric_report_to_json(const MetricReport& report);

}  // namespace mvreg::detail

#endif  // MVREG_SRC_JSON_UTIL_HPP
