#ifndef MVREG_SERIALIZE_HPP
#define MVREG_SERIALIZE_HPP

#include <filesystem>
#include <vector>

#include "mvreg/projector.hpp"
#include "mvreg/registration.hpp"
#include "mvreg/se3.hpp"

namespace mvreg {

// JSON file formats:
//   pose      {"matrix": [16 numbers, row-major 4x4]}
//   poses     [pose, ...]
//   twist     [rho_x, rho_y, rho_z, phi_x, phi_y, phi_z]
//   geometry  {"source_to_detector", "detector_width", "detector_height",
//              "pixel_spacing", "principal_point": [2] (optional, defaults
//              to the detector center)}
//   config    RefineConfig field names, all optional
// Malformed content throws DataError.

void save_pose(const std::filesystem::path& path, const Pose& pose);
Pose load_pose(const std::filesystem::path& path);

void save_poses(const std::filesystem::path& path,
                const std::vector<Pose>& poses);
std::vector<Pose> load_poses(const std::filesystem::path& path);

void save_twist(const std::filesystem::path& path, const Twist& twist);
Twist load_twist(const std::filesystem::path& path);

void save_geometry(const std::filesystem::path& path,
                   const DetectorGeometry& geom);
DetectorGeometry load_geometry(const std::filesystem::path& path);

void save_refine_config(const std::filesystem::path& path,
                        const RefineConfig& cfg);
RefineConfig load_refine_config(const std::filesystem::path& path);

/// {"initial": [pose, pose], "refined": [pose, pose], "loss_trace": [...],
///  "ncc_trace": [[...], [...]], "iterations_run", "converged"}
void save_registration_result(const std::filesystem::path& path,
                              const RegistrationResult& result);

}  // namespace mvreg

#endif  // MVREG_SERIALIZE_HPP
