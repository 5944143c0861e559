#ifndef MVREG_EVALUATION_HPP
#define MVREG_EVALUATION_HPP

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "mvreg/projector.hpp"
#include "mvreg/se3.hpp"
#include "mvreg/volume.hpp"

namespace mvreg {

/// Perspective projection of a world point onto the detector, in pixel
/// coordinates: transform into the camera frame, divide by depth, scale by
/// focal length over pixel spacing. Throws NumericError for points at or
/// behind the camera plane (depth <= 1e-6 mm).
Vec2 project_landmark(const DetectorGeometry& geom, const Pose& pose,
                      const Vec3& point);

enum class MtreForm {
  projected,            // distance between perspective-projected points
  homogeneous_literal,  // norm of K (T - That) [L; 1], published form
};

/// Mean target registration error in mm: lambda times the mean pixel
/// distance between landmark projections under the true and estimated poses,
/// averaged over both views and all landmarks (2N terms). The literal form
/// instead averages the homogeneous-difference norms over N with the single
/// 1/N factor, as printed.
double mtre(const DetectorGeometry& geom, const std::array<Pose, 2>& true_poses,
            const std::array<Pose, 2>& est_poses, const LandmarkSet& landmarks,
            double lambda_mm_per_px, MtreForm form = MtreForm::projected);

/// Sub-millimeter registration success rate: percent of cases with
/// mtre strictly below 1 mm. Throws ArgumentError on an empty list.
double smrsr(std::span<const double> mtres_mm);

/// Aggregate metrics over a batch of cases.
struct MetricReport {
  std::vector<double> case_mtre_mm;
  double mean_mtre = 0.0;
  double stddev_mtre = 0.0;  // population form
  double smrsr_percent = 0.0;
  int n_cases = 0;
  double lambda = 0.0;
};

MetricReport make_metric_report(std::span<const double> mtres_mm, double lambda);

/// {"cases":[{"id","mtre_mm"}], "mean_mtre", "stddev_mtre", "smrsr_percent",
///  "n_cases", "lambda"}
void save_metric_report(const std::filesystem::path& path,
                        const MetricReport& report);

}  // namespace mvreg

#endif  // MVREG_EVALUATION_HPP
