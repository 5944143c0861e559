#include "mvreg/evaluation.hpp"

#include <cmath>

#include "json_util.hpp"
#include "mvreg/errors.hpp"

namespace mvreg {

Vec2 project_landmark(const DetectorGeometry& geom, const Pose& pose,
                      const Vec3& point) {
  geom.validate();
  if (!point.allFinite()) {
    throw ArgumentError("project_landmark: point must be finite");
  }
  // Pose maps camera -> world, so points go through the inverse.
  const Vec3 cam = pose.rotation.transpose() * (point - pose.translation);
  const double depth = cam.z();
  if (depth <= 1e-6) {
    throw NumericError("project_landmark: point at or behind the camera plane");
  }
  const double scale = geom.source_to_detector / (depth * geom.pixel_spacing);
  return Vec2(geom.principal_point.x() + cam.x() * scale,
              geom.principal_point.y() + cam.y() * scale);
}

namespace {

/// 3x4 intrinsic matrix in pixels for the literal homogeneous form.
Eigen::Matrix<double, 3, 4> intrinsic_3x4(const DetectorGeometry& geom) {
  Eigen::Matrix<double, 3, 4> k = Eigen::Matrix<double, 3, 4>::Zero();
  const double f_px = geom.source_to_detector / geom.pixel_spacing;
  k(0, 0) = f_px;
  k(1, 1) = f_px;
  k(0, 2) = geom.principal_point.x();
  k(1, 2) = geom.principal_point.y();
  k(2, 2) = 1.0;
  return k;
}

}  // namespace

double mtre(const DetectorGeometry& geom, const std::array<Pose, 2>& true_poses,
            const std::array<Pose, 2>& est_poses, const LandmarkSet& landmarks,
            double lambda_mm_per_px, MtreForm form) {
  landmarks.validate();
  if (!(lambda_mm_per_px > 0.0) || !std::isfinite(lambda_mm_per_px)) {
    throw ArgumentError("mtre: lambda must be positive");
  }
  const auto n = static_cast<double>(landmarks.size());

  if (form == MtreForm::homogeneous_literal) {
    const auto k = intrinsic_3x4(geom);
    double sum = 0.0;
    for (int i = 0; i < 2; ++i) {
      const Mat4 diff = true_poses[i].matrix() - est_poses[i].matrix();
      for (const auto& p : landmarks.points) {
        const Eigen::Vector4d hom(p.x(), p.y(), p.z(), 1.0);
        sum += (k * (diff * hom)).norm();
      }
    }
    return lambda_mm_per_px * sum / n;
  }

  double sum = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (std::size_t m = 0; m < landmarks.size(); ++m) {
      try {
        const Vec2 truth = project_landmark(geom, true_poses[i], landmarks.points[m]);
        const Vec2 est = project_landmark(geom, est_poses[i], landmarks.points[m]);
        sum += (truth - est).norm();
      } catch (const NumericError& e) {
        throw NumericError("mtre: landmark \"" + landmarks.names[m] +
                           "\" view " + std::to_string(i + 1) + ": " + e.what());
      }
    }
  }
  return lambda_mm_per_px * sum / (2.0 * n);
}

double smrsr(std::span<const double> mtres_mm) {
  if (mtres_mm.empty()) {
    throw ArgumentError("smrsr: empty mtre list");
  }
  std::size_t below = 0;
  for (const double m : mtres_mm) {
    if (m < 1.0) ++below;
  }
  return 100.0 * static_cast<double>(below) /
         static_cast<double>(mtres_mm.size());
}

MetricReport make_metric_report(std::span<const double> mtres_mm,
                                double lambda) {
  MetricReport report;
  report.case_mtre_mm.assign(mtres_mm.begin(), mtres_mm.end());
  report.n_cases = static_cast<int>(mtres_mm.size());
  report.lambda = lambda;
  if (mtres_mm.empty()) {
    return report;
  }
  double sum = 0.0;
  for (const double m : mtres_mm) sum += m;
  report.mean_mtre = sum / report.n_cases;
  double sq = 0.0;
  for (const double m : mtres_mm) {
    const double d = m - report.mean_mtre;
    sq += d * d;
  }
  report.stddev_mtre = std::sqrt(sq / report.n_cases);
  report.smrsr_percent = smrsr(mtres_mm);
  return report;
}

namespace detail {

ordered_json metric_report_to_json(const MetricReport& report) {
  ordered_json j;
  j["cases"] = ordered_json::array();
  for (std::size_t i = 0; i < report.case_mtre_mm.size(); ++i) {
    ordered_json jc;
    jc["id"] = i;
    jc["mtre_mm"] = report.case_mtre_mm[i];
    j["cases"].push_back(std::move(jc));
  }
  j["mean_mtre"] = report.mean_mtre;
  j["stddev_mtre"] = report.stddev_mtre;
  j["smrsr_percent"] = report.smrsr_percent;
  j["n_cases"] = report.n_cases;
  j["lambda"] = report.lambda;
  return j;
}

}  // namespace detail

void save_metric_report(const std::filesystem::path& path,
                        const MetricReport& report) {
  detail::write_text_file(path,
                          detail::metric_report_to_json(report).dump(2) + "\n");
}

}  // namespace mvreg
