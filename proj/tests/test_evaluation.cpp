#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "mvreg/errors.hpp"
#include "mvreg/evaluation.hpp"
#include "mvreg/pipeline.hpp"
#include "test_util.hpp"

using namespace mvreg;

namespace {

LandmarkSet some_landmarks() {
  LandmarkSet marks;
  marks.add("a", Vec3(5, -3, 170));
  marks.add("b", Vec3(-8, 4, 150));
  marks.add("c", Vec3(0, 0, 190));
  marks.add("d", Vec3(12, 9, 160));
  return marks;
}

}  // namespace

TEST_CASE("project_landmark: axis point lands on the principal point") {
  const DetectorGeometry geom(400.0, 128, 128, 1.4, Vec2(63.5, 63.5));
  const Vec2 px = project_landmark(geom, Pose::identity(), Vec3(0, 0, 250));
  CHECK(px.x() == 63.5);
  CHECK(px.y() == 63.5);
}

TEST_CASE("project_landmark: lateral offset scales linearly at fixed depth") {
  const DetectorGeometry geom(400.0, 128, 128, 1.4, Vec2(63.5, 63.5));
  const Vec2 one = project_landmark(geom, Pose::identity(), Vec3(3, 0, 200));
  const Vec2 two = project_landmark(geom, Pose::identity(), Vec3(6, 0, 200));
  CHECK((two.x() - 63.5) == doctest::Approx(2.0 * (one.x() - 63.5)).epsilon(1e-12));
}

TEST_CASE("project_landmark: magnification is 1 at the detector plane") {
  const double d = 7.0;
  const DetectorGeometry geom(400.0, 128, 128, 1.4, Vec2(63.5, 63.5));
  const Vec2 px = project_landmark(geom, Pose::identity(), Vec3(d, 0, 400.0));
  CHECK(px.x() - 63.5 == doctest::Approx(d / geom.pixel_spacing).epsilon(1e-12));
}

TEST_CASE("project_landmark rejects points at or behind the camera") {
  const DetectorGeometry geom(400.0, 128, 128, 1.4);
  CHECK_THROWS_AS(project_landmark(geom, Pose::identity(), Vec3(0, 0, 0)),
                  NumericError);
  CHECK_THROWS_AS(project_landmark(geom, Pose::identity(), Vec3(0, 0, -10)),
                  NumericError);
}

TEST_CASE("projection is consistent with the rendering rays") {
  // The ray through the projected pixel must pass through the landmark.
  const DetectorGeometry geom(300.0, 64, 64, 2.0);
  std::mt19937_64 gen(51);
  const Pose pose = compose(exp(Twist((Vec6() << 3, -2, 1, 0.1, -0.05, 0.2).finished())),
                            make_pa_pose(Vec3::Zero(), 150.0));
  const Vec3 point(7.0, -4.0, 12.0);
  const Vec2 px = project_landmark(geom, pose, point);
  const int u = static_cast<int>(std::lround(px.x()));
  const int v = static_cast<int>(std::lround(px.y()));
  const Ray ray = pixel_ray(geom, pose, u, v);
  // Distance from the point to the ray line stays within one pixel footprint
  // at the landmark depth.
  const Vec3 d = (ray.target - ray.source).normalized();
  const Vec3 to_point = point - ray.source;
  const double off_axis = (to_point - to_point.dot(d) * d).norm();
  CHECK(off_axis < geom.pixel_spacing);
}

TEST_CASE("mtre is zero when estimates equal the truth") {
  const DetectorGeometry geom(400.0, 128, 128, 1.4);
  const LandmarkSet marks = some_landmarks();
  const std::array<Pose, 2> truth = {Pose::identity(),
                                     Pose(Mat3::Identity(), Vec3(5, 0, 0))};
  CHECK(mtre(geom, truth, truth, marks, 0.194) == 0.0);
}

TEST_CASE("mtre hand case: 10 px in both views at lambda 0.194 is 1.94 mm") {
  const DetectorGeometry geom(400.0, 256, 256, 1.4, Vec2(127.5, 127.5));
  LandmarkSet marks;
  marks.add("only", Vec3(0, 0, 400.0));  // depth = source_to_detector
  const std::array<Pose, 2> truth = {Pose::identity(), Pose::identity()};
  // A lateral camera shift of 10 px * pixel_spacing at magnification 1
  // displaces the projection by exactly 10 px in each view.
  const Vec3 shift(10.0 * geom.pixel_spacing, 0, 0);
  const std::array<Pose, 2> est = {Pose(Mat3::Identity(), shift),
                                   Pose(Mat3::Identity(), shift)};
  const double got = mtre(geom, truth, est, marks, 0.194);
  CHECK(std::abs(got - 1.94) < 1e-12);
}

TEST_CASE("mtre approximates detector-plane displacement for in-plane shifts") {
  const DetectorGeometry geom(400.0, 256, 256, 1.4);
  LandmarkSet marks;
  marks.add("p", Vec3(0, 0, 400.0));
  marks.add("q", Vec3(10, 5, 400.0));
  const std::array<Pose, 2> truth = {Pose::identity(), Pose::identity()};
  const double t_mm = 3.0;
  const std::array<Pose, 2> est = {
      Pose(Mat3::Identity(), Vec3(t_mm, 0, 0)),
      Pose(Mat3::Identity(), Vec3(t_mm, 0, 0))};
  // lambda = pixel spacing makes mtre the physical detector displacement:
  // shifting the camera by t at landmark depth f displaces projections by
  // t / pixel_spacing pixels.
  const double got = mtre(geom, truth, est, marks, geom.pixel_spacing);
  CHECK(got == doctest::Approx(t_mm).epsilon(1e-9));
}

TEST_CASE("mtre is invariant to landmark order") {
  const DetectorGeometry geom(300.0, 64, 64, 2.0);
  LandmarkSet marks = some_landmarks();
  std::mt19937_64 gen(53);
  const Pose base = make_pa_pose(Vec3(0, 0, 170), 150.0);
  // Keep landmarks in front of both cameras.
  const std::array<Pose, 2> truth = {Pose::identity(), base};
  const std::array<Pose, 2> est = {
      Pose(Mat3::Identity(), Vec3(1, -2, 3)),
      compose(exp(Twist((Vec6() << 2, 1, -1, 0.02, 0.01, -0.03).finished())),
              base)};
  const double forward = mtre(geom, truth, est, marks, 0.194);

  LandmarkSet shuffled;
  const std::vector<std::size_t> order = {2, 0, 3, 1};
  for (const auto i : order) shuffled.add(marks.names[i], marks.points[i]);
  const double reordered = mtre(geom, truth, est, shuffled, 0.194);
  CHECK(forward == doctest::Approx(reordered).epsilon(1e-12));
}

TEST_CASE("mtre literal homogeneous form stays available") {
  const DetectorGeometry geom(400.0, 128, 128, 1.4);
  const LandmarkSet marks = some_landmarks();
  const std::array<Pose, 2> truth = {Pose::identity(), Pose::identity()};
  const std::array<Pose, 2> est = {Pose(Mat3::Identity(), Vec3(1, 0, 0)),
                                   Pose(Mat3::Identity(), Vec3(1, 0, 0))};
  const double literal =
      mtre(geom, truth, est, marks, 0.194, MtreForm::homogeneous_literal);
  CHECK(literal > 0.0);
  CHECK(mtre(geom, truth, truth, marks, 0.194,
             MtreForm::homogeneous_literal) == 0.0);
}

TEST_CASE("mtre propagates projection failures with the landmark name") {
  const DetectorGeometry geom(400.0, 128, 128, 1.4);
  LandmarkSet marks;
  marks.add("behind_camera", Vec3(0, 0, -50));
  const std::array<Pose, 2> poses = {Pose::identity(), Pose::identity()};
  CHECK_THROWS_WITH_AS(mtre(geom, poses, poses, marks, 0.194),
                       doctest::Contains("behind_camera"), NumericError);
}

TEST_CASE("smrsr: boundary behavior is strict") {
  CHECK(smrsr(std::vector<double>{0.0, 0.0}) == 100.0);
  CHECK(smrsr(std::vector<double>{0.5, 1.5}) == 50.0);
  CHECK(smrsr(std::vector<double>{1.0}) == 0.0);  // exactly 1 mm fails
  CHECK(smrsr(std::vector<double>{0.9999999}) == 100.0);
  CHECK_THROWS_AS(smrsr(std::vector<double>{}), ArgumentError);
}

TEST_CASE("smrsr never increases when an mtre crosses the threshold") {
  std::vector<double> values = {0.2, 0.8, 0.95, 1.3};
  const double before = smrsr(values);
  values[1] = 1.01;
  CHECK(smrsr(values) < before);
}

TEST_CASE("metric report aggregates recompute from case values") {
  const std::vector<double> mtres = {0.2, 0.8, 1.5, 0.4};
  const MetricReport report = make_metric_report(mtres, 0.194);
  CHECK(report.n_cases == 4);
  CHECK(report.case_mtre_mm == mtres);
  const double mean = (0.2 + 0.8 + 1.5 + 0.4) / 4.0;
  CHECK(report.mean_mtre == doctest::Approx(mean).epsilon(1e-15));
  double sq = 0.0;
  for (const double m : mtres) sq += (m - mean) * (m - mean);
  CHECK(report.stddev_mtre == doctest::Approx(std::sqrt(sq / 4.0)).epsilon(1e-15));
  CHECK(report.smrsr_percent == 75.0);
  CHECK(report.lambda == 0.194);
}

TEST_CASE("metric report JSON serialization") {
  testutil::TempDir dir("metric");
  const MetricReport report = make_metric_report(std::vector<double>{0.5}, 1.4);
  save_metric_report(dir.file("m.json"), report);
  std::ifstream in(dir.file("m.json"));
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("\"smrsr_percent\": 100.0") != std::string::npos);
  CHECK(text.find("\"n_cases\": 1") != std::string::npos);
}
