#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mvreg/errors.hpp"
#include "mvreg/se3.hpp"
#include "test_util.hpp"

using namespace mvreg;
using testutil::random_pose;
using testutil::random_twist;

namespace {

Vec6 twist6(double a, double b, double c, double d, double e, double f) {
  Vec6 v;
  v << a, b, c, d, e, f;
  return v;
}

Mat3 rot_z(double theta) {
  Mat3 r;
  r << std::cos(theta), -std::sin(theta), 0, std::sin(theta), std::cos(theta),
      0, 0, 0, 1;
  return r;
}

double max_abs_diff(const Mat4& a, const Mat4& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("exp of the zero twist is the identity") {
  const Pose p = exp(Twist{});
  CHECK(max_abs_diff(p.matrix(), Mat4::Identity()) == 0.0);
}

TEST_CASE("exp of a pure z rotation matches the closed-form rotation") {
  const Pose p = exp(Twist(twist6(0, 0, 0, 0, 0, M_PI / 2)));
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((p.rotation - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(p.translation.norm() == 0.0);
}

TEST_CASE("exp of a pure translation leaves the rotation at identity") {
  const Pose p = exp(Twist(twist6(1, 2, 3, 0, 0, 0)));
  CHECK((p.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((p.translation - Vec3(1, 2, 3)).norm() == 0.0);
}

TEST_CASE("exp rejects non-finite input") {
  Twist t;
  t.rho.x() = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(exp(t), ArgumentError);
}

TEST_CASE("log of the identity is the zero twist") {
  CHECK(log(Pose::identity()).vector().norm() == 0.0);
}

TEST_CASE("log inverts exp on a fixed twist") {
  const Twist v(twist6(0.1, -0.2, 0.3, 0.05, -0.04, 0.03));
  const Twist back = log(exp(v));
  CHECK((back.vector() - v.vector()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("log of a z rotation recovers the angle") {
  const Pose p(rot_z(M_PI / 2), Vec3::Zero());
  const Twist v = log(p);
  CHECK((v.vector() - twist6(0, 0, 0, 0, 0, M_PI / 2)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("log errors at the rotation-angle-pi branch") {
  const Pose p(rot_z(M_PI), Vec3::Zero());
  CHECK_THROWS_AS(log(p), BranchError);
}

TEST_CASE("log rejects a non-orthonormal rotation") {
  Pose p;
  p.rotation(0, 0) = 1.5;
  CHECK_THROWS_AS(log(p), ArgumentError);
}

TEST_CASE("exp/log roundtrip over random twists") {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 10000; ++i) {
    const Twist v = random_twist(gen);
    const Twist back = log(exp(v));
    CHECK((back.vector() - v.vector()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("compose: identity is neutral, inverse cancels, angles add") {
  std::mt19937_64 gen(11);
  const Pose t = random_pose(gen);
  CHECK(max_abs_diff(compose(Pose::identity(), t).matrix(), t.matrix()) == 0.0);
  CHECK(max_abs_diff(compose(t, inverse(t)).matrix(), Mat4::Identity()) < 1e-9);

  const Pose quarter(rot_z(M_PI / 2), Vec3::Zero());
  const Pose half = compose(quarter, quarter);
  CHECK((half.rotation - rot_z(M_PI)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pose group laws hold on random poses") {
  std::mt19937_64 gen(13);
  for (int i = 0; i < 200; ++i) {
    const Pose a = random_pose(gen);
    const Pose b = random_pose(gen);
    const Pose c = random_pose(gen);
    CHECK(max_abs_diff(compose(compose(a, b), c).matrix(),
                       compose(a, compose(b, c)).matrix()) < 1e-9);
    CHECK(compose(a, b).orthonormality_error() < 1e-12);
    CHECK(max_abs_diff(inverse(inverse(a)).matrix(), a.matrix()) < 1e-9);
  }
}

TEST_CASE("inverse of a pure translation negates it") {
  const Pose p(Mat3::Identity(), Vec3(1, 2, 3));
  const Pose inv = inverse(p);
  CHECK((inv.translation - Vec3(-1, -2, -3)).norm() == 0.0);
  CHECK((inv.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample_twist is deterministic and honors a degenerate stddev") {
  const TwistDistribution dist(twist6(1, 2, 3, 0.1, 0.2, 0.3),
                               Vec6::Constant(1e-300));
  const Twist a = sample_twist(dist, 42);
  const Twist b = sample_twist(dist, 42);
  CHECK((a.vector() - b.vector()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.vector() - dist.mean).cwiseAbs().maxCoeff() < 1e-290);

  const TwistDistribution wide(Vec6::Zero(), Vec6::Ones());
  CHECK((sample_twist(wide, 1).vector() - sample_twist(wide, 2).vector())
            .cwiseAbs()
            .maxCoeff() > 0.0);
}

TEST_CASE("sample_twist matches its distribution over many draws") {
  const Vec6 mean = twist6(0.5, -1.0, 2.0, 0.01, -0.02, 0.03);
  const Vec6 stddev = twist6(1.0, 2.0, 0.5, 0.1, 0.05, 0.2);
  const TwistDistribution dist(mean, stddev);
  const int n = 100000;
  Vec6 sum = Vec6::Zero();
  Vec6 sq = Vec6::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec6 v = sample_twist(dist, static_cast<std::uint64_t>(i)).vector();
    sum += v;
    sq += v.cwiseProduct(v);
  }
  for (int d = 0; d < 6; ++d) {
    const double m = sum[d] / n;
    const double s = std::sqrt(sq[d] / n - m * m);
    CHECK(std::abs(m - mean[d]) < 4.0 * stddev[d] / std::sqrt(double(n)));
    CHECK(std::abs(s - stddev[d]) < 0.05 * stddev[d]);
  }
}

TEST_CASE("sample_second_view: eps2 - eps1 = eps exactly, variance doubles") {
  const TwistDistribution dist(Vec6::Zero(), twist6(1, 2, 0.5, 0.1, 0.05, 0.2));
  std::mt19937_64 gen(3);
  const Twist eps1 = random_twist(gen);

  Vec6 sq = Vec6::Zero();
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto [eps2, eps] =
        sample_second_view(eps1, dist, static_cast<std::uint64_t>(i));
    CHECK((eps2.vector() - eps1.vector() - eps.vector()).cwiseAbs().maxCoeff() ==
          0.0);
    sq += eps.vector().cwiseProduct(eps.vector());
  }
  for (int d = 0; d < 6; ++d) {
    const double target = 2.0 * dist.stddev[d] * dist.stddev[d];
    CHECK(sq[d] / n == doctest::Approx(target).epsilon(0.05));
  }

  const TwistDistribution degenerate(Vec6::Zero(), Vec6::Constant(1e-300));
  const auto [eps2, eps] = sample_second_view(eps1, degenerate, 9);
  CHECK((eps2.vector() - eps1.vector()).cwiseAbs().maxCoeff() < 1e-290);
  CHECK(eps.vector().cwiseAbs().maxCoeff() < 1e-290);
}

TEST_CASE("geodesic distance of a pose to itself is zero") {
  CHECK(geodesic_distance(Pose::identity(), Pose::identity(), 400.0) == 0.0);
  std::mt19937_64 gen(17);
  for (int i = 0; i < 50; ++i) {
    const Pose t = random_pose(gen);
    // Matrix products are not bitwise symmetric, so allow roundoff.
    CHECK(geodesic_distance(t, t, 400.0) < 1e-12);
  }
}

TEST_CASE("geodesic distance hand case: pure translation (3,4,0)") {
  const Pose t_hat(Mat3::Identity(), Vec3(3, 4, 0));
  const double expected = std::sqrt(5.0) + 5.0;  // 7.2360679...
  CHECK(geodesic_distance(Pose::identity(), t_hat, 400.0) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(geodesic_distance(Pose::identity(), t_hat, 1.0) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("geodesic distance hand case: rotation-only with f = 2") {
  for (const double theta : {0.3, 0.7, 1.5, 2.9}) {
    const Pose t_hat(rot_z(theta), Vec3::Zero());
    CHECK(geodesic_distance(Pose::identity(), t_hat, 2.0) ==
          doctest::Approx(2.0 * theta).epsilon(1e-12));
  }
}

TEST_CASE("geodesic distance is positive for distinct poses") {
  std::mt19937_64 gen(19);
  for (int i = 0; i < 100; ++i) {
    const Pose a = random_pose(gen);
    const Pose b = random_pose(gen);
    if ((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() == 0.0) continue;
    CHECK(geodesic_distance(a, b, 400.0) > 0.0);
  }
}

TEST_CASE("cross_pose: zero twist is a no-op and directions invert") {
  std::mt19937_64 gen(23);
  for (int i = 0; i < 100; ++i) {
    const Pose t = random_pose(gen, 50.0, 2.0);
    CHECK(max_abs_diff(cross_pose(t, Twist{}, CrossDirection::forward).matrix(),
                       t.matrix()) < 1e-12);
    const Twist eps = random_twist(gen, 5.0, 0.3);
    const Pose there = cross_pose(t, eps, CrossDirection::forward);
    const Pose back = cross_pose(there, eps, CrossDirection::backward);
    CHECK(max_abs_diff(back.matrix(), t.matrix()) < 1e-9);
  }
}

TEST_CASE("cross_pose forward from identity along x is a pure translation") {
  const Pose p = cross_pose(Pose::identity(), Twist(twist6(1, 0, 0, 0, 0, 0)),
                            CrossDirection::forward);
  CHECK((p.translation - Vec3(1, 0, 0)).norm() == 0.0);
  CHECK((p.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pa_to_lat_transform at theta = pi/2 has exact published entries") {
  const Vec3 extent(64.0, 80.0, 96.0);
  const Pose t = pa_to_lat_transform(M_PI / 2, extent);
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  // Bit-for-bit on the 0/+-1 entries.
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      CHECK(t.rotation(r, c) == expected(r, c));
    }
  }
  CHECK(t.translation.x() == extent.x() + extent.y());
  CHECK(t.translation.y() == extent.y() - extent.x());
  CHECK(t.translation.z() == 0.0);
}

TEST_CASE("pa_to_lat_transform at theta = 0 keeps the published translation") {
  const Vec3 extent(10.0, 20.0, 30.0);
  const Pose t = pa_to_lat_transform(0.0, extent);
  CHECK((t.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(t.translation.x() == 10.0);
  CHECK(t.translation.y() == 20.0);
  CHECK(t.translation.z() == 0.0);
}

TEST_CASE("pa_to_lat_transform rejects out-of-range angles") {
  CHECK_THROWS_AS(pa_to_lat_transform(3.5, Vec3::Ones()), ArgumentError);
  CHECK_THROWS_AS(pa_to_lat_transform(0.5, Vec3(1, -1, 1)), ArgumentError);
}

TEST_CASE("rotation_about_center fixes its center") {
  const Vec3 center(4.0, -3.0, 7.0);
  const Pose t = rotation_about_center(1.1, center);
  CHECK((t.apply(center) - center).norm() < 1e-12);
  // Composing with an identity PA pose realizes the two-view layout.
  const Pose lat = compose(t, Pose::identity());
  CHECK(max_abs_diff(lat.matrix(), t.matrix()) == 0.0);
}

TEST_CASE("pose matrix JSON-level invariants") {
  std::mt19937_64 gen(29);
  const Pose p = random_pose(gen);
  const Pose back = Pose::from_matrix(p.matrix());
  CHECK(max_abs_diff(back.matrix(), p.matrix()) == 0.0);

  Mat4 bad = p.matrix();
  bad(3, 3) = 2.0;
  CHECK_THROWS_AS(Pose::from_matrix(bad), ArgumentError);
}
