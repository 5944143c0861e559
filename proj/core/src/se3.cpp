#include "mvreg/se3.hpp"

#include <cmath>

#include "mvreg/errors.hpp"
#include "mvreg/rng.hpp"

namespace mvreg {

namespace {

constexpr double kTaylorAngle = 1e-8;   // below this, series expansions
constexpr double kBranchGuard = 1e-6;   // distance from pi where Log errors

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

/// (1 - cos t)/t^2 without the 1 - cos cancellation.
double cosc(double theta) {
  const double half_sin = std::sin(0.5 * theta);
  return 2.0 * half_sin * half_sin / (theta * theta);
}

Mat3 rodrigues(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 omega = hat(phi);
  if (theta < kTaylorAngle) {
    return Mat3::Identity() + omega + 0.5 * omega * omega;
  }
  return Mat3::Identity() + (std::sin(theta) / theta) * omega +
         cosc(theta) * omega * omega;
}

/// V such that t = V rho in the exponential.
Mat3 exp_v_matrix(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 omega = hat(phi);
  if (theta < kTaylorAngle) {
    return Mat3::Identity() + 0.5 * omega + (1.0 / 6.0) * omega * omega;
  }
  const double b = (theta - std::sin(theta)) / (theta * theta * theta);
  return Mat3::Identity() + cosc(theta) * omega + b * omega * omega;
}

Mat3 log_v_inverse(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 omega = hat(phi);
  if (theta < kTaylorAngle) {
    return Mat3::Identity() - 0.5 * omega + (1.0 / 12.0) * omega * omega;
  }
  const double t2 = theta * theta;
  const double coeff =
      (1.0 - theta / (2.0 * std::tan(0.5 * theta))) / t2;
  return Mat3::Identity() - 0.5 * omega + coeff * omega * omega;
}

/// Angle of a rotation from both its skew part and its trace. atan2 keeps
/// the result first-order accurate near identity and near pi, where acos of
/// the trace alone loses half the digits.
double rotation_angle(const Mat3& r_rel) {
  const Vec3 w(r_rel(2, 1) - r_rel(1, 2), r_rel(0, 2) - r_rel(2, 0),
               r_rel(1, 0) - r_rel(0, 1));
  const double s = 0.5 * w.norm();
  const double c = 0.5 * (r_rel.trace() - 1.0);
  return std::atan2(s, std::min(1.0, std::max(-1.0, c)));
}

Vec3 rotation_log(const Mat3& r) {
  const double theta = rotation_angle(r);
  if (theta > M_PI - kBranchGuard) {
    throw BranchError(
        "SE(3) logarithm: rotation angle within 1e-6 of pi, principal "
        "branch is ambiguous");
  }
  Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (theta < kTaylorAngle) {
    return 0.5 * w;
  }
  return (theta / (2.0 * std::sin(theta))) * w;
}

}  // namespace

Pose Pose::from_matrix(const Mat4& m, double tolerance) {
  if (!m.allFinite()) {
    throw ArgumentError("pose matrix has non-finite entries");
  }
  const Vec3 bottom(m(3, 0), m(3, 1), m(3, 2));
  if (bottom.cwiseAbs().maxCoeff() > tolerance ||
      std::abs(m(3, 3) - 1.0) > tolerance) {
    throw ArgumentError("pose matrix bottom row must be (0, 0, 0, 1)");
  }
  Pose p(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
  if (p.orthonormality_error() > tolerance) {
    throw ArgumentError("pose rotation block is not in SO(3)");
  }
  return p;
}

double Pose::orthonormality_error() const {
  const Mat3 gram = rotation.transpose() * rotation;
  const double ortho = (gram - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = std::abs(rotation.determinant() - 1.0);
  return std::max(ortho, det);
}

TwistDistribution::TwistDistribution(const Vec6& mu, const Vec6& sigma)
    : mean(mu), stddev(sigma) {
  if (!mu.allFinite() || !sigma.allFinite()) {
    throw ArgumentError("twist distribution parameters must be finite");
  }
  if ((sigma.array() <= 0.0).any()) {
    throw ArgumentError("twist distribution stddev components must be > 0");
  }
}

Pose exp(const Twist& v) {
  if (!v.all_finite()) {
    throw ArgumentError("exp: twist has non-finite components");
  }
  return Pose(rodrigues(v.phi), exp_v_matrix(v.phi) * v.rho);
}

Twist log(const Pose& t) {
  if (t.orthonormality_error() > 1e-9) {
    throw ArgumentError("log: rotation is not orthonormal within 1e-9");
  }
  const Vec3 phi = rotation_log(t.rotation);
  const Vec3 rho = log_v_inverse(phi) * t.translation;
  return Twist(rho, phi);
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation * b.rotation, a.rotation * b.translation + a.translation);
}

Pose inverse(const Pose& t) {
  const Mat3 rt = t.rotation.transpose();
  return Pose(rt, -(rt * t.translation));
}

Twist sample_twist(const TwistDistribution& dist, std::uint64_t rng_seed) {
  Vec6 v;
  for (int d = 0; d < 6; ++d) {
    v[d] = dist.mean[d] +
           dist.stddev[d] * rng::standard_normal(rng_seed, rng::kStreamTwist, d);
  }
  return Twist(v);
}

std::pair<Twist, Twist> sample_second_view(const Twist& eps1,
                                           const TwistDistribution& dist,
                                           std::uint64_t rng_seed) {
  const double scale = std::sqrt(2.0);
  Vec6 draw;
  for (int d = 0; d < 6; ++d) {
    draw[d] = scale * dist.stddev[d] *
              rng::standard_normal(rng_seed, rng::kStreamSecondView, d);
  }
  const Vec6 eps2 = eps1.vector() + draw;
  // Return eps as the representable difference so eps2 - eps1 = eps holds
  // exactly in floating point, not just to rounding.
  const Vec6 eps = eps2 - eps1.vector();
  return {Twist(eps2), Twist(eps)};
}

double geodesic_distance(const Pose& t, const Pose& t_hat, double focal_length,
                         GeodesicLogForm form) {
  if (!(focal_length > 0.0) || !std::isfinite(focal_length)) {
    throw ArgumentError("geodesic_distance: focal length must be positive");
  }
  // Angle of the relative rotation R^T Rhat. The printed form of this
  // distance omits the transpose, which would not vanish at equality.
  const double angle = rotation_angle(t.rotation.transpose() * t_hat.rotation);
  const double trans_gap = (t.translation - t_hat.translation).norm();
  const double chordal =
      std::sqrt(0.25 * focal_length * focal_length * angle * angle + trans_gap);

  const Pose rel = form == GeodesicLogForm::relative
                       ? compose(inverse(t), t_hat)
                       : compose(t, t_hat);
  const double log_norm = log(rel).vector().norm();
  return chordal + log_norm;
}

Pose cross_pose(const Pose& t_other, const Twist& eps, CrossDirection dir) {
  const Vec6 base = log(t_other).vector();
  const Vec6 shifted =
      dir == CrossDirection::forward ? Vec6(base + eps.vector())
                                     : Vec6(base - eps.vector());
  return exp(Twist(shifted));
}

namespace {

/// sin/cos with exact 0/+-1 results at quadrant angles so that the
/// inter-view matrices match their published integer entries bit-for-bit.
void snapped_sincos(double theta, double& s, double& c) {
  s = std::sin(theta);
  c = std::cos(theta);
  const double snap = 1e-15;
  if (std::abs(s) < snap) s = 0.0;
  if (std::abs(c) < snap) c = 0.0;
  if (std::abs(s - 1.0) < snap) s = 1.0;
  if (std::abs(s + 1.0) < snap) s = -1.0;
  if (std::abs(c - 1.0) < snap) c = 1.0;
  if (std::abs(c + 1.0) < snap) c = -1.0;
}

}  // namespace

Pose pa_to_lat_transform(double theta, const Vec3& voxel_extent) {
  if (!(theta >= -M_PI && theta <= M_PI)) {
    throw ArgumentError("pa_to_lat_transform: theta must lie in [-pi, pi]");
  }
  if ((voxel_extent.array() <= 0.0).any()) {
    throw ArgumentError("pa_to_lat_transform: voxel extent must be positive");
  }
  double s, c;
  snapped_sincos(theta, s, c);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  const double x = voxel_extent.x();
  const double y = voxel_extent.y();
  return Pose(r, Vec3(x + y * s, y - x * s, 0.0));
}

Pose rotation_about_center(double theta, const Vec3& center) {
  double s, c;
  snapped_sincos(theta, s, c);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return Pose(r, center - r * center);
}

}  // namespace mvreg
