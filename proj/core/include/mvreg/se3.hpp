#ifndef MVREG_SE3_HPP
#define MVREG_SE3_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

namespace mvreg {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Element of se(3): a 6-vector perturbation with the translational generator
/// first. Layout (rho, phi) = (translation mm, rotation rad axis-angle) is
/// fixed everywhere, including file formats.
struct Twist {
  Vec3 rho = Vec3::Zero();  // translational generator, mm
  Vec3 phi = Vec3::Zero();  // rotational generator, rad

  Twist() = default;
  Twist(const Vec3& rho_in, const Vec3& phi_in) : rho(rho_in), phi(phi_in) {}
  explicit Twist(const Vec6& v) : rho(v.head<3>()), phi(v.tail<3>()) {}

  Vec6 vector() const {
    Vec6 v;
    v << rho, phi;
    return v;
  }

  double& operator[](int i) { return i < 3 ? rho[i] : phi[i - 3]; }
  double operator[](int i) const { return i < 3 ? rho[i] : phi[i - 3]; }

  bool all_finite() const { return rho.allFinite() && phi.allFinite(); }
};

/// Rigid transform in SE(3), stored as rotation matrix + translation.
/// Used as the camera extrinsic: it maps camera-frame points into the CT
/// world frame, so `translation` is the X-ray source position in world mm.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Mat3& r, const Vec3& t) : rotation(r), translation(t) {}

  static Pose identity() { return Pose(); }

  /// R p + t
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  /// Builds a Pose from a homogeneous matrix, checking rigidity.
  /// Throws ArgumentError if the rotation block is not in SO(3) within
  /// `tolerance` per entry or the bottom row is not (0,0,0,1).
  static Pose from_matrix(const Mat4& m, double tolerance = 1e-9);

  /// Max per-entry violation of R^T R = I, plus |det(R) - 1|.
  double orthonormality_error() const;
};

/// Per-dimension Gaussian over se(3) used to sample pose perturbations.
struct TwistDistribution {
  Vec6 mean = Vec6::Zero();
  Vec6 stddev = Vec6::Ones();

  TwistDistribution() = default;
  TwistDistribution(const Vec6& mu, const Vec6& sigma);
};

/// Exponential map se(3) -> SE(3): Rodrigues rotation with the coupled
/// V-matrix translation. exp of the zero twist is the identity pose.
Pose exp(const Twist& v);

/// Logarithm map SE(3) -> se(3), principal branch. Throws BranchError when
/// the rotation angle is within 1e-6 of pi, and ArgumentError when the
/// rotation block violates the Pose invariants.
Twist log(const Pose& t);

/// Matrix-product composition: (a*b).apply(p) == a.apply(b.apply(p)).
Pose compose(const Pose& a, const Pose& b);

/// Group inverse: R^T, -R^T t.
Pose inverse(const Pose& t);

/// Draws one twist with independent per-dimension normals. Deterministic for
/// a fixed seed.
Twist sample_twist(const TwistDistribution& dist, std::uint64_t rng_seed);

/// Samples the inter-view twist eps from a zero-mean Gaussian with
/// per-dimension variance 2*stddev^2 and returns (eps2, eps) where
/// eps2 = eps1 + eps exactly.
std::pair<Twist, Twist> sample_second_view(const Twist& eps1,
                                           const TwistDistribution& dist,
                                           std::uint64_t rng_seed);

/// Which product feeds the Log term of the geodesic distance.
enum class GeodesicLogForm {
  relative,  // Log(T^-1 That): vanishes at equality, the default
  product,   // Log(T That): compatibility form
};

/// Pose discrepancy combining a focal-length-weighted rotation angle, the
/// translation gap, and the norm of the relative log twist:
///   sqrt(f^2/4 * angle(R^T Rhat)^2 + |t - that|) + |Log(T^-1 That)|.
/// Zero iff the two poses coincide (relative form). The arccos argument is
/// clamped to avoid NaN from floating-point drift.
double geodesic_distance(const Pose& t, const Pose& t_hat, double focal_length,
                         GeodesicLogForm form = GeodesicLogForm::relative);

enum class CrossDirection { forward, backward };

/// Transfers a pose across the inter-view twist:
/// forward: Exp(Log(T) + eps); backward: Exp(Log(T) - eps).
/// The two directions are mutual inverses.
Pose cross_pose(const Pose& t_other, const Twist& eps, CrossDirection dir);

/// The fixed inter-view transform relating the lateral view to the
/// postero-anterior view, as a z-axis rotation with the published translation
/// row (x + y sin(theta), y - x sin(theta), 0) where (x, y, z) is the volume
/// extent. Entries that are exactly 0 or +-1 at quadrant angles are produced
/// bit-exactly. theta must lie in [-pi, pi].
Pose pa_to_lat_transform(double theta, const Vec3& voxel_extent);

/// Rotation by theta about the world z-axis centered on `center`:
/// T(center) Rz(theta) T(-center). This recentering form is the default
/// inter-view transform for spatial two-view registration.
Pose rotation_about_center(double theta, const Vec3& center);

}  // namespace mvreg

#endif  // MVREG_SE3_HPP
