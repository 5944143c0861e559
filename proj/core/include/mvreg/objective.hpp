#ifndef MVREG_OBJECTIVE_HPP
#define MVREG_OBJECTIVE_HPP

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mvreg/image.hpp"
#include "mvreg/projector.hpp"
#include "mvreg/se3.hpp"

namespace mvreg {

/// Relative weights of the local/cross loss terms and of the pose term within
/// each.
struct LossWeights {
  double beta1 = 0.7;
  double beta2 = 0.3;
  double gamma = 1e-2;

  void validate() const;  // beta >= 0, beta1 + beta2 > 0, gamma >= 0
};

/// Everything one two-view registration problem observes: per view the fixed
/// target image, optionally the ground-truth pose, and the current estimate;
/// plus the inter-view twist eps.
struct ViewObservation {
  Image fixed_image;
  std::optional<Pose> true_pose;
  Pose estimated_pose;
};

struct ViewPair {
  std::array<ViewObservation, 2> views;
  Twist eps;

  void validate() const;  // both images share shape and pixel spacing
};

/// Population mean and standard deviation (divide by P).
std::pair<double, double> image_stats(const Image& img);

/// Normalized cross-correlation in [-1, 1]:
///   (1/P) sum_p [(a - mu_a)/sigma_a] [(b - mu_b)/sigma_b].
/// Throws ArgumentError on shape mismatch and DegenerateImageError when
/// either image is constant.
double ncc(const Image& a, const Image& b);

/// 1 - ncc, with the defined worst-case value 2 when either image is
/// constant; the totalized form used inside optimization loops.
double similarity_loss(const Image& a, const Image& b);

/// Local term: sum over views of gamma * geodesic(true, estimated) +
/// (1 - ncc(fixed, render at estimate)). Requires true poses.
double local_loss(const ViewPair& pair, const Volume& vol,
                  const DetectorGeometry& geom, const LossWeights& w,
                  RenderMode mode = RenderMode::intensity, int workers = 0);

/// Cross term: each view is compared against the pose transferred from the
/// other view through eps (backward for view 1, forward for view 2), in both
/// the pose metric and the rendered-image metric. The transferred poses equal
/// the true poses exactly when the estimates are exact and eps equals the
/// difference of the two pose log twists. `literal_log_term` switches the
/// geodesic Log argument to the uninverted product form.
double cross_loss(const ViewPair& pair, const Volume& vol,
                  const DetectorGeometry& geom, const LossWeights& w,
                  bool literal_log_term = false,
                  RenderMode mode = RenderMode::intensity, int workers = 0);

/// beta1 * local + beta2 * cross.
double total_loss(const ViewPair& pair, const Volume& vol,
                  const DetectorGeometry& geom, const LossWeights& w,
                  RenderMode mode = RenderMode::intensity, int workers = 0);

/// Test-time objective (no ground truth): weighted sum over views of
/// 1 - ncc(fixed_i, render at exp(delta_i) * base_i), with degenerate renders
/// scored at the worst-case loss 2. Weights must be non-negative and sum
/// to 1.
double refine_objective(std::span<const Twist> deltas,
                        std::span<const Pose> base_poses,
                        std::span<const Image> fixed_images, const Volume& vol,
                        const DetectorGeometry& geom,
                        std::span<const double> view_weights,
                        RenderMode mode = RenderMode::intensity,
                        int workers = 0);

using TwistObjective = std::function<double(std::span<const Twist>)>;

/// Central finite differences of a scalar objective over k twists:
/// component j of twist i is (f(+h e_j) - f(-h e_j)) / (2h); 12 objective
/// evaluations per twist. Throws NumericError naming the twist/component if
/// an evaluation is non-finite.
std::vector<Vec6> objective_gradient(const TwistObjective& f,
                                     std::span<const Twist> at, double step);

}  // namespace mvreg

#endif  // MVREG_OBJECTIVE_HPP
