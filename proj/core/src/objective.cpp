#include "mvreg/objective.hpp"

#include <cmath>
#include <string>

#include "mvreg/errors.hpp"

namespace mvreg {

void LossWeights::validate() const {
  if (!(beta1 >= 0.0) || !(beta2 >= 0.0) || !(beta1 + beta2 > 0.0) ||
      !(gamma >= 0.0)) {
    throw ArgumentError(
        "loss weights: beta1, beta2 >= 0, beta1 + beta2 > 0, gamma >= 0");
  }
}

void ViewPair::validate() const {
  const Image& a = views[0].fixed_image;
  const Image& b = views[1].fixed_image;
  a.validate();
  b.validate();
  if (!a.same_shape(b) || a.pixel_spacing != b.pixel_spacing) {
    throw ArgumentError("view pair: images must share shape and pixel spacing");
  }
}

std::pair<double, double> image_stats(const Image& img) {
  if (img.data.empty()) {
    throw ArgumentError("image_stats: empty image");
  }
  const double p = static_cast<double>(img.data.size());
  double sum = 0.0;
  for (const float v : img.data) sum += v;
  const double mean = sum / p;
  double sq = 0.0;
  for (const float v : img.data) {
    const double d = v - mean;
    sq += d * d;
  }
  return {mean, std::sqrt(sq / p)};
}

namespace {

/// Shared NCC core; returns nullopt when either image is constant.
std::optional<double> ncc_or_degenerate(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw ArgumentError("ncc: image dimensions differ");
  }
  if (a.data.empty()) {
    throw ArgumentError("ncc: empty image");
  }
  const auto [mu_a, sigma_a] = image_stats(a);
  const auto [mu_b, sigma_b] = image_stats(b);
  if (sigma_a == 0.0 || sigma_b == 0.0) return std::nullopt;
  const double p = static_cast<double>(a.data.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    acc += ((a.data[i] - mu_a) / sigma_a) * ((b.data[i] - mu_b) / sigma_b);
  }
  return acc / p;
}

}  // namespace

double ncc(const Image& a, const Image& b) {
  const auto value = ncc_or_degenerate(a, b);
  if (!value) {
    throw DegenerateImageError("ncc: constant image has no correlation");
  }
  return *value;
}

double similarity_loss(const Image& a, const Image& b) {
  const auto value = ncc_or_degenerate(a, b);
  return value ? 1.0 - *value : 2.0;
}

double local_loss(const ViewPair& pair, const Volume& vol,
                  const DetectorGeometry& geom, const LossWeights& w,
                  RenderMode mode, int workers) {
  w.validate();
  pair.validate();
  double loss = 0.0;
  for (const auto& view : pair.views) {
    if (!view.true_pose) {
      throw ArgumentError("local_loss: true poses are required");
    }
    const double geo = geodesic_distance(*view.true_pose, view.estimated_pose,
                                         geom.source_to_detector);
    const Image rendered =
        render(vol, geom, view.estimated_pose, mode, workers);
    loss += w.gamma * geo + (1.0 - ncc(view.fixed_image, rendered));
  }
  return loss;
}

double cross_loss(const ViewPair& pair, const Volume& vol,
                  const DetectorGeometry& geom, const LossWeights& w,
                  bool literal_log_term, RenderMode mode, int workers) {
  w.validate();
  pair.validate();
  const GeodesicLogForm form = literal_log_term ? GeodesicLogForm::product
                                                : GeodesicLogForm::relative;
  // Pose of each view transferred from the other one through eps.
  const std::array<Pose, 2> transferred = {
      cross_pose(pair.views[1].estimated_pose, pair.eps,
                 CrossDirection::backward),
      cross_pose(pair.views[0].estimated_pose, pair.eps,
                 CrossDirection::forward)};
  double loss = 0.0;
  for (int i = 0; i < 2; ++i) {
    const auto& view = pair.views[i];
    if (!view.true_pose) {
      throw ArgumentError("cross_loss: true poses are required");
    }
    const double geo = geodesic_distance(*view.true_pose, transferred[i],
                                         geom.source_to_detector, form);
    const Image rendered = render(vol, geom, transferred[i], mode, workers);
    loss += w.gamma * geo + (1.0 - ncc(view.fixed_image, rendered));
  }
  return loss;
}

double total_loss(const ViewPair& pair, const Volume& vol,
                  const DetectorGeometry& geom, const LossWeights& w,
                  RenderMode mode, int workers) {
  w.validate();
  return w.beta1 * local_loss(pair, vol, geom, w, mode, workers) +
         w.beta2 * cross_loss(pair, vol, geom, w, false, mode, workers);
}

double refine_objective(std::span<const Twist> deltas,
                        std::span<const Pose> base_poses,
                        std::span<const Image> fixed_images, const Volume& vol,
                        const DetectorGeometry& geom,
                        std::span<const double> view_weights, RenderMode mode,
                        int workers) {
  const std::size_t n = deltas.size();
  if (base_poses.size() != n || fixed_images.size() != n ||
      view_weights.size() != n || n == 0) {
    throw ArgumentError("refine_objective: per-view inputs must align");
  }
  double weight_sum = 0.0;
  for (const double w : view_weights) {
    if (!(w >= 0.0)) {
      throw ArgumentError("refine_objective: view weights must be >= 0");
    }
    weight_sum += w;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw ArgumentError("refine_objective: view weights must sum to 1");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Image rendered =
        render_at_twist(vol, geom, base_poses[i], deltas[i], mode, workers);
    loss += view_weights[i] * similarity_loss(fixed_images[i], rendered);
  }
  return loss;
}

std::vector<Vec6> objective_gradient(const TwistObjective& f,
                                     std::span<const Twist> at, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw ArgumentError("objective_gradient: step must be positive");
  }
  std::vector<Twist> probe(at.begin(), at.end());
  std::vector<Vec6> grad(at.size(), Vec6::Zero());
  for (std::size_t i = 0; i < at.size(); ++i) {
    for (int j = 0; j < 6; ++j) {
      const double original = probe[i][j];
      probe[i][j] = original + step;
      const double plus = f(probe);
      probe[i][j] = original - step;
      const double minus = f(probe);
      probe[i][j] = original;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        throw NumericError("objective_gradient: non-finite objective at twist " +
                           std::to_string(i) + " component " +
                           std::to_string(j));
      }
      grad[i][j] = (plus - minus) / (2.0 * step);
    }
  }
  return grad;
}

}  // namespace mvreg
