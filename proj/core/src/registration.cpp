#include "mvreg/registration.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "json_util.hpp"
#include "mvreg/errors.hpp"
#include "mvreg/rng.hpp"

namespace mvreg {

void RefineConfig::validate() const {
  if (!(lr_rotation > 0.0) || !(lr_translation > 0.0)) {
    throw ArgumentError("refine config: learning rates must be > 0");
  }
  if (iterations < 0) {
    throw ArgumentError("refine config: iterations must be >= 0");
  }
  if (!(weight_low_ncc >= 0.0) || weight_low_ncc > 1.0 ||
      std::abs(weight_low_ncc + weight_high_ncc - 1.0) > 1e-12) {
    throw ArgumentError(
        "refine config: view weights must lie in [0,1] and sum to 1");
  }
  if (!(adam_beta1 >= 0.0) || adam_beta1 >= 1.0 || !(adam_beta2 >= 0.0) ||
      adam_beta2 >= 1.0 || !(adam_epsilon > 0.0)) {
    throw ArgumentError("refine config: invalid adam parameters");
  }
  if (!(fd_step > 0.0)) {
    throw ArgumentError("refine config: fd_step must be > 0");
  }
}

Pose init_perturbed(const Pose& true_pose, const TwistDistribution& dist,
                    std::uint64_t rng_seed) {
  return compose(exp(sample_twist(dist, rng_seed)), true_pose);
}

Pose init_multistart(const Volume& vol, const DetectorGeometry& geom,
                     const Image& fixed_image, const Pose& base_pose,
                     const TwistDistribution& dist, int n_starts,
                     std::uint64_t rng_seed, RenderMode mode, int workers) {
  if (n_starts < 1) {
    throw ArgumentError("init_multistart: n_starts must be >= 1");
  }
  if (image_stats(fixed_image).second == 0.0) {
    throw DegenerateImageError("init_multistart: constant fixed image");
  }
  Pose best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_starts; ++k) {
    Vec6 v;
    for (int d = 0; d < 6; ++d) {
      v[d] = dist.mean[d] +
             dist.stddev[d] * rng::standard_normal(rng_seed,
                                                   rng::kStreamMultistart,
                                                   static_cast<std::uint64_t>(k) * 6 + d);
    }
    const Pose candidate = compose(exp(Twist(v)), base_pose);
    const Image rendered = render(vol, geom, candidate, mode, workers);
    // Degenerate candidate renders score as fully anti-correlated.
    const double score = 1.0 - similarity_loss(fixed_image, rendered);
    if (score > best_score) {
      best_score = score;
      best = candidate;
    }
  }
  return best;
}

std::vector<Pose> load_external_poses(const std::filesystem::path& path) {
  const auto j = detail::parse_json_file(path);
  if (!j.is_array()) {
    throw DataError("external poses file must hold a JSON array: " +
                    path.string());
  }
  std::vector<Pose> poses;
  poses.reserve(j.size());
  for (const auto& jp : j) {
    poses.push_back(detail::pose_from_json(jp, 1e-6, /*project=*/true));
  }
  return poses;
}

std::array<double, 2> assign_view_weights(const std::array<double, 2>& ncc_values,
                                          const RefineConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(ncc_values[0]) || !std::isfinite(ncc_values[1])) {
    throw ArgumentError("assign_view_weights: ncc values must be finite");
  }
  if (ncc_values[0] == ncc_values[1]) {
    return {0.5, 0.5};
  }
  const bool first_is_worse = ncc_values[0] < ncc_values[1];
  const bool first_gets_focus =
      cfg.focus_low_similarity ? first_is_worse : !first_is_worse;
  if (first_gets_focus) {
    return {cfg.weight_low_ncc, cfg.weight_high_ncc};
  }
  return {cfg.weight_high_ncc, cfg.weight_low_ncc};
}

namespace {

struct AdamState {
  Vec6 m = Vec6::Zero();
  Vec6 v = Vec6::Zero();
};

void adam_step(Vec6& delta, AdamState& state, const Vec6& grad,
               const RefineConfig& cfg, int t) {
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
  for (int j = 0; j < 6; ++j) {
    state.m[j] = cfg.adam_beta1 * state.m[j] + (1.0 - cfg.adam_beta1) * grad[j];
    state.v[j] = cfg.adam_beta2 * state.v[j] + (1.0 - cfg.adam_beta2) * grad[j] * grad[j];
    const double m_hat = state.m[j] / bc1;
    const double v_hat = state.v[j] / bc2;
    const double lr = j < 3 ? cfg.lr_translation : cfg.lr_rotation;
    delta[j] -= lr * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
  }
}

/// Converged when the objective moved by less than 1e-6 relative over the
/// last 20 iterations. Reported, never acted on.
bool trace_converged(const std::vector<double>& trace) {
  if (trace.size() < 21) return false;
  const double earlier = trace[trace.size() - 21];
  const double now = trace.back();
  return std::abs(now - earlier) <
         1e-6 * std::max(std::abs(earlier), 1e-12);
}

/// One-iteration render cache: gradient probes move one view at a time, so
/// the unchanged view's term is served from here instead of re-rendering.
class ViewLossCache {
 public:
  ViewLossCache(const Volume& vol, const DetectorGeometry& geom,
                const Image& fixed, const Pose& base, RenderMode mode,
                int workers)
      : vol_(vol), geom_(geom), fixed_(fixed), base_(base), mode_(mode),
        workers_(workers) {}

  double loss_at(const Twist& delta) {
    std::array<double, 6> key;
    for (int j = 0; j < 6; ++j) key[j] = delta[j];
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const Image rendered =
        render_at_twist(vol_, geom_, base_, delta, mode_, workers_);
    const double loss = similarity_loss(fixed_, rendered);
    cache_.emplace(key, loss);
    return loss;
  }

  void clear() { cache_.clear(); }

 private:
  const Volume& vol_;
  const DetectorGeometry& geom_;
  const Image& fixed_;
  const Pose& base_;
  RenderMode mode_;
  int workers_;
  std::map<std::array<double, 6>, double> cache_;
};

}  // namespace

RegistrationResult fine_register(const Volume& vol, const DetectorGeometry& geom,
                                 const std::array<Image, 2>& fixed_images,
                                 const std::array<Pose, 2>& init_poses,
                                 const RefineConfig& cfg, RenderMode mode,
                                 int workers) {
  cfg.validate();
  geom.validate();
  for (const auto& img : fixed_images) {
    img.validate();
    if (img.width != geom.detector_width || img.height != geom.detector_height) {
      throw ArgumentError(
          "fine_register: fixed image does not match detector size");
    }
  }

  RegistrationResult result;
  result.initial_poses = init_poses;
  result.refined_poses = init_poses;
  if (cfg.iterations == 0) {
    return result;
  }

  std::array<Twist, 2> delta;
  std::array<Twist, 2> best_delta;
  double best_loss = std::numeric_limits<double>::infinity();
  std::array<AdamState, 2> adam;
  std::array<ViewLossCache, 2> caches = {
      ViewLossCache(vol, geom, fixed_images[0], init_poses[0], mode, workers),
      ViewLossCache(vol, geom, fixed_images[1], init_poses[1], mode, workers)};

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    for (auto& c : caches) c.clear();

    const std::array<double, 2> view_loss = {caches[0].loss_at(delta[0]),
                                             caches[1].loss_at(delta[1])};
    const std::array<double, 2> view_ncc = {1.0 - view_loss[0],
                                            1.0 - view_loss[1]};
    const std::array<double, 2> weights = assign_view_weights(view_ncc, cfg);

    const double loss = weights[0] * view_loss[0] + weights[1] * view_loss[1];
    if (!std::isfinite(loss)) {
      throw NumericError("fine_register: non-finite objective at iteration " +
                         std::to_string(iter));
    }
    result.loss_trace.push_back(loss);
    result.ncc_traces[0].push_back(view_ncc[0]);
    result.ncc_traces[1].push_back(view_ncc[1]);
    if (loss < best_loss) {
      best_loss = loss;
      best_delta = delta;
    }

    // Weights stay frozen during the gradient evaluation.
    const TwistObjective objective = [&](std::span<const Twist> probe) {
      return weights[0] * caches[0].loss_at(probe[0]) +
             weights[1] * caches[1].loss_at(probe[1]);
    };
    const std::vector<Vec6> grad =
        objective_gradient(objective, delta, cfg.fd_step);

    for (int i = 0; i < 2; ++i) {
      Vec6 d = delta[i].vector();
      adam_step(d, adam[i], grad[i], cfg, iter + 1);
      delta[i] = Twist(d);
    }
  }

  result.iterations_run = cfg.iterations;
  result.converged = trace_converged(result.loss_trace);
  result.refined_poses = {compose(exp(best_delta[0]), init_poses[0]),
                          compose(exp(best_delta[1]), init_poses[1])};
  return result;
}

RegistrationResult fine_register_coupled(
    const Volume& vol, const DetectorGeometry& geom,
    const std::array<Image, 2>& fixed_images, const Pose& init_pose_pa,
    const Pose& t_trans, const RefineConfig& cfg, RenderMode mode,
    int workers) {
  cfg.validate();
  geom.validate();
  for (const auto& img : fixed_images) {
    img.validate();
    if (img.width != geom.detector_width || img.height != geom.detector_height) {
      throw ArgumentError(
          "fine_register_coupled: fixed image does not match detector size");
    }
  }

  RegistrationResult result;
  result.initial_poses = {init_pose_pa, compose(t_trans, init_pose_pa)};
  result.refined_poses = result.initial_poses;
  if (cfg.iterations == 0) {
    return result;
  }

  // Both views follow one shared twist; view 2 rides on view 1's pose.
  const auto view_losses = [&](const Twist& delta) -> std::array<double, 2> {
    const Pose pose1 = compose(exp(delta), init_pose_pa);
    const Pose pose2 = compose(t_trans, pose1);
    const Image r1 = render(vol, geom, pose1, mode, workers);
    const Image r2 = render(vol, geom, pose2, mode, workers);
    return {similarity_loss(fixed_images[0], r1),
            similarity_loss(fixed_images[1], r2)};
  };

  Twist delta;
  Twist best_delta;
  double best_loss = std::numeric_limits<double>::infinity();
  AdamState adam;

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const std::array<double, 2> view_loss = view_losses(delta);
    const std::array<double, 2> view_ncc = {1.0 - view_loss[0],
                                            1.0 - view_loss[1]};
    const std::array<double, 2> weights = assign_view_weights(view_ncc, cfg);

    const double loss = weights[0] * view_loss[0] + weights[1] * view_loss[1];
    if (!std::isfinite(loss)) {
      throw NumericError(
          "fine_register_coupled: non-finite objective at iteration " +
          std::to_string(iter));
    }
    result.loss_trace.push_back(loss);
    result.ncc_traces[0].push_back(view_ncc[0]);
    result.ncc_traces[1].push_back(view_ncc[1]);
    if (loss < best_loss) {
      best_loss = loss;
      best_delta = delta;
    }

    const TwistObjective objective = [&](std::span<const Twist> probe) {
      const std::array<double, 2> losses = view_losses(probe[0]);
      return weights[0] * losses[0] + weights[1] * losses[1];
    };
    const std::vector<Vec6> grad =
        objective_gradient(objective, std::span<const Twist>(&delta, 1),
                           cfg.fd_step);

    Vec6 d = delta.vector();
    adam_step(d, adam, grad[0], cfg, iter + 1);
    delta = Twist(d);
  }

  result.iterations_run = cfg.iterations;
  result.converged = trace_converged(result.loss_trace);
  const Pose refined1 = compose(exp(best_delta), init_pose_pa);
  result.refined_poses = {refined1, compose(t_trans, refined1)};
  return result;
}

}  // namespace mvreg
