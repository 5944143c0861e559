#ifndef MVREG_REGISTRATION_HPP
#define MVREG_REGISTRATION_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mvreg/objective.hpp"
#include "mvreg/projector.hpp"
#include "mvreg/se3.hpp"

namespace mvreg {

/// Hyperparameters of the intraoperative fine-registration stage.
struct RefineConfig {
  double lr_rotation = 7e-3;
  double lr_translation = 7.0;
  int iterations = 500;
  double weight_low_ncc = 0.8;   // weight of the view with lower similarity
  double weight_high_ncc = 0.2;  // weight of the view with higher similarity
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double fd_step = 1e-4;
  // When false, the focus is inverted: the better-aligned view receives
  // weight_low_ncc instead.
  bool focus_low_similarity = true;

  void validate() const;  // positive rates/steps, weights summing to 1
};

struct RegistrationResult {
  std::array<Pose, 2> initial_poses;
  std::array<Pose, 2> refined_poses;
  std::vector<double> loss_trace;                 // objective per iteration
  std::array<std::vector<double>, 2> ncc_traces;  // similarity per view
  int iterations_run = 0;
  bool converged = false;
};

/// compose(exp(sample_twist(dist, seed)), true_pose): a controlled stand-in
/// for a coarse pose estimate at a known distance scale from the truth.
Pose init_perturbed(const Pose& true_pose, const TwistDistribution& dist,
                    std::uint64_t rng_seed);

/// Draws n_starts twists around base_pose, renders each candidate, and
/// returns the pose whose render correlates best with the fixed image; ties
/// break toward the lowest sample index.
Pose init_multistart(const Volume& vol, const DetectorGeometry& geom,
                     const Image& fixed_image, const Pose& base_pose,
                     const TwistDistribution& dist, int n_starts,
                     std::uint64_t rng_seed,
                     RenderMode mode = RenderMode::intensity, int workers = 0);

/// Reads a JSON array of pose matrices produced by an external pose
/// estimator. Rotations within 1e-6 of orthonormal are projected onto SO(3)
/// by polar decomposition; anything worse, or any reflection, is an error.
std::vector<Pose> load_external_poses(const std::filesystem::path& path);

/// The per-iteration view weighting: the view with the lower similarity value
/// receives cfg.weight_low_ncc, the other cfg.weight_high_ncc; an exact tie
/// yields 0.5/0.5.
std::array<double, 2> assign_view_weights(const std::array<double, 2>& ncc_values,
                                          const RefineConfig& cfg);

/// Two-view fine registration: optimizes one twist per view (poses
/// parameterized as exp(delta_i) * init_i) with Adam on the weighted
/// image-similarity objective, recomputing per-view similarity and view
/// weights every iteration. Returns the best-objective iterate.
RegistrationResult fine_register(const Volume& vol, const DetectorGeometry& geom,
                                 const std::array<Image, 2>& fixed_images,
                                 const std::array<Pose, 2>& init_poses,
                                 const RefineConfig& cfg,
                                 RenderMode mode = RenderMode::intensity,
                                 int workers = 0);

/// Spatial two-view variant with a fixed inter-view transform: a single
/// shared twist delta is optimized, view 1 at exp(delta) * init_pose_pa and
/// view 2 at t_trans * exp(delta) * init_pose_pa, so the refined poses
/// satisfy pose2 = t_trans * pose1 exactly.
RegistrationResult fine_register_coupled(
    const Volume& vol, const DetectorGeometry& geom,
    const std::array<Image, 2>& fixed_images, const Pose& init_pose_pa,
    const Pose& t_trans, const RefineConfig& cfg,
    RenderMode mode = RenderMode::intensity, int workers = 0);

}  // namespace mvreg

#endif  // MVREG_REGISTRATION_HPP
