#ifndef MVREG_PIPELINE_HPP
#define MVREG_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvreg/evaluation.hpp"
#include "mvreg/phantom.hpp"
#include "mvreg/projector.hpp"
#include "mvreg/registration.hpp"
#include "mvreg/se3.hpp"

namespace mvreg {

enum class ExperimentMode {
  temporal,  // two independently perturbed views near the base pose
  spatial,   // PA plus LAT through a fixed inter-view transform
};

struct PhantomSpec {
  PhantomKind kind = PhantomKind::sphere_pair;
  std::array<int, 3> dims = {64, 64, 64};
  Vec3 spacing = Vec3::Ones();
  std::uint64_t seed = 1;
};

struct InitializerSpec {
  enum class Type { exact, perturbed, multistart, external };
  Type type = Type::perturbed;
  Vec6 stddev = Vec6::Ones();  // perturbed/multistart dispersion
  int n_starts = 16;           // multistart only
  std::string path;            // external only: 2*n_cases poses
};

/// Full description of one synthetic registration study.
struct ExperimentSpec {
  PhantomSpec phantom;
  DetectorGeometry geometry;
  // Camera placed this far in front of the volume center, looking along +y
  // with the detector u axis on world +x, unless an explicit pose is given.
  double source_to_center = 200.0;
  std::optional<Pose> base_pose;
  TwistDistribution case_distribution;
  ExperimentMode mode = ExperimentMode::temporal;
  double theta = M_PI / 2;  // spatial inter-view rotation angle
  int n_cases = 1;
  InitializerSpec initializer;
  RefineConfig refine;
  RenderMode render_mode = RenderMode::intensity;
  std::optional<double> lambda;  // defaults to geometry.pixel_spacing
  std::uint64_t rng_seed = 0;

  void validate() const;
  double effective_lambda() const {
    return lambda ? *lambda : geometry.pixel_spacing;
  }
};

ExperimentSpec load_experiment_spec(const std::filesystem::path& path);
void save_experiment_spec(const std::filesystem::path& path,
                          const ExperimentSpec& spec);

/// The canonical postero-anterior camera pose for a volume centered at
/// `volume_center`: source `distance` mm anterior of the center, viewing
/// axis along world +y, detector u on +x and v on -z.
Pose make_pa_pose(const Vec3& volume_center, double distance);

/// One synthetic registration case: ground-truth poses, their renders, and
/// (temporal mode) the sampled inter-view twist.
struct ExperimentCase {
  std::array<Pose, 2> true_poses;
  std::array<Image, 2> fixed_images;
  std::optional<Twist> eps;
};

/// Deterministically generates the per-case poses and fixed images.
/// Temporal mode samples eps1 and eps (variance-doubled) per case with
/// eps2 = eps1 + eps; spatial mode samples one shared twist and places the
/// second view through the center-of-volume inter-view rotation. Per-case
/// seeds derive as rng_seed xor case index.
std::vector<ExperimentCase> generate_cases(const ExperimentSpec& spec,
                                           const Volume& vol);

struct CaseOutcome {
  int id = 0;
  bool failed = false;
  std::string message;
  double mtre_before_mm = 0.0;
  double mtre_after_mm = 0.0;
  bool converged = false;
  int iterations_run = 0;
  std::array<double, 2> initial_ncc = {0.0, 0.0};
  std::array<double, 2> final_ncc = {0.0, 0.0};
  std::array<Pose, 2> initial_poses;
  std::array<Pose, 2> refined_poses;
};

struct ExperimentReport {
  ExperimentMode mode = ExperimentMode::temporal;
  int n_cases = 0;
  int failures = 0;
  double lambda = 0.0;
  MetricReport before;  // failed cases excluded
  MetricReport after;
  std::vector<CaseOutcome> cases;
};

/// Runs the study end to end: generate, initialize, refine (per-mode
/// optimizer), score mtre before/after, aggregate. A case failure is
/// recorded and excluded from the aggregates, never silently dropped.
/// Cases run in parallel across `workers`; results are byte-identical for
/// any worker count.
ExperimentReport run_experiment(const ExperimentSpec& spec, int workers = 0);

void save_experiment_report(const std::filesystem::path& path,
                            const ExperimentReport& report);

/// Per-case visual check: 0.5/0.5 blend of the normalized fixed image with
/// the normalized render at the estimated pose, plus a gradient-magnitude
/// edge overlay, written as 16-bit PGM files with the given prefix.
void write_case_overlay(const std::filesystem::path& prefix, const Image& fixed,
                        const Image& estimated_render);

}  // namespace mvreg

#endif  // MVREG_PIPELINE_HPP
