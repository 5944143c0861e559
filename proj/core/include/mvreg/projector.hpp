#ifndef MVREG_PROJECTOR_HPP
#define MVREG_PROJECTOR_HPP

#include <vector>

#include "mvreg/image.hpp"
#include "mvreg/se3.hpp"
#include "mvreg/volume.hpp"

namespace mvreg {

/// Cone-beam camera intrinsics. The camera frame convention is fixed: the
/// viewing axis is the pose-transformed +z, the detector u axis is +x and the
/// v axis is +y (right-handed). All rays of one pose share the source point
/// at the pose-transformed camera origin.
struct DetectorGeometry {
  double source_to_detector = 1020.0;  // focal length f, mm
  int detector_width = 256;            // pixels
  int detector_height = 256;           // pixels
  double pixel_spacing = 1.4;          // mm/pixel
  Vec2 principal_point = Vec2(127.5, 127.5);  // pixels

  DetectorGeometry() = default;
  DetectorGeometry(double sdd, int width, int height, double spacing_mm);
  DetectorGeometry(double sdd, int width, int height, double spacing_mm,
                   const Vec2& pp);

  void validate() const;
};

/// One X-ray path from the source s to a detector pixel center g (world mm).
struct Ray {
  Vec3 source = Vec3::Zero();
  Vec3 target = Vec3::Zero();
};

/// Ray through the center of detector pixel (u, v) under the given camera
/// pose. Throws ArgumentError for out-of-bounds pixels.
Ray pixel_ray(const DetectorGeometry& geom, const Pose& pose, int u, int v);

/// Sorted, deduplicated parametric positions alpha in [0,1] where
/// s + alpha (g - s) crosses a voxel boundary plane inside the volume box,
/// including the entry and exit alphas. Empty when the ray misses the volume.
std::vector<double> siddon_intersections(const Ray& ray, const Volume& vol);

/// Line integral of attenuation along the ray:
///   |g - s| * sum_m (alpha_{m+1} - alpha_m) * V[midpoint voxel].
/// Zero for rays that miss the volume; out-of-grid midpoints read as zero.
double attenuate(const Ray& ray, const Volume& vol);

/// Transmitted intensity e0 * exp(-e_bar). Requires e_bar >= 0, e0 > 0.
double beer_lambert(double e_bar, double e0);

enum class RenderMode { attenuation, intensity };

/// Renders one DRR: per pixel either the attenuation line integral or the
/// transmitted intensity with unit source energy. Deterministic and
/// independent of the worker count (0 = hardware concurrency).
Image render(const Volume& vol, const DetectorGeometry& geom, const Pose& pose,
             RenderMode mode = RenderMode::intensity, int workers = 0);

/// render at compose(exp(delta), base_pose); the parameterization used by all
/// gradient-based pose refinement.
Image render_at_twist(const Volume& vol, const DetectorGeometry& geom,
                      const Pose& base_pose, const Twist& delta,
                      RenderMode mode = RenderMode::intensity, int workers = 0);

}  // namespace mvreg

#endif  // MVREG_PROJECTOR_HPP
