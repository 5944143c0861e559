#include "mvreg/projector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvreg/errors.hpp"
#include "mvreg/parallel.hpp"

namespace mvreg {

DetectorGeometry::DetectorGeometry(double sdd, int width, int height,
                                   double spacing_mm)
    : DetectorGeometry(sdd, width, height, spacing_mm,
                       Vec2(0.5 * (width - 1), 0.5 * (height - 1))) {}

DetectorGeometry::DetectorGeometry(double sdd, int width, int height,
                                   double spacing_mm, const Vec2& pp)
    : source_to_detector(sdd),
      detector_width(width),
      detector_height(height),
      pixel_spacing(spacing_mm),
      principal_point(pp) {
  validate();
}

void DetectorGeometry::validate() const {
  if (!(source_to_detector > 0.0) || !std::isfinite(source_to_detector)) {
    throw ArgumentError("detector geometry: source_to_detector must be > 0");
  }
  if (detector_width <= 0 || detector_height <= 0) {
    throw ArgumentError("detector geometry: detector size must be positive");
  }
  if (!(pixel_spacing > 0.0) || !std::isfinite(pixel_spacing)) {
    throw ArgumentError("detector geometry: pixel spacing must be > 0");
  }
  if (!principal_point.allFinite() || principal_point.x() < 0.0 ||
      principal_point.y() < 0.0 || principal_point.x() > detector_width - 1 ||
      principal_point.y() > detector_height - 1) {
    throw ArgumentError(
        "detector geometry: principal point must lie within detector bounds");
  }
}

namespace {

/// Shared by pixel_ray and render so both build bit-identical rays.
inline Ray pixel_ray_unchecked(const DetectorGeometry& geom, const Pose& pose,
                               int u, int v) {
  const Vec3 target_cam(
      geom.pixel_spacing * (u - geom.principal_point.x()),
      geom.pixel_spacing * (v - geom.principal_point.y()),
      geom.source_to_detector);
  return Ray{pose.translation, pose.apply(target_cam)};
}

}  // namespace

Ray pixel_ray(const DetectorGeometry& geom, const Pose& pose, int u, int v) {
  geom.validate();
  if (u < 0 || v < 0 || u >= geom.detector_width || v >= geom.detector_height) {
    throw ArgumentError("pixel_ray: pixel outside detector bounds");
  }
  return pixel_ray_unchecked(geom, pose, u, v);
}

namespace {

struct ClipResult {
  bool hit = false;
  double alpha_in = 0.0;
  double alpha_out = 0.0;
};

/// Slab clip of the ray segment [0,1] against the volume box. Axes with zero
/// direction are handled by a containment check, so no division by zero
/// occurs.
ClipResult clip_to_volume(const Vec3& s, const Vec3& d, const Volume& vol) {
  double a0 = 0.0;
  double a1 = 1.0;
  const Vec3 lo = vol.origin;
  const Vec3 hi = vol.origin + vol.extent();
  for (int ax = 0; ax < 3; ++ax) {
    if (d[ax] == 0.0) {
      if (s[ax] < lo[ax] || s[ax] > hi[ax]) return {};
      continue;
    }
    double ta = (lo[ax] - s[ax]) / d[ax];
    double tb = (hi[ax] - s[ax]) / d[ax];
    if (ta > tb) std::swap(ta, tb);
    a0 = std::max(a0, ta);
    a1 = std::min(a1, tb);
    if (a0 > a1) return {};
  }
  return {true, a0, a1};
}

}  // namespace

std::vector<double> siddon_intersections(const Ray& ray, const Volume& vol) {
  const Vec3 s = ray.source;
  const Vec3 d = ray.target - ray.source;
  if (d.norm() == 0.0) {
    throw ArgumentError("siddon_intersections: zero-length ray");
  }
  const ClipResult clip = clip_to_volume(s, d, vol);
  if (!clip.hit || clip.alpha_out <= clip.alpha_in) return {};

  std::vector<double> alphas;
  alphas.push_back(clip.alpha_in);
  alphas.push_back(clip.alpha_out);
  for (int ax = 0; ax < 3; ++ax) {
    if (d[ax] == 0.0) continue;  // rays parallel to this plane family
    const double inv = 1.0 / d[ax];
    // Plane k sits at origin + k*spacing; keep crossings inside the window.
    const double pos_in = (s[ax] + clip.alpha_in * d[ax] - vol.origin[ax]) /
                          vol.spacing[ax];
    const double pos_out = (s[ax] + clip.alpha_out * d[ax] - vol.origin[ax]) /
                           vol.spacing[ax];
    const int k_lo = static_cast<int>(std::ceil(std::min(pos_in, pos_out)));
    const int k_hi = static_cast<int>(std::floor(std::max(pos_in, pos_out)));
    for (int k = std::max(0, k_lo); k <= std::min(vol.dims[ax], k_hi); ++k) {
      const double alpha =
          (vol.origin[ax] + k * vol.spacing[ax] - s[ax]) * inv;
      if (alpha >= clip.alpha_in && alpha <= clip.alpha_out) {
        alphas.push_back(alpha);
      }
    }
  }
  std::sort(alphas.begin(), alphas.end());
  // Drop duplicates (corner/edge crossings and the entry/exit planes).
  std::vector<double> unique;
  unique.reserve(alphas.size());
  for (const double a : alphas) {
    if (unique.empty() || a - unique.back() > 1e-12) {
      unique.push_back(a);
    }
  }
  return unique;
}

double attenuate(const Ray& ray, const Volume& vol) {
  const Vec3 s = ray.source;
  const Vec3 d = ray.target - ray.source;
  const double length = d.norm();
  if (length == 0.0) {
    throw ArgumentError("attenuate: zero-length ray");
  }
  const ClipResult clip = clip_to_volume(s, d, vol);
  if (!clip.hit || clip.alpha_out <= clip.alpha_in) return 0.0;

  // Incremental traversal over the same boundary set the crossing
  // enumeration produces: track the voxel index and the next crossing alpha
  // per axis, always stepping to the nearest one.
  int idx[3];
  double next_alpha[3];
  double delta_alpha[3];
  int step[3];
  std::ptrdiff_t stride[3] = {1, vol.dims[0],
                              static_cast<std::ptrdiff_t>(vol.dims[0]) *
                                  vol.dims[1]};
  const Vec3 entry = s + clip.alpha_in * d;
  for (int ax = 0; ax < 3; ++ax) {
    double pos = (entry[ax] - vol.origin[ax]) / vol.spacing[ax];
    int i = static_cast<int>(std::floor(pos));
    i = std::max(0, std::min(vol.dims[ax] - 1, i));
    idx[ax] = i;
    if (d[ax] > 0.0) {
      step[ax] = 1;
      delta_alpha[ax] = vol.spacing[ax] / d[ax];
      next_alpha[ax] =
          (vol.origin[ax] + (i + 1) * vol.spacing[ax] - s[ax]) / d[ax];
    } else if (d[ax] < 0.0) {
      step[ax] = -1;
      delta_alpha[ax] = -vol.spacing[ax] / d[ax];
      next_alpha[ax] = (vol.origin[ax] + i * vol.spacing[ax] - s[ax]) / d[ax];
    } else {
      step[ax] = 0;
      delta_alpha[ax] = 0.0;
      next_alpha[ax] = std::numeric_limits<double>::infinity();
    }
    // Entry exactly on a boundary we are moving away from: advance once.
    if (step[ax] != 0 && next_alpha[ax] <= clip.alpha_in) {
      next_alpha[ax] += delta_alpha[ax];
      idx[ax] += step[ax];
      if (idx[ax] < 0 || idx[ax] >= vol.dims[ax]) return 0.0;
    }
  }

  const float* grid = vol.data.data();
  std::ptrdiff_t flat = idx[0] * stride[0] + idx[1] * stride[1] +
                        idx[2] * stride[2];
  double alpha = clip.alpha_in;
  double acc = 0.0;
  while (alpha < clip.alpha_out) {
    double a_next = std::min(
        clip.alpha_out,
        std::min(next_alpha[0], std::min(next_alpha[1], next_alpha[2])));
    if (a_next > alpha) {
      acc += (a_next - alpha) * grid[flat];
    }
    if (a_next >= clip.alpha_out) break;
    bool out = false;
    for (int ax = 0; ax < 3; ++ax) {
      if (next_alpha[ax] == a_next) {
        idx[ax] += step[ax];
        flat += step[ax] * stride[ax];
        next_alpha[ax] += delta_alpha[ax];
        if (idx[ax] < 0 || idx[ax] >= vol.dims[ax]) out = true;
      }
    }
    alpha = a_next;
    if (out) break;
  }
  return length * acc;
}

double beer_lambert(double e_bar, double e0) {
  if (!(e_bar >= 0.0)) {
    throw ArgumentError("beer_lambert: accumulated attenuation must be >= 0");
  }
  if (!(e0 > 0.0)) {
    throw ArgumentError("beer_lambert: source energy must be > 0");
  }
  return e0 * std::exp(-e_bar);
}

Image render(const Volume& vol, const DetectorGeometry& geom, const Pose& pose,
             RenderMode mode, int workers) {
  geom.validate();
  Image img(geom.detector_width, geom.detector_height, geom.pixel_spacing);

  parallel_for(geom.detector_height, workers, [&](std::int64_t v) {
    float* out = img.data.data() + v * geom.detector_width;
    for (int u = 0; u < geom.detector_width; ++u) {
      const Ray ray = pixel_ray_unchecked(geom, pose, u, static_cast<int>(v));
      const double e_bar = attenuate(ray, vol);
      out[u] = static_cast<float>(
          mode == RenderMode::attenuation ? e_bar : std::exp(-e_bar));
    }
  });
  return img;
}

Image render_at_twist(const Volume& vol, const DetectorGeometry& geom,
                      const Pose& base_pose, const Twist& delta,
                      RenderMode mode, int workers) {
  return render(vol, geom, compose(exp(delta), base_pose), mode, workers);
}

}  // namespace mvreg
