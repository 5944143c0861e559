#include "mvreg/phantom.hpp"

#include <cmath>

#include "mvreg/errors.hpp"
#include "mvreg/parallel.hpp"
#include "mvreg/rng.hpp"

namespace mvreg {

PhantomKind phantom_kind_from_string(const std::string& name) {
  if (name == "sphere_pair") return PhantomKind::sphere_pair;
  if (name == "nested_boxes") return PhantomKind::nested_boxes;
  if (name == "pelvis_like") return PhantomKind::pelvis_like;
  throw ArgumentError("unknown phantom kind: " + name);
}

std::string to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::sphere_pair: return "sphere_pair";
    case PhantomKind::nested_boxes: return "nested_boxes";
    case PhantomKind::pelvis_like: return "pelvis_like";
  }
  throw ArgumentError("invalid phantom kind value");
}

namespace {

constexpr double kBackgroundMu = 0.015;  // soft-tissue-like, 1/mm

struct Sphere {
  Vec3 center;
  double radius;
  double delta_mu;  // added inside (may be negative for cavities)
};

struct Box {
  Vec3 center;
  Vec3 half;
  double delta_mu;
};

/// Uniform jitter in [-amount, amount]^3, deterministic per (seed, slot).
Vec3 jitter(std::uint64_t seed, std::uint64_t slot, double amount) {
  Vec3 j;
  for (int d = 0; d < 3; ++d) {
    const double u = rng::uniform01(seed, rng::kStreamPhantom, slot * 3 + d);
    j[d] = amount * (2.0 * u - 1.0);
  }
  return j;
}

void fill(Volume& vol, const std::vector<Sphere>& spheres,
          const std::vector<Box>& boxes) {
  parallel_for(vol.dims[2], 0, [&](std::int64_t k) {
    for (int j = 0; j < vol.dims[1]; ++j) {
      for (int i = 0; i < vol.dims[0]; ++i) {
        const Vec3 p = vol.voxel_center(i, static_cast<int>(j), static_cast<int>(k));
        double mu = kBackgroundMu;
        for (const auto& s : spheres) {
          if ((p - s.center).squaredNorm() <= s.radius * s.radius) {
            mu += s.delta_mu;
          }
        }
        for (const auto& b : boxes) {
          const Vec3 d = (p - b.center).cwiseAbs();
          if (d.x() <= b.half.x() && d.y() <= b.half.y() && d.z() <= b.half.z()) {
            mu += b.delta_mu;
          }
        }
        vol.at(i, j, static_cast<int>(k)) = static_cast<float>(std::max(0.0, mu));
      }
    }
  });
}

}  // namespace

std::pair<Volume, LandmarkSet> make_phantom(PhantomKind kind,
                                            std::array<int, 3> dims,
                                            const Vec3& spacing,
                                            std::uint64_t rng_seed) {
  for (int d = 0; d < 3; ++d) {
    if (dims[d] < 16) {
      throw ArgumentError("phantom dims must be >= 16 per axis");
    }
  }
  if ((spacing.array() <= 0.0).any()) {
    throw ArgumentError("phantom spacing must be positive");
  }

  const Vec3 extent(dims[0] * spacing.x(), dims[1] * spacing.y(),
                    dims[2] * spacing.z());
  // Grid centered on the world origin.
  Volume vol(dims, spacing, -0.5 * extent);
  const double scale = extent.minCoeff();

  std::vector<Sphere> spheres;
  std::vector<Box> boxes;
  LandmarkSet marks;

  switch (kind) {
    case PhantomKind::sphere_pair: {
      const Vec3 ca =
          Vec3(-0.15 * extent.x(), -0.10 * extent.y(), 0.08 * extent.z()) +
          jitter(rng_seed, 0, 0.02 * scale);
      const Vec3 cb =
          Vec3(0.18 * extent.x(), 0.12 * extent.y(), -0.10 * extent.z()) +
          jitter(rng_seed, 1, 0.02 * scale);
      const Vec3 cm =
          Vec3(0.05 * extent.x(), -0.20 * extent.y(), -0.22 * extent.z()) +
          jitter(rng_seed, 2, 0.02 * scale);
      const double ra = 0.22 * scale;
      const double rb = 0.13 * scale;
      const double rm = 0.05 * scale;
      spheres = {{ca, ra, 0.012}, {cb, rb, 0.025}, {cm, rm, 0.045}};
      marks.add("center_a", ca);
      marks.add("center_b", cb);
      marks.add("center_marker", cm);
      marks.add("a_surface_x", ca + Vec3(ra, 0, 0));
      marks.add("a_surface_z", ca + Vec3(0, 0, ra));
      marks.add("b_surface_y", cb + Vec3(0, rb, 0));
      marks.add("ab_midpoint", 0.5 * (ca + cb));
      break;
    }
    case PhantomKind::nested_boxes: {
      const Vec3 outer_c = jitter(rng_seed, 0, 0.01 * scale);
      const Vec3 outer_h = 0.40 * extent;
      const Vec3 inner_c =
          Vec3(0.08 * extent.x(), -0.06 * extent.y(), 0.04 * extent.z()) +
          jitter(rng_seed, 1, 0.02 * scale);
      const Vec3 inner_h(0.20 * extent.x(), 0.16 * extent.y(),
                         0.22 * extent.z());
      const Vec3 rod_c =
          Vec3(0.26 * extent.x(), 0.22 * extent.y(), 0.0) +
          jitter(rng_seed, 2, 0.01 * scale);
      const Vec3 rod_h(0.04 * scale, 0.04 * scale, 0.30 * extent.z());
      boxes = {{outer_c, outer_h, 0.010},
               {inner_c, inner_h, 0.020},
               {rod_c, rod_h, 0.040}};
      marks.add("outer_min_corner", outer_c - outer_h);
      marks.add("outer_max_corner", outer_c + outer_h);
      marks.add("inner_center", inner_c);
      marks.add("inner_min_corner", inner_c - inner_h);
      marks.add("rod_top", rod_c + Vec3(0, 0, rod_h.z()));
      marks.add("rod_bottom", rod_c - Vec3(0, 0, rod_h.z()));
      marks.add("volume_center", outer_c);
      break;
    }
    case PhantomKind::pelvis_like: {
      // A loose pelvic arrangement: central block, two lateral wings, two
      // dense femoral-head spheres, two low-attenuation foramina, and one
      // small dense anterior marker. Sizes differ left/right so no mirror
      // symmetry survives.
      const Vec3 sacrum_c =
          Vec3(0.0, 0.10 * extent.y(), 0.0) + jitter(rng_seed, 0, 0.02 * scale);
      const Vec3 lw_c =
          Vec3(-0.24 * extent.x(), 0.0, 0.10 * extent.z()) +
          jitter(rng_seed, 1, 0.02 * scale);
      const Vec3 rw_c =
          Vec3(0.24 * extent.x(), 0.02 * extent.y(), 0.08 * extent.z()) +
          jitter(rng_seed, 2, 0.02 * scale);
      const Vec3 lfh_c =
          Vec3(-0.26 * extent.x(), -0.05 * extent.y(), -0.20 * extent.z()) +
          jitter(rng_seed, 3, 0.02 * scale);
      const Vec3 rfh_c =
          Vec3(0.26 * extent.x(), -0.05 * extent.y(), -0.20 * extent.z()) +
          jitter(rng_seed, 4, 0.02 * scale);
      const Vec3 lfo_c =
          Vec3(-0.12 * extent.x(), -0.02 * extent.y(), -0.08 * extent.z()) +
          jitter(rng_seed, 5, 0.02 * scale);
      const Vec3 rfo_c =
          Vec3(0.12 * extent.x(), -0.02 * extent.y(), -0.08 * extent.z()) +
          jitter(rng_seed, 6, 0.02 * scale);
      const Vec3 pub_c =
          Vec3(0.0, -0.18 * extent.y(), -0.12 * extent.z()) +
          jitter(rng_seed, 7, 0.02 * scale);
      boxes = {{sacrum_c, Vec3(0.14, 0.10, 0.18).cwiseProduct(extent), 0.020},
               {lw_c, Vec3(0.10, 0.15, 0.16).cwiseProduct(extent), 0.018},
               {rw_c, Vec3(0.09, 0.16, 0.14).cwiseProduct(extent), 0.022}};
      spheres = {{lfh_c, 0.10 * scale, 0.030},
                 {rfh_c, 0.085 * scale, 0.030},
                 {lfo_c, 0.06 * scale, -0.008},
                 {rfo_c, 0.05 * scale, -0.008},
                 {pub_c, 0.035 * scale, 0.040}};
      marks.add("l_femoral_head", lfh_c);
      marks.add("r_femoral_head", rfh_c);
      marks.add("l_wing_center", lw_c);
      marks.add("r_wing_center", rw_c);
      marks.add("l_foramen", lfo_c);
      marks.add("r_foramen", rfo_c);
      marks.add("pubic_marker", pub_c);
      marks.add("sacrum_center", sacrum_c);
      break;
    }
  }

  fill(vol, spheres, boxes);
  marks.validate();
  vol.validate();
  return {std::move(vol), std::move(marks)};
}

}  // namespace mvreg
