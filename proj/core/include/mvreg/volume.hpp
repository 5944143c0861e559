#ifndef MVREG_VOLUME_HPP
#define MVREG_VOLUME_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mvreg/se3.hpp"

namespace mvreg {

/// 3D scalar attenuation grid (1/mm) with spacing/origin metadata; the
/// preoperative CT stand-in. Voxel (i,j,k) occupies the world cell
/// [origin + (i,j,k)*spacing, origin + (i+1,j+1,k+1)*spacing); data is stored
/// x-fastest, then y, then z.
struct Volume {
  std::array<int, 3> dims = {0, 0, 0};
  Vec3 spacing = Vec3::Ones();  // mm/voxel
  Vec3 origin = Vec3::Zero();   // world mm of the voxel (0,0,0) corner
  std::vector<float> data;

  Volume() = default;
  Volume(std::array<int, 3> dims_in, const Vec3& spacing_mm,
         const Vec3& origin_mm);

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * dims[1] + j) * dims[0] + i;
  }

  float& at(int i, int j, int k) { return data[index(i, j, k)]; }
  float at(int i, int j, int k) const { return data[index(i, j, k)]; }

  /// Physical size dims*spacing in mm.
  Vec3 extent() const {
    return Vec3(dims[0] * spacing.x(), dims[1] * spacing.y(),
                dims[2] * spacing.z());
  }

  /// World position of the grid center.
  Vec3 center() const { return origin + 0.5 * extent(); }

  /// World position of the center of voxel (i,j,k).
  Vec3 voxel_center(int i, int j, int k) const {
    return origin + Vec3((i + 0.5) * spacing.x(), (j + 0.5) * spacing.y(),
                         (k + 0.5) * spacing.z());
  }

  /// Nearest-voxel lookup via floor of the world-to-voxel map; points outside
  /// the grid read as zero attenuation.
  double sample_nearest(const Vec3& world) const;

  /// Throws ArgumentError if dims/spacing/data are inconsistent, any value is
  /// non-finite, or any value is negative.
  void validate() const;
};

/// Named 3D points in the CT world frame (mm). Names are unique.
struct LandmarkSet {
  std::vector<std::string> names;
  std::vector<Vec3> points;

  std::size_t size() const { return names.size(); }
  void add(std::string name, const Vec3& p);
  void validate() const;  // equal lengths, N >= 1, unique names
};

}  // namespace mvreg

#endif  // MVREG_VOLUME_HPP
