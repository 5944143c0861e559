#include "mvreg/volume.hpp"

#include <cmath>
#include <set>

#include "mvreg/errors.hpp"

namespace mvreg {

Volume::Volume(std::array<int, 3> dims_in, const Vec3& spacing_mm,
               const Vec3& origin_mm)
    : dims(dims_in), spacing(spacing_mm), origin(origin_mm) {
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) {
    throw ArgumentError("volume dims must be positive");
  }
  if ((spacing.array() <= 0.0).any()) {
    throw ArgumentError("volume spacing must be positive");
  }
  data.assign(voxel_count(), 0.0f);
}

double Volume::sample_nearest(const Vec3& world) const {
  const Vec3 rel = world - origin;
  const int i = static_cast<int>(std::floor(rel.x() / spacing.x()));
  const int j = static_cast<int>(std::floor(rel.y() / spacing.y()));
  const int k = static_cast<int>(std::floor(rel.z() / spacing.z()));
  if (i < 0 || j < 0 || k < 0 || i >= dims[0] || j >= dims[1] || k >= dims[2]) {
    return 0.0;
  }
  return at(i, j, k);
}

void Volume::validate() const {
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) {
    throw ArgumentError("volume dims must be positive");
  }
  if ((spacing.array() <= 0.0).any() || !spacing.allFinite()) {
    throw ArgumentError("volume spacing must be positive and finite");
  }
  if (!origin.allFinite()) {
    throw ArgumentError("volume origin must be finite");
  }
  if (data.size() != voxel_count()) {
    throw ArgumentError("volume data length does not match dims");
  }
  for (const float v : data) {
    if (!std::isfinite(v) || v < 0.0f) {
      throw ArgumentError("volume values must be finite and non-negative");
    }
  }
}

void LandmarkSet::add(std::string name, const Vec3& p) {
  names.push_back(std::move(name));
  points.push_back(p);
}

void LandmarkSet::validate() const {
  if (names.size() != points.size()) {
    throw ArgumentError("landmark names/points length mismatch");
  }
  if (names.empty()) {
    throw ArgumentError("landmark set must contain at least one point");
  }
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) {
      throw ArgumentError("duplicate landmark name: " + n);
    }
  }
  for (const auto& p : points) {
    if (!p.allFinite()) {
      throw ArgumentError("landmark coordinates must be finite");
    }
  }
}

}  // namespace mvreg
