#ifndef MVREG_PHANTOM_HPP
#define MVREG_PHANTOM_HPP

#include <cstdint>
#include <string>
#include <utility>

#include "mvreg/volume.hpp"

namespace mvreg {

enum class PhantomKind { sphere_pair, nested_boxes, pelvis_like };

PhantomKind phantom_kind_from_string(const std::string& name);
std::string to_string(PhantomKind kind);

/// Builds a deterministic synthetic attenuation phantom (values in 1/mm)
/// centered on the world origin, together with at least seven named landmarks
/// at the exact world coordinates used during construction. The structures
/// are placed asymmetrically so that rigid pose changes, including the
/// PA-to-LAT rotation, change the rendered projections. The seed jitters
/// structure placement slightly; identical seeds give identical volumes.
/// Requires dims >= 16 per axis.
std::pair<Volume, LandmarkSet> make_phantom(PhantomKind kind,
                                            std::array<int, 3> dims,
                                            const Vec3& spacing,
                                            std::uint64_t rng_seed);

}  // namespace mvreg

#endif  // MVREG_PHANTOM_HPP
