#ifndef MVREG_IO_HPP
#define MVREG_IO_HPP

#include <filesystem>

#include "mvreg/image.hpp"
#include "mvreg/volume.hpp"

namespace mvreg {

// Volumes and images are stored as a JSON sidecar plus a raw little-endian
// float32 payload:
//   <name>.vol.json  {"dims":[3 ints],"spacing":[3],"origin":[3],"dtype":"f32le"}
//   <name>.vol.raw   x-fastest, then y, then z
//   <name>.img.json  {"width","height","pixel_spacing","dtype":"f32le"}
//   <name>.img.raw   row-major
// Load functions accept either the sidecar path or the bare <name> prefix.
// Roundtrips are bit-exact. All failures throw DataError.

void save_volume(const std::filesystem::path& prefix_or_sidecar,
                 const Volume& vol);
Volume load_volume(const std::filesystem::path& prefix_or_sidecar);

void save_image(const std::filesystem::path& prefix_or_sidecar,
                const Image& img);
Image load_image(const std::filesystem::path& prefix_or_sidecar);

/// Landmarks as JSON: {"names":[...],"points":[[x,y,z],...]}.
void save_landmarks(const std::filesystem::path& path, const LandmarkSet& marks);
LandmarkSet load_landmarks(const std::filesystem::path& path);

/// 16-bit binary PGM for visual inspection; values are clamped to [0,1] and
/// scaled to [0,65535].
void save_pgm(const std::filesystem::path& path, const Image& img);

}  // namespace mvreg

#endif  // MVREG_IO_HPP
