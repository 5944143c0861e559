#ifndef MVREG_IMAGE_HPP
#define MVREG_IMAGE_HPP

#include <vector>

namespace mvreg {

/// 2D scalar grid, row-major float32. Holds rendered X-rays and fixed
/// intraoperative targets. Immutable by convention once filled.
struct Image {
  int width = 0;
  int height = 0;
  double pixel_spacing = 1.0;  // mm/pixel
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, double spacing_mm);

  std::size_t size() const { return data.size(); }
  float& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
  float at(int u, int v) const {
    return data[static_cast<std::size_t>(v) * width + u];
  }

  bool same_shape(const Image& other) const {
    return width == other.width && height == other.height;
  }

  void validate() const;  // throws ArgumentError on inconsistent state
};

/// Affine rescale to [0, 1]: min maps to 0, max to 1. Idempotent.
/// Throws DegenerateImageError for a constant image.
Image normalize_image(const Image& img);

/// Magnitude of the central-difference intensity gradient (one-sided at the
/// border). Used by the overlay writer as a cheap edge map.
Image gradient_magnitude(const Image& img);

}  // namespace mvreg

#endif  // MVREG_IMAGE_HPP
