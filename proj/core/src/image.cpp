#include "mvreg/image.hpp"

#include <algorithm>
#include <cmath>

#include "mvreg/errors.hpp"

namespace mvreg {

Image::Image(int w, int h, double spacing_mm)
    : width(w), height(h), pixel_spacing(spacing_mm) {
  if (w <= 0 || h <= 0) {
    throw ArgumentError("image dimensions must be positive");
  }
  if (!(spacing_mm > 0.0) || !std::isfinite(spacing_mm)) {
    throw ArgumentError("image pixel spacing must be positive");
  }
  data.assign(static_cast<std::size_t>(w) * h, 0.0f);
}

void Image::validate() const {
  if (width <= 0 || height <= 0) {
    throw ArgumentError("image dimensions must be positive");
  }
  if (!(pixel_spacing > 0.0) || !std::isfinite(pixel_spacing)) {
    throw ArgumentError("image pixel spacing must be positive");
  }
  if (data.size() != static_cast<std::size_t>(width) * height) {
    throw ArgumentError("image data length does not match dimensions");
  }
  for (const float v : data) {
    if (!std::isfinite(v)) {
      throw ArgumentError("image values must be finite");
    }
  }
}

Image normalize_image(const Image& img) {
  img.validate();
  const auto [lo_it, hi_it] = std::minmax_element(img.data.begin(), img.data.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) {
    throw DegenerateImageError("normalize_image: constant image");
  }
  Image out(img.width, img.height, img.pixel_spacing);
  const double inv = 1.0 / (hi - lo);
  for (std::size_t p = 0; p < img.data.size(); ++p) {
    out.data[p] = static_cast<float>((img.data[p] - lo) * inv);
  }
  return out;
}

Image gradient_magnitude(const Image& img) {
  img.validate();
  Image out(img.width, img.height, img.pixel_spacing);
  const int w = img.width;
  const int h = img.height;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const int u0 = std::max(0, u - 1);
      const int u1 = std::min(w - 1, u + 1);
      const int v0 = std::max(0, v - 1);
      const int v1 = std::min(h - 1, v + 1);
      const double gu = (img.at(u1, v) - img.at(u0, v)) / (u1 - u0 == 0 ? 1 : u1 - u0);
      const double gv = (img.at(u, v1) - img.at(u, v0)) / (v1 - v0 == 0 ? 1 : v1 - v0);
      out.at(u, v) = static_cast<float>(std::hypot(gu, gv));
    }
  }
  return out;
}

}  // namespace mvreg
