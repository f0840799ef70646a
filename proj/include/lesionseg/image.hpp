#ifndef LESIONSEG_IMAGE_HPP_
#define LESIONSEG_IMAGE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lesionseg/common.hpp"

namespace lesionseg {

// Planar (channel-major) float raster. Raw images hold [0,255]; enhanced
// images hold [0,1024).
struct Raster {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Raster() = default;
  Raster(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, fill) {}

  bool empty() const { return channels <= 0 || height <= 0 || width <= 0; }
  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }

  float& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

struct MaskRaster {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> data;  // 0/1

  MaskRaster() = default;
  MaskRaster(int h, int w, uint8_t fill = 0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  bool empty() const { return height <= 0 || width <= 0; }
  uint8_t& at(int y, int x) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  uint8_t at(int y, int x) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t count_positive() const {
    std::size_t n = 0;
    for (uint8_t v : data) n += (v != 0);
    return n;
  }
};

enum class HealthLabel { healthy, lesion };

inline const char* to_string(HealthLabel l) {
  return l == HealthLabel::healthy ? "healthy" : "lesion";
}

// Multi-channel raster plus optional lesion mask and image-level label.
// Invariants: mask (when present) matches pixels H×W; a healthy image has an
// absent or all-zero mask.
struct FundusImage {
  Raster pixels;
  std::optional<MaskRaster> mask;
  HealthLabel label = HealthLabel::healthy;
  std::string id;

  void validate() const;
};

// Symmetric (edge-inclusive) reflection: ...cba|abc...|cba...
int reflect_index(int i, int n);

float sample_reflect(const Raster& r, int c, int y, int x);
uint8_t sample_reflect(const MaskRaster& m, int y, int x);

// size×size crop with top-left (top,left); out-of-range samples reflected.
Raster crop_reflect(const Raster& r, int top, int left, int size);
MaskRaster crop_reflect(const MaskRaster& m, int top, int left, int size);

Raster flip_horizontal(const Raster& r);
Raster flip_vertical(const Raster& r);

}  // namespace lesionseg

#endif  // LESIONSEG_IMAGE_HPP_
