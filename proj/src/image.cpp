#include "lesionseg/image.hpp"

namespace lesionseg {

void FundusImage::validate() const {
  if (pixels.empty()) throw InputError("empty image '" + id + "'");
  if (mask) {
    if (mask->height != pixels.height || mask->width != pixels.width)
      throw InputError("mask dimensions do not match pixels for '" + id + "'");
    if (label == HealthLabel::healthy && mask->count_positive() != 0)
      throw InputError("healthy image '" + id + "' has a nonzero mask");
  }
}

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -1 - i;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

float sample_reflect(const Raster& r, int c, int y, int x) {
  return r.at(c, reflect_index(y, r.height), reflect_index(x, r.width));
}

uint8_t sample_reflect(const MaskRaster& m, int y, int x) {
  return m.at(reflect_index(y, m.height), reflect_index(x, m.width));
}

Raster crop_reflect(const Raster& r, int top, int left, int size) {
  Raster out(r.channels, size, size);
  for (int c = 0; c < r.channels; ++c)
    for (int y = 0; y < size; ++y) {
      const int sy = reflect_index(top + y, r.height);
      for (int x = 0; x < size; ++x)
        out.at(c, y, x) = r.at(c, sy, reflect_index(left + x, r.width));
    }
  return out;
}

MaskRaster crop_reflect(const MaskRaster& m, int top, int left, int size) {
  MaskRaster out(size, size);
  for (int y = 0; y < size; ++y) {
    const int sy = reflect_index(top + y, m.height);
    for (int x = 0; x < size; ++x)
      out.at(y, x) = m.at(sy, reflect_index(left + x, m.width));
  }
  return out;
}

Raster flip_horizontal(const Raster& r) {
  Raster out(r.channels, r.height, r.width);
  for (int c = 0; c < r.channels; ++c)
    for (int y = 0; y < r.height; ++y)
      for (int x = 0; x < r.width; ++x)
        out.at(c, y, x) = r.at(c, y, r.width - 1 - x);
  return out;
}

Raster flip_vertical(const Raster& r) {
  Raster out(r.channels, r.height, r.width);
  for (int c = 0; c < r.channels; ++c)
    for (int y = 0; y < r.height; ++y)
      for (int x = 0; x < r.width; ++x)
        out.at(c, y, x) = r.at(c, r.height - 1 - y, x);
  return out;
}

uint64_t fnv1a64(const void* data, std::size_t n, uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

}  // namespace lesionseg
