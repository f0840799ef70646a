#include "lesionseg/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace lesionseg {

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw ParamError("sigma must be positive");
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[i + radius] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

Raster gaussian_blur(const Raster& src, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const int h = src.height, w = src.width;

  Raster tmp(src.channels, h, w);
  for (int c = 0; c < src.channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[i + radius] * src.at(c, y, reflect_index(x + i, w));
        tmp.at(c, y, x) = static_cast<float>(acc);
      }

  Raster out(src.channels, h, w);
  for (int c = 0; c < src.channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[i + radius] * tmp.at(c, reflect_index(y + i, h), x);
        out.at(c, y, x) = static_cast<float>(acc);
      }
  return out;
}

FundusImage enhance(const FundusImage& image, double sigma) {
  if (!(sigma > 0.0)) throw ParamError("sigma must be positive");
  if (image.pixels.empty()) throw InputError("enhance: empty image");

  const Raster blurred = gaussian_blur(image.pixels, sigma);
  FundusImage out = image;
  for (std::size_t i = 0; i < out.pixels.data.size(); ++i) {
    const double v = 4.0 * image.pixels.data[i] - 4.0 * blurred.data[i] +
                     kEnhanceOffset;
    out.pixels.data[i] = std::clamp(static_cast<float>(v), 0.0f,
                                    std::nextafterf(kEnhanceCeiling, 0.0f));
  }
  return out;
}

namespace {

Raster pad_even_reflect(const Raster& r) {
  const int h = r.height + (r.height % 2);
  const int w = r.width + (r.width % 2);
  if (h == r.height && w == r.width) return r;
  Raster out(r.channels, h, w);
  for (int c = 0; c < r.channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(c, y, x) = sample_reflect(r, c, y, x);
  return out;
}

MaskRaster pad_even_reflect(const MaskRaster& m) {
  const int h = m.height + (m.height % 2);
  const int w = m.width + (m.width % 2);
  if (h == m.height && w == m.width) return m;
  MaskRaster out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(y, x) = sample_reflect(m, y, x);
  return out;
}

}  // namespace

FundusImage downsample_half(const FundusImage& image,
                            std::pair<int, int>* padded) {
  if (image.pixels.empty()) throw InputError("downsample_half: empty image");
  if (padded) *padded = {image.pixels.height % 2, image.pixels.width % 2};

  const Raster src = pad_even_reflect(image.pixels);
  FundusImage out;
  out.label = image.label;
  out.id = image.id;
  out.pixels = Raster(src.channels, src.height / 2, src.width / 2);
  for (int c = 0; c < src.channels; ++c)
    for (int y = 0; y < out.pixels.height; ++y)
      for (int x = 0; x < out.pixels.width; ++x)
        out.pixels.at(c, y, x) =
            0.25f * (src.at(c, 2 * y, 2 * x) + src.at(c, 2 * y, 2 * x + 1) +
                     src.at(c, 2 * y + 1, 2 * x) +
                     src.at(c, 2 * y + 1, 2 * x + 1));

  if (image.mask) {
    const MaskRaster msk = pad_even_reflect(*image.mask);
    MaskRaster half(msk.height / 2, msk.width / 2);
    for (int y = 0; y < half.height; ++y)
      for (int x = 0; x < half.width; ++x)
        half.at(y, x) = std::max(
            std::max(msk.at(2 * y, 2 * x), msk.at(2 * y, 2 * x + 1)),
            std::max(msk.at(2 * y + 1, 2 * x), msk.at(2 * y + 1, 2 * x + 1)));
    out.mask = std::move(half);
  }
  return out;
}

}  // namespace lesionseg
