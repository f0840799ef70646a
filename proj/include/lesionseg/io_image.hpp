#ifndef LESIONSEG_IO_IMAGE_HPP_
#define LESIONSEG_IO_IMAGE_HPP_

#include <filesystem>

#include "lesionseg/image.hpp"

namespace lesionseg {

// 8-bit RGB (PNG/TIFF/JPEG); grayscale inputs are replicated to 3 channels.
// Values come back as floats in [0,255].
Raster load_image(const std::filesystem::path& file);

// 8-bit single-channel mask, 0/255 → 0/1 (any nonzero counts as 1).
MaskRaster load_mask(const std::filesystem::path& file);

void save_image_8bit(const std::filesystem::path& file, const Raster& r);

// 16-bit PNG for enhanced rasters in [0,1024): stores round(v·64).
void save_image_16bit(const std::filesystem::path& file, const Raster& r,
                      double scale = 64.0);

void save_mask(const std::filesystem::path& file, const MaskRaster& m);

}  // namespace lesionseg

#endif  // LESIONSEG_IO_IMAGE_HPP_
