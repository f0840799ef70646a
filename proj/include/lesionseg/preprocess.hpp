#ifndef LESIONSEG_PREPROCESS_HPP_
#define LESIONSEG_PREPROCESS_HPP_

#include "lesionseg/image.hpp"

namespace lesionseg {

// I_pre = 4·I − 4·G_σ∗I + 1024/30, then clamped to [0, 1024).
inline constexpr double kEnhanceOffset = 1024.0 / 30.0;
inline constexpr float kEnhanceCeiling = 1024.0f;

// Normalized 1-D Gaussian, truncated at 4σ (odd length 2·ceil(4σ)+1).
std::vector<double> gaussian_kernel(double sigma);

// Separable Gaussian blur with symmetric-reflection borders, applied per
// channel. Accumulation in double.
Raster gaussian_blur(const Raster& src, double sigma);

// Contrast enhancement. Mask and label pass through unchanged.
FundusImage enhance(const FundusImage& image, double sigma);

// Halve resolution: pixels by 2×2 area averaging, mask by 2×2 max (a lesion
// pixel survives). Odd dimensions are reflection-padded to even first; the
// amount of padding applied is reported through `padded` when non-null.
FundusImage downsample_half(const FundusImage& image,
                            std::pair<int, int>* padded = nullptr);

}  // namespace lesionseg

#endif  // LESIONSEG_PREPROCESS_HPP_
