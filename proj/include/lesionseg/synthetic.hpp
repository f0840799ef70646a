#ifndef LESIONSEG_SYNTHETIC_HPP_
#define LESIONSEG_SYNTHETIC_HPP_

#include "lesionseg/dataset.hpp"

namespace lesionseg {

// Desk-scale synthetic fundus look-alikes: bright textured background, dark
// curvilinear vessels, large hemorrhage-like blobs (distractors, never in the
// mask) and — on lesion images only — small dark microaneurysm-like blobs
// that the mask marks exactly.
struct SynthConfig {
  int image_size = 256;

  int train_healthy = 30;
  int train_lesion = 30;
  int val_healthy = 5;
  int val_lesion = 5;
  int test_healthy = 10;
  int test_lesion = 10;

  int lesions_min = 3;
  int lesions_max = 8;
  double lesion_radius_min = 2.0;
  double lesion_radius_max = 6.0;

  int vessel_count = 6;
  double vessel_width_bound = 8.0;  // lesions must stay smaller than this

  int hemorrhage_count = 2;
  double hemorrhage_radius_min = 9.0;
  double hemorrhage_radius_max = 16.0;

  double noise_sigma = 3.0;

  void validate() const;
};

struct SynthDataset {
  std::vector<FundusImage> images;  // raw [0,255] pixel scale
  DatasetSplit split;
};

// Deterministic for a given seed: every image draws from a stream derived
// from (seed, image id), so results do not depend on generation order.
SynthDataset generate_synthetic(const SynthConfig& config, uint64_t seed);

// Single raw image (and mask when lesion_count > 0) — used by tests that
// need standalone rasters.
FundusImage generate_synthetic_image(const SynthConfig& config,
                                     const std::string& id, int lesion_count,
                                     Rng& rng);

}  // namespace lesionseg

#endif  // LESIONSEG_SYNTHETIC_HPP_
