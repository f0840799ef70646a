#ifndef LESIONSEG_DATASET_HPP_
#define LESIONSEG_DATASET_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "lesionseg/image.hpp"

namespace lesionseg {

enum class ScaleTag { x1, x05 };

inline const char* to_string(ScaleTag s) { return s == ScaleTag::x1 ? "1x" : "0.5x"; }

// Fixed-size crop around a source-image coordinate.
// Invariants: label=lesion ⇒ source mask at `center` is 1;
// label=healthy ⇒ the source image is healthy (unless negatives from lesion
// images were explicitly enabled).
struct PatchSample {
  Raster pixels;
  int row = 0;
  int col = 0;
  ScaleTag scale = ScaleTag::x1;
  HealthLabel label = HealthLabel::healthy;
  std::string source_id;
};

struct SplitCounts {
  int healthy = 0;
  int lesion = 0;
};

// Image-id lists per split. Validation is used only for monitoring.
struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  void validate_disjoint() const;
};

inline constexpr int kHgnPatchSize = 256;
inline constexpr int kPrnPatchSize = 129;

// Lesion patches are centered on mask-positive pixels; healthy patches on
// uniformly random pixels of healthy images. Crops reflect past borders.
// `allow_lesion_image_negatives` permits healthy patches centered on
// mask-zero pixels of lesion images (off by default).
std::vector<PatchSample> extract_hgn_patches(
    const FundusImage& image, ScaleTag scale, HealthLabel want, int count,
    Rng& rng, int patch_size = kHgnPatchSize,
    bool allow_lesion_image_negatives = false);

// Same sampling rules at 1x with the PRN patch size.
std::vector<PatchSample> extract_prn_patches(
    const FundusImage& image, HealthLabel want, int count, Rng& rng,
    int patch_size = kPrnPatchSize, bool allow_lesion_image_negatives = false);

struct CenterEntry {
  int image_index = 0;
  int row = 0;
  int col = 0;
};

// All mask-positive coordinates across lesion images.
std::vector<CenterEntry> collect_lesion_centers(
    const std::vector<FundusImage>& images);

// Uniform centers over healthy images (image chosen uniformly, then pixel).
std::vector<CenterEntry> sample_healthy_centers(
    const std::vector<FundusImage>& images, int count, Rng& rng);

SplitCounts count_split(const std::vector<FundusImage>& images,
                        const std::vector<std::string>& ids);

// Plain-text split manifest: one line per image,
//   <split> <label> <image-path> <mask-path|->
// Paths are stored relative to the manifest location.
struct SplitManifestEntry {
  std::string split;  // train | validation | test
  HealthLabel label = HealthLabel::healthy;
  std::string image_path;
  std::string mask_path;  // empty when absent
  std::string id;         // stem of image_path
};

void write_split_manifest(const std::filesystem::path& file,
                          const std::vector<SplitManifestEntry>& entries);
std::vector<SplitManifestEntry> read_split_manifest(
    const std::filesystem::path& file);

const FundusImage& image_by_id(const std::vector<FundusImage>& images,
                               const std::string& id);

}  // namespace lesionseg

#endif  // LESIONSEG_DATASET_HPP_
