#include "lesionseg/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace lesionseg {

void DatasetSplit::validate_disjoint() const {
  std::set<std::string> seen;
  for (const auto* list : {&train, &validation, &test})
    for (const auto& id : *list)
      if (!seen.insert(id).second)
        throw InputError("split lists are not disjoint: '" + id + "'");
}

namespace {

std::vector<std::pair<int, int>> positive_coords(const MaskRaster& m) {
  std::vector<std::pair<int, int>> coords;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (m.at(y, x)) coords.emplace_back(y, x);
  return coords;
}

std::vector<std::pair<int, int>> negative_coords(const MaskRaster& m) {
  std::vector<std::pair<int, int>> coords;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (!m.at(y, x)) coords.emplace_back(y, x);
  return coords;
}

std::vector<PatchSample> extract_patches(const FundusImage& image,
                                         ScaleTag scale, HealthLabel want,
                                         int count, Rng& rng, int patch_size,
                                         bool allow_lesion_negatives) {
  image.validate();
  if (count < 0) throw ParamError("patch count must be non-negative");

  std::vector<PatchSample> out;
  out.reserve(count);
  const int half = patch_size / 2;

  if (want == HealthLabel::lesion) {
    if (image.label != HealthLabel::lesion || !image.mask)
      throw UsageError("lesion patches requested from a healthy image '" +
                       image.id + "'");
    const auto centers = positive_coords(*image.mask);
    if (centers.empty())
      throw UsageError("lesion image '" + image.id + "' has an empty mask");
    for (int i = 0; i < count; ++i) {
      const auto [r, c] = centers[rng.uniform_int((int)centers.size())];
      PatchSample p;
      p.pixels = crop_reflect(image.pixels, r - half, c - half, patch_size);
      p.row = r;
      p.col = c;
      p.scale = scale;
      p.label = HealthLabel::lesion;
      p.source_id = image.id;
      out.push_back(std::move(p));
    }
    return out;
  }

  if (image.label == HealthLabel::lesion) {
    if (!allow_lesion_negatives)
      throw UsageError(
          "healthy patches requested from lesion image '" + image.id +
          "' (enable lesion-image negatives explicitly to allow this)");
    const auto centers = negative_coords(*image.mask);
    if (centers.empty())
      throw UsageError("lesion image '" + image.id + "' has no negative pixels");
    for (int i = 0; i < count; ++i) {
      const auto [r, c] = centers[rng.uniform_int((int)centers.size())];
      PatchSample p;
      p.pixels = crop_reflect(image.pixels, r - half, c - half, patch_size);
      p.row = r;
      p.col = c;
      p.scale = scale;
      p.label = HealthLabel::healthy;
      p.source_id = image.id;
      out.push_back(std::move(p));
    }
    return out;
  }

  for (int i = 0; i < count; ++i) {
    const int r = rng.uniform_int(image.pixels.height);
    const int c = rng.uniform_int(image.pixels.width);
    PatchSample p;
    p.pixels = crop_reflect(image.pixels, r - half, c - half, patch_size);
    p.row = r;
    p.col = c;
    p.scale = scale;
    p.label = HealthLabel::healthy;
    p.source_id = image.id;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::vector<PatchSample> extract_hgn_patches(const FundusImage& image,
                                             ScaleTag scale, HealthLabel want,
                                             int count, Rng& rng,
                                             int patch_size,
                                             bool allow_lesion_image_negatives) {
  return extract_patches(image, scale, want, count, rng, patch_size,
                         allow_lesion_image_negatives);
}

std::vector<PatchSample> extract_prn_patches(const FundusImage& image,
                                             HealthLabel want, int count,
                                             Rng& rng, int patch_size,
                                             bool allow_lesion_image_negatives) {
  return extract_patches(image, ScaleTag::x1, want, count, rng, patch_size,
                         allow_lesion_image_negatives);
}

std::vector<CenterEntry> collect_lesion_centers(
    const std::vector<FundusImage>& images) {
  std::vector<CenterEntry> centers;
  for (int i = 0; i < (int)images.size(); ++i) {
    const auto& img = images[i];
    if (img.label != HealthLabel::lesion || !img.mask) continue;
    for (int y = 0; y < img.mask->height; ++y)
      for (int x = 0; x < img.mask->width; ++x)
        if (img.mask->at(y, x)) centers.push_back({i, y, x});
  }
  return centers;
}

std::vector<CenterEntry> sample_healthy_centers(
    const std::vector<FundusImage>& images, int count, Rng& rng) {
  std::vector<int> healthy_idx;
  for (int i = 0; i < (int)images.size(); ++i)
    if (images[i].label == HealthLabel::healthy) healthy_idx.push_back(i);
  if (healthy_idx.empty())
    throw UsageError("no healthy images available for negative sampling");

  std::vector<CenterEntry> centers;
  centers.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int ii = healthy_idx[rng.uniform_int((int)healthy_idx.size())];
    centers.push_back({ii, rng.uniform_int(images[ii].pixels.height),
                       rng.uniform_int(images[ii].pixels.width)});
  }
  return centers;
}

SplitCounts count_split(const std::vector<FundusImage>& images,
                        const std::vector<std::string>& ids) {
  SplitCounts c;
  for (const auto& id : ids) {
    const auto& img = image_by_id(images, id);
    (img.label == HealthLabel::healthy ? c.healthy : c.lesion)++;
  }
  return c;
}

const FundusImage& image_by_id(const std::vector<FundusImage>& images,
                               const std::string& id) {
  for (const auto& img : images)
    if (img.id == id) return img;
  throw InputError("unknown image id '" + id + "'");
}

void write_split_manifest(const std::filesystem::path& file,
                          const std::vector<SplitManifestEntry>& entries) {
  std::ofstream os(file);
  if (!os) throw IoError("cannot write split manifest " + file.string());
  os << "# lesionseg split manifest v1\n";
  for (const auto& e : entries)
    os << e.split << ' ' << to_string(e.label) << ' ' << e.image_path << ' '
       << (e.mask_path.empty() ? "-" : e.mask_path) << '\n';
  if (!os) throw IoError("failed writing split manifest " + file.string());
}

std::vector<SplitManifestEntry> read_split_manifest(
    const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw IoError("cannot read split manifest " + file.string());
  std::vector<SplitManifestEntry> entries;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    SplitManifestEntry e;
    std::string label, mask;
    if (!(ls >> e.split >> label >> e.image_path >> mask))
      throw InputError("malformed split manifest line: '" + line + "'");
    if (e.split != "train" && e.split != "validation" && e.split != "test")
      throw InputError("unknown split '" + e.split + "' in manifest");
    if (label == "healthy")
      e.label = HealthLabel::healthy;
    else if (label == "lesion")
      e.label = HealthLabel::lesion;
    else
      throw InputError("unknown label '" + label + "' in manifest");
    e.mask_path = (mask == "-") ? "" : mask;
    e.id = std::filesystem::path(e.image_path).stem().string();
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace lesionseg
