#include "lesionseg/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace lesionseg {

void SynthConfig::validate() const {
  if (image_size < 32) throw ConfigError("synth: image_size must be >= 32");
  if (lesions_min < 0 || lesions_max < lesions_min)
    throw ConfigError("synth: invalid lesion count range");
  if (!(lesion_radius_min > 0) || lesion_radius_max < lesion_radius_min)
    throw ConfigError("synth: invalid lesion radius range");
  if (lesion_radius_max >= vessel_width_bound)
    throw ConfigError(
        "synth: lesion radius reaches the vessel width bound; lesions must "
        "remain in the small-object regime");
  if (hemorrhage_radius_min <= lesion_radius_max)
    throw ConfigError("synth: hemorrhages must be larger than lesions");
  if (noise_sigma < 0) throw ConfigError("synth: negative noise sigma");
}

namespace {

struct Disk {
  double y, x, r;
};

// Accumulated multiplicative darkening in [0,1); combined with max so that
// self-overlapping strokes do not double-darken.
struct DarkMap {
  int n;
  std::vector<float> v;
  explicit DarkMap(int size) : n(size), v((std::size_t)size * size, 0.0f) {}
  void stamp_disk(double cy, double cx, double radius, double strength) {
    const int y0 = std::max(0, (int)std::floor(cy - radius - 2));
    const int y1 = std::min(n - 1, (int)std::ceil(cy + radius + 2));
    const int x0 = std::max(0, (int)std::floor(cx - radius - 2));
    const int x1 = std::min(n - 1, (int)std::ceil(cx + radius + 2));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d = std::hypot(y - cy, x - cx);
        const double cov = std::clamp(radius + 0.5 - d, 0.0, 1.0);
        if (cov <= 0) continue;
        float& cell = v[(std::size_t)y * n + x];
        cell = std::max(cell, (float)(strength * cov));
      }
  }
};

// Smooth low-frequency luminance field: bilinear interpolation of a coarse
// random control grid.
std::vector<float> background_field(int n, Rng& rng) {
  const int g = 5;
  std::vector<double> grid(g * g);
  for (double& v : grid) v = rng.uniform(175.0, 215.0);
  std::vector<float> field((std::size_t)n * n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double gy = (double)y / (n - 1) * (g - 1);
      const double gx = (double)x / (n - 1) * (g - 1);
      const int iy = std::min((int)gy, g - 2), ix = std::min((int)gx, g - 2);
      const double fy = gy - iy, fx = gx - ix;
      const double v =
          grid[iy * g + ix] * (1 - fy) * (1 - fx) +
          grid[iy * g + ix + 1] * (1 - fy) * fx +
          grid[(iy + 1) * g + ix] * fy * (1 - fx) +
          grid[(iy + 1) * g + ix + 1] * fy * fx;
      field[(std::size_t)y * n + x] = (float)v;
    }
  return field;
}

std::vector<std::pair<double, double>> trace_vessel(int n, Rng& rng) {
  // Start on a border, head inward, wander with bounded curvature.
  double y, x, heading;
  switch (rng.uniform_int(4)) {
    case 0: y = 0; x = rng.uniform(0, n); heading = rng.uniform(0.3, M_PI - 0.3); break;
    case 1: y = n - 1; x = rng.uniform(0, n); heading = rng.uniform(-M_PI + 0.3, -0.3); break;
    case 2: y = rng.uniform(0, n); x = 0; heading = rng.uniform(-M_PI / 2 + 0.3, M_PI / 2 - 0.3); break;
    default: y = rng.uniform(0, n); x = n - 1; heading = rng.uniform(M_PI / 2 + 0.3, 3 * M_PI / 2 - 0.3); break;
  }
  double curvature = rng.normal(0.0, 0.01);
  std::vector<std::pair<double, double>> path;
  const int max_steps = 3 * n;
  for (int i = 0; i < max_steps; ++i) {
    path.emplace_back(y, x);
    y += std::sin(heading);
    x += std::cos(heading);
    curvature += rng.normal(0.0, 0.004);
    curvature = std::clamp(curvature, -0.05, 0.05);
    heading += curvature + rng.normal(0.0, 0.02);
    if (i > 8 && (y < -2 || y > n + 1 || x < -2 || x > n + 1)) break;
  }
  return path;
}

double dist_to_path(const std::vector<std::pair<double, double>>& path,
                    double y, double x) {
  double best = 1e30;
  for (const auto& [py, px] : path)
    best = std::min(best, std::hypot(py - y, px - x));
  return best;
}

}  // namespace

FundusImage generate_synthetic_image(const SynthConfig& config,
                                     const std::string& id, int lesion_count,
                                     Rng& rng) {
  config.validate();
  const int n = config.image_size;

  const std::vector<float> bg = background_field(n, rng);
  DarkMap dark(n);

  std::vector<std::vector<std::pair<double, double>>> vessels;
  std::vector<double> vessel_halfwidths;
  for (int v = 0; v < config.vessel_count; ++v) {
    auto path = trace_vessel(n, rng);
    const double width =
        rng.uniform(2.0, std::min(4.0, config.vessel_width_bound));
    const double strength = rng.uniform(0.35, 0.5);
    for (const auto& [py, px] : path)
      dark.stamp_disk(py, px, width / 2.0, strength);
    vessel_halfwidths.push_back(width / 2.0);
    vessels.push_back(std::move(path));
  }

  std::vector<Disk> hemorrhages;
  for (int hIdx = 0; hIdx < config.hemorrhage_count; ++hIdx) {
    const double r =
        rng.uniform(config.hemorrhage_radius_min, config.hemorrhage_radius_max);
    const double cy = rng.uniform(r + 2, n - r - 2);
    const double cx = rng.uniform(r + 2, n - r - 2);
    const double strength = rng.uniform(0.4, 0.55);
    // Lumpy blob: a cluster of overlapping disks around the center.
    dark.stamp_disk(cy, cx, r, strength);
    const int lumps = 3 + rng.uniform_int(3);
    for (int l = 0; l < lumps; ++l)
      dark.stamp_disk(cy + rng.normal(0, r / 3), cx + rng.normal(0, r / 3),
                      r * rng.uniform(0.5, 0.8), strength);
    hemorrhages.push_back({cy, cx, r * 1.6});
  }

  std::vector<Disk> lesions;
  MaskRaster mask(n, n);
  for (int k = 0; k < lesion_count; ++k) {
    const double r =
        rng.uniform(config.lesion_radius_min, config.lesion_radius_max);
    bool placed = false;
    for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
      const double cy = rng.uniform(r + 3, n - r - 3);
      const double cx = rng.uniform(r + 3, n - r - 3);
      bool ok = true;
      for (const auto& d : lesions)
        if (std::hypot(d.y - cy, d.x - cx) < d.r + r + 4) { ok = false; break; }
      for (const auto& d : hemorrhages)
        if (ok && std::hypot(d.y - cy, d.x - cx) < d.r + r + 5) ok = false;
      // On late attempts give up on vessel clearance, never on blob overlap.
      if (ok && attempt < 300)
        for (std::size_t v = 0; v < vessels.size() && ok; ++v)
          if (dist_to_path(vessels[v], cy, cx) <
              vessel_halfwidths[v] + r + 4)
            ok = false;
      if (!ok) continue;
      lesions.push_back({cy, cx, r});
      placed = true;
    }
    if (!placed)
      throw ConfigError("synth: could not place lesion " + std::to_string(k) +
                        " in image '" + id + "' (too crowded)");
  }
  for (const auto& d : lesions) {
    const double strength = rng.uniform(0.5, 0.62);
    dark.stamp_disk(d.y, d.x, d.r, strength);
    const int y0 = std::max(0, (int)std::floor(d.y - d.r));
    const int y1 = std::min(n - 1, (int)std::ceil(d.y + d.r));
    const int x0 = std::max(0, (int)std::floor(d.x - d.r));
    const int x1 = std::min(n - 1, (int)std::ceil(d.x + d.r));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (std::hypot(y - d.y, x - d.x) <= d.r) mask.at(y, x) = 1;
  }

  FundusImage img;
  img.id = id;
  img.label = lesion_count > 0 ? HealthLabel::lesion : HealthLabel::healthy;
  if (lesion_count > 0) img.mask = std::move(mask);
  img.pixels = Raster(3, n, n);
  // Darkening keeps some red: microaneurysms and vessels look dark-red.
  const double ch_mult[3] = {1.0, 0.82, 0.55};
  const double ch_dark[3] = {0.8, 1.0, 1.0};
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const float l = bg[(std::size_t)y * n + x];
      const float d = dark.v[(std::size_t)y * n + x];
      for (int c = 0; c < 3; ++c) {
        const double v = l * ch_mult[c] * (1.0 - ch_dark[c] * d) +
                         rng.normal(0.0, config.noise_sigma);
        img.pixels.at(c, y, x) = (float)std::clamp(v, 0.0, 255.0);
      }
    }
  return img;
}

SynthDataset generate_synthetic(const SynthConfig& config, uint64_t seed) {
  config.validate();
  SynthDataset ds;

  const struct {
    const char* split;
    std::vector<std::string>* list;
    int healthy, lesion;
  } groups[] = {
      {"train", nullptr, config.train_healthy, config.train_lesion},
      {"validation", nullptr, config.val_healthy, config.val_lesion},
      {"test", nullptr, config.test_healthy, config.test_lesion},
  };
  std::vector<std::string>* lists[] = {&ds.split.train, &ds.split.validation,
                                       &ds.split.test};

  for (int g = 0; g < 3; ++g) {
    for (int i = 0; i < groups[g].healthy + groups[g].lesion; ++i) {
      const bool lesion = i >= groups[g].healthy;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%s_%s_%03d", groups[g].split,
                    lesion ? "lesion" : "healthy",
                    lesion ? i - groups[g].healthy : i);
      const std::string id = buf;
      Rng rng = Rng::for_stream(seed, id);
      const int count =
          lesion ? config.lesions_min +
                       rng.uniform_int(config.lesions_max - config.lesions_min + 1)
                 : 0;
      ds.images.push_back(generate_synthetic_image(config, id, count, rng));
      lists[g]->push_back(id);
    }
  }
  ds.split.validate_disjoint();
  return ds;
}

}  // namespace lesionseg
