#ifndef LESIONSEG_NN_FRRN_HPP_
#define LESIONSEG_NN_FRRN_HPP_

#include <memory>
#include <sstream>

#include "lesionseg/nn/layers.hpp"

namespace lesionseg::nn {

struct FrrnStage {
  int scale = 2;     // pooling-stream scale relative to full resolution
  int channels = 96;
  int units = 1;
};

// Two-stream fully convolutional encoder–decoder: a pooling stream working
// at progressively coarser scales and a full-resolution residual stream.
struct FrrnConfig {
  int in_channels = 3;
  int num_classes = 2;
  int stem_kernel = 5;
  int stem_channels = 48;
  int stem_units = 3;
  int final_units = 3;
  int residual_channels = 32;
  std::vector<FrrnStage> down = {{2, 96, 3}, {4, 192, 4}, {8, 384, 2}, {16, 384, 2}};
  std::vector<FrrnStage> up = {{8, 192, 2}, {4, 192, 2}, {2, 96, 2}};

  static FrrnConfig full() { return {}; }

  // Desk-scale benchmark architecture.
  static FrrnConfig tiny() {
    FrrnConfig c;
    c.stem_kernel = 3;
    c.stem_channels = 8;
    c.stem_units = 1;
    c.final_units = 1;
    c.residual_channels = 6;
    c.down = {{2, 12, 1}, {4, 16, 1}};
    c.up = {{2, 12, 1}};
    return c;
  }

  // Gradient-check scale: two pooling blocks, 8 channels, fits 8×8 inputs.
  static FrrnConfig micro() {
    FrrnConfig c;
    c.stem_kernel = 3;
    c.stem_channels = 8;
    c.stem_units = 1;
    c.final_units = 1;
    c.residual_channels = 4;
    c.down = {{2, 8, 1}, {4, 8, 1}};
    c.up = {{2, 8, 1}};
    return c;
  }

  int downsample_factor() const { return down.empty() ? 1 : down.back().scale; }

  void validate() const {
    if (down.empty()) throw ConfigError("frrn: at least one down stage");
    int expect = 2;
    for (const auto& s : down) {
      if (s.scale != expect) throw ConfigError("frrn: down scales must double");
      expect *= 2;
    }
    expect = down.back().scale / 2;
    for (const auto& s : up) {
      if (s.scale != expect) throw ConfigError("frrn: up scales must halve");
      expect /= 2;
    }
    if (!up.empty() && up.back().scale != 2)
      throw ConfigError("frrn: decoder must end at scale 2");
    if (up.empty() && down.back().scale != 2)
      throw ConfigError("frrn: single-stage network must stay at scale 2");
  }

  // Conservative half-width of the receptive field, for tiled inference.
  int receptive_field_radius() const {
    int r = stem_kernel / 2 + stem_units * 2;
    for (const auto& s : down) r += s.scale * (2 * s.units + 2);
    for (const auto& s : up) r += s.scale * (2 * s.units + 2);
    r += 2 * final_units + 2;
    return r;
  }

  std::string serialize() const {
    std::ostringstream os;
    os << "frrn;in=" << in_channels << ";classes=" << num_classes
       << ";stemk=" << stem_kernel << ";stemc=" << stem_channels
       << ";stemu=" << stem_units << ";finalu=" << final_units
       << ";res=" << residual_channels << ";down=";
    for (std::size_t i = 0; i < down.size(); ++i)
      os << (i ? "," : "") << down[i].scale << ':' << down[i].channels << ':'
         << down[i].units;
    os << ";up=";
    for (std::size_t i = 0; i < up.size(); ++i)
      os << (i ? "," : "") << up[i].scale << ':' << up[i].channels << ':'
         << up[i].units;
    return os.str();
  }

  static FrrnConfig parse(const std::string& s);
};

// Full-resolution residual unit: two 3×3 conv+BN+ReLU on the pooled working
// scale, then a 1×1 projection added back into the residual stream.
template <typename T>
class Frru {
 public:
  Frru(int y_ch, int z_ch, int out_ch, int scale)
      : scale_(scale), pool_(scale, scale),
        conv1_(y_ch + z_ch, out_ch, 3), bn1_(out_ch),
        conv2_(out_ch, out_ch, 3), bn2_(out_ch),
        conv_res_(out_ch, z_ch, 1), up_(scale) {}

  std::pair<Tensor<T>, Tensor<T>> forward(const Tensor<T>& y,
                                          const Tensor<T>& z, bool train) {
    y_ch_ = y.shape[1];
    zp_shape_ = z.shape;
    Tensor<T> zp = pool_.forward(z);
    zp_ch_ = zp.shape[1];
    Tensor<T> t = concat_channels(y, zp);
    Tensor<T> h = relu1_.forward(bn1_.forward(conv1_.forward(t), train));
    Tensor<T> y2 = relu2_.forward(bn2_.forward(conv2_.forward(h), train));
    Tensor<T> r = conv_res_.forward(y2);
    Tensor<T> z2 = up_.forward(r);
    // The residual stream may be larger than scale*ceil when not divisible;
    // shapes are guaranteed by the net-level stride padding.
    add_inplace(z2, z);
    return {std::move(y2), std::move(z2)};
  }

  // gy2/gz2 are gradients w.r.t. the unit outputs; returns (gy, gz).
  std::pair<Tensor<T>, Tensor<T>> backward(const Tensor<T>& gy2,
                                           const Tensor<T>& gz2) {
    Tensor<T> gz = gz2;  // identity path
    Tensor<T> gr = up_.backward(gz2);
    Tensor<T> gy2_total = conv_res_.backward(gr);
    add_inplace(gy2_total, gy2);
    Tensor<T> gh = conv2_.backward(bn2_.backward(relu2_.backward(gy2_total)));
    Tensor<T> gt = conv1_.backward(bn1_.backward(relu1_.backward(gh)));
    Tensor<T> gy({gt.shape[0], y_ch_, gt.shape[2], gt.shape[3]});
    Tensor<T> gzp({gt.shape[0], zp_ch_, gt.shape[2], gt.shape[3]});
    split_channels(gt, gy, gzp);
    add_inplace(gz, pool_.backward(gzp));
    return {std::move(gy), std::move(gz)};
  }

  void init_params(Rng& rng) {
    conv1_.init_params(rng);
    conv2_.init_params(rng);
    conv_res_.init_params(rng);
  }

  void collect(const std::string& p, std::vector<ParamRef<T>>& params,
               std::vector<StateRef<T>>& state) {
    conv1_.collect(p + ".conv1", params, state);
    bn1_.collect(p + ".bn1", params, state);
    conv2_.collect(p + ".conv2", params, state);
    bn2_.collect(p + ".bn2", params, state);
    conv_res_.collect(p + ".res", params, state);
  }

 private:
  int scale_, y_ch_ = 0, zp_ch_ = 0;
  std::vector<int> zp_shape_;
  MaxPool2d<T> pool_;
  Conv2d<T> conv1_;
  BatchNorm2d<T> bn1_;
  Relu<T> relu1_;
  Conv2d<T> conv2_;
  BatchNorm2d<T> bn2_;
  Relu<T> relu2_;
  Conv2d<T> conv_res_;
  NearestUpsample<T> up_;
};

// Plain pre-classifier residual unit: x + BN(conv(relu(BN(conv(x))))),
// followed by ReLU.
template <typename T>
class ResidualUnit {
 public:
  explicit ResidualUnit(int ch)
      : conv1_(ch, ch, 3), bn1_(ch), conv2_(ch, ch, 3), bn2_(ch) {}

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    Tensor<T> h = relu1_.forward(bn1_.forward(conv1_.forward(x), train));
    Tensor<T> h2 = bn2_.forward(conv2_.forward(h), train);
    add_inplace(h2, x);
    return relu_out_.forward(h2);
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    Tensor<T> g = relu_out_.backward(gout);
    Tensor<T> gx = g;  // skip path
    Tensor<T> gh = conv1_.backward(
        bn1_.backward(relu1_.backward(conv2_.backward(bn2_.backward(g)))));
    add_inplace(gx, gh);
    return gx;
  }

  void init_params(Rng& rng) {
    conv1_.init_params(rng);
    conv2_.init_params(rng);
  }

  void collect(const std::string& p, std::vector<ParamRef<T>>& params,
               std::vector<StateRef<T>>& state) {
    conv1_.collect(p + ".conv1", params, state);
    bn1_.collect(p + ".bn1", params, state);
    conv2_.collect(p + ".conv2", params, state);
    bn2_.collect(p + ".bn2", params, state);
  }

 private:
  Conv2d<T> conv1_;
  BatchNorm2d<T> bn1_;
  Relu<T> relu1_;
  Conv2d<T> conv2_;
  BatchNorm2d<T> bn2_;
  Relu<T> relu_out_;
};

template <typename T>
class FrrnNet {
 public:
  explicit FrrnNet(const FrrnConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    stem_conv_ = Conv2d<T>(cfg.in_channels, cfg.stem_channels, cfg.stem_kernel);
    stem_bn_ = BatchNorm2d<T>(cfg.stem_channels);
    for (int i = 0; i < cfg.stem_units; ++i)
      stem_units_.push_back(std::make_unique<ResidualUnit<T>>(cfg.stem_channels));
    split_conv_ = Conv2d<T>(cfg.stem_channels, cfg.residual_channels, 1);

    int y_ch = cfg.stem_channels;
    for (const auto& s : cfg.down) {
      down_pools_.emplace_back(2, 2);
      auto& units = down_units_.emplace_back();
      for (int u = 0; u < s.units; ++u) {
        units.push_back(std::make_unique<Frru<T>>(
            y_ch, cfg.residual_channels, s.channels, s.scale));
        y_ch = s.channels;
      }
    }
    for (const auto& s : cfg.up) {
      up_samplers_.emplace_back(2);
      auto& units = up_units_.emplace_back();
      for (int u = 0; u < s.units; ++u) {
        units.push_back(std::make_unique<Frru<T>>(
            y_ch, cfg.residual_channels, s.channels, s.scale));
        y_ch = s.channels;
      }
    }
    final_up_ = NearestUpsample<T>(2);
    merge_conv_ = Conv2d<T>(cfg.residual_channels + y_ch, cfg.stem_channels, 1);
    merge_bn_ = BatchNorm2d<T>(cfg.stem_channels);
    for (int i = 0; i < cfg.final_units; ++i)
      final_units_.push_back(std::make_unique<ResidualUnit<T>>(cfg.stem_channels));
    head_conv_ = Conv2d<T>(cfg.stem_channels, cfg.num_classes, 1);
  }

  const FrrnConfig& config() const { return cfg_; }

  void init_params(uint64_t seed) {
    Rng rng(seed);
    stem_conv_.init_params(rng);
    for (auto& u : stem_units_) u->init_params(rng);
    split_conv_.init_params(rng);
    for (auto& st : down_units_)
      for (auto& u : st) u->init_params(rng);
    for (auto& st : up_units_)
      for (auto& u : st) u->init_params(rng);
    merge_conv_.init_params(rng);
    for (auto& u : final_units_) u->init_params(rng);
    head_conv_.init_params(rng);
  }

  // Input (N,3,H,W) with H,W divisible by downsample_factor(); returns
  // per-pixel class logits (N,classes,H,W).
  Tensor<T> forward(const Tensor<T>& x, bool train) {
    if (x.shape[1] != cfg_.in_channels)
      throw InputError("hgn: expected " + std::to_string(cfg_.in_channels) +
                       " input channels");
    if (x.shape[2] % cfg_.downsample_factor() ||
        x.shape[3] % cfg_.downsample_factor())
      throw InputError("hgn: input not divisible by network stride");

    Tensor<T> h = stem_relu_.forward(stem_bn_.forward(stem_conv_.forward(x), train));
    for (auto& u : stem_units_) h = u->forward(h, train);
    Tensor<T> z = split_conv_.forward(h);
    Tensor<T> y = h;
    for (std::size_t s = 0; s < down_units_.size(); ++s) {
      y = down_pools_[s].forward(y);
      for (auto& u : down_units_[s]) {
        auto [y2, z2] = u->forward(y, z, train);
        y = std::move(y2);
        z = std::move(z2);
      }
    }
    for (std::size_t s = 0; s < up_units_.size(); ++s) {
      y = up_samplers_[s].forward(y);
      for (auto& u : up_units_[s]) {
        auto [y2, z2] = u->forward(y, z, train);
        y = std::move(y2);
        z = std::move(z2);
      }
    }
    y = final_up_.forward(y);
    Tensor<T> m = concat_channels(z, y);
    z_ch_ = z.shape[1];
    y_ch_top_ = y.shape[1];
    m = merge_relu_.forward(merge_bn_.forward(merge_conv_.forward(m), train));
    for (auto& u : final_units_) m = u->forward(m, train);
    return head_conv_.forward(m);
  }

  // Gradient w.r.t. logits in, gradient w.r.t. input out; parameter
  // gradients accumulate into the registered params.
  Tensor<T> backward(const Tensor<T>& glogits) {
    Tensor<T> gm = head_conv_.backward(glogits);
    for (auto it = final_units_.rbegin(); it != final_units_.rend(); ++it)
      gm = (*it)->backward(gm);
    gm = merge_conv_.backward(merge_bn_.backward(merge_relu_.backward(gm)));
    Tensor<T> gz({gm.shape[0], z_ch_, gm.shape[2], gm.shape[3]});
    Tensor<T> gy({gm.shape[0], y_ch_top_, gm.shape[2], gm.shape[3]});
    split_channels(gm, gz, gy);
    gy = final_up_.backward(gy);
    for (int s = (int)up_units_.size() - 1; s >= 0; --s) {
      for (auto it = up_units_[s].rbegin(); it != up_units_[s].rend(); ++it) {
        auto [gy2, gz2] = (*it)->backward(gy, gz);
        gy = std::move(gy2);
        gz = std::move(gz2);
      }
      gy = up_samplers_[s].backward(gy);
    }
    for (int s = (int)down_units_.size() - 1; s >= 0; --s) {
      for (auto it = down_units_[s].rbegin(); it != down_units_[s].rend(); ++it) {
        auto [gy2, gz2] = (*it)->backward(gy, gz);
        gy = std::move(gy2);
        gz = std::move(gz2);
      }
      gy = down_pools_[s].backward(gy);
    }
    Tensor<T> gh = split_conv_.backward(gz);
    add_inplace(gh, gy);
    for (auto it = stem_units_.rbegin(); it != stem_units_.rend(); ++it)
      gh = (*it)->backward(gh);
    return stem_conv_.backward(stem_bn_.backward(stem_relu_.backward(gh)));
  }

  std::vector<ParamRef<T>> params() {
    std::vector<ParamRef<T>> p;
    std::vector<StateRef<T>> s;
    collect(p, s);
    return p;
  }
  std::vector<StateRef<T>> state() {
    std::vector<ParamRef<T>> p;
    std::vector<StateRef<T>> s;
    collect(p, s);
    return s;
  }

  void collect(std::vector<ParamRef<T>>& params, std::vector<StateRef<T>>& state) {
    stem_conv_.collect("stem.conv", params, state);
    stem_bn_.collect("stem.bn", params, state);
    for (std::size_t i = 0; i < stem_units_.size(); ++i)
      stem_units_[i]->collect("stem.ru" + std::to_string(i), params, state);
    split_conv_.collect("split", params, state);
    for (std::size_t s2 = 0; s2 < down_units_.size(); ++s2)
      for (std::size_t u = 0; u < down_units_[s2].size(); ++u)
        down_units_[s2][u]->collect(
            "down" + std::to_string(s2) + ".frru" + std::to_string(u), params,
            state);
    for (std::size_t s2 = 0; s2 < up_units_.size(); ++s2)
      for (std::size_t u = 0; u < up_units_[s2].size(); ++u)
        up_units_[s2][u]->collect(
            "up" + std::to_string(s2) + ".frru" + std::to_string(u), params,
            state);
    merge_conv_.collect("merge.conv", params, state);
    merge_bn_.collect("merge.bn", params, state);
    for (std::size_t i = 0; i < final_units_.size(); ++i)
      final_units_[i]->collect("final.ru" + std::to_string(i), params, state);
    head_conv_.collect("head", params, state);
  }

 private:
  FrrnConfig cfg_;
  Conv2d<T> stem_conv_;
  BatchNorm2d<T> stem_bn_;
  Relu<T> stem_relu_;
  std::vector<std::unique_ptr<ResidualUnit<T>>> stem_units_;
  Conv2d<T> split_conv_;
  std::vector<MaxPool2d<T>> down_pools_;
  std::vector<std::vector<std::unique_ptr<Frru<T>>>> down_units_;
  std::vector<NearestUpsample<T>> up_samplers_;
  std::vector<std::vector<std::unique_ptr<Frru<T>>>> up_units_;
  NearestUpsample<T> final_up_;
  Conv2d<T> merge_conv_;
  BatchNorm2d<T> merge_bn_;
  Relu<T> merge_relu_;
  std::vector<std::unique_ptr<ResidualUnit<T>>> final_units_;
  Conv2d<T> head_conv_;
  int z_ch_ = 0, y_ch_top_ = 0;
};

}  // namespace lesionseg::nn

#endif  // LESIONSEG_NN_FRRN_HPP_
