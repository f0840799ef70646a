#ifndef LESIONSEG_NN_RESNET_HPP_
#define LESIONSEG_NN_RESNET_HPP_

#include <memory>
#include <sstream>

#include "lesionseg/nn/layers.hpp"

namespace lesionseg::nn {

struct ResnetStageCfg {
  int channels = 64;  // stage output channels
  int blocks = 1;
  int stride = 1;  // stride of the stage's first block
};

// Patch classifier: residual network with one downsampling step fewer than
// the stock 50-layer variant (the last stage keeps stride 1), global average
// pooling for the embedding, and a 2-way linear head for the center-pixel
// class.
struct PrnConfig {
  int in_channels = 3;
  int num_classes = 2;
  int patch_size = 129;
  int stem_channels = 64;
  int stem_kernel = 7;
  int stem_stride = 2;
  bool stem_pool = true;  // 3×3/2 max pool
  bool bottleneck = true;
  std::vector<ResnetStageCfg> stages = {
      {256, 3, 1}, {512, 4, 2}, {1024, 6, 2}, {2048, 3, 1}};

  static PrnConfig full() { return {}; }

  static PrnConfig tiny() {
    PrnConfig c;
    c.patch_size = 33;
    c.stem_channels = 8;
    c.stem_kernel = 3;
    c.bottleneck = false;
    c.stages = {{8, 1, 1}, {16, 1, 2}, {32, 1, 2}, {64, 1, 1}};
    return c;
  }

  // 16-D embedding for triplet gradient checks.
  static PrnConfig micro() {
    PrnConfig c;
    c.patch_size = 17;
    c.stem_channels = 4;
    c.stem_kernel = 3;
    c.stem_pool = false;
    c.bottleneck = false;
    c.stages = {{8, 1, 2}, {16, 1, 1}};
    return c;
  }

  int embedding_dim() const { return stages.back().channels; }

  int total_downsample_factor() const {
    int f = stem_stride * (stem_pool ? 2 : 1);
    for (const auto& s : stages) f *= s.stride;
    return f;
  }

  // Spatial size of the last feature map for a patch_size input, tracing the
  // stage list's stride arithmetic.
  int final_feature_size() const {
    int n = conv_out_size(patch_size, stem_kernel, stem_stride, stem_kernel / 2);
    if (stem_pool) n = conv_out_size(n, 3, 2, 1);
    for (const auto& s : stages)
      if (s.stride == 2) n = conv_out_size(n, 3, 2, 1);
    return n;
  }

  std::string serialize() const {
    std::ostringstream os;
    os << "prn;in=" << in_channels << ";classes=" << num_classes
       << ";patch=" << patch_size << ";stemc=" << stem_channels
       << ";stemk=" << stem_kernel << ";stems=" << stem_stride
       << ";pool=" << (stem_pool ? 1 : 0)
       << ";bottleneck=" << (bottleneck ? 1 : 0) << ";stages=";
    for (std::size_t i = 0; i < stages.size(); ++i)
      os << (i ? "," : "") << stages[i].channels << ':' << stages[i].blocks
         << ':' << stages[i].stride;
    return os.str();
  }

  static PrnConfig parse(const std::string& s);
};

// Basic residual block (two 3×3 convs) or bottleneck (1×1, 3×3, 1×1).
template <typename T>
class ResBlock {
 public:
  ResBlock(int in_ch, int out_ch, int stride, bool bottleneck)
      : bottleneck_(bottleneck),
        project_(stride != 1 || in_ch != out_ch) {
    if (bottleneck) {
      const int mid = out_ch / 4;
      conv1_ = Conv2d<T>(in_ch, mid, 1, 1, 0, false);
      bn1_ = BatchNorm2d<T>(mid);
      conv2_ = Conv2d<T>(mid, mid, 3, stride, 1, false);
      bn2_ = BatchNorm2d<T>(mid);
      conv3_ = Conv2d<T>(mid, out_ch, 1, 1, 0, false);
      bn3_ = BatchNorm2d<T>(out_ch);
    } else {
      conv1_ = Conv2d<T>(in_ch, out_ch, 3, stride, 1, false);
      bn1_ = BatchNorm2d<T>(out_ch);
      conv2_ = Conv2d<T>(out_ch, out_ch, 3, 1, 1, false);
      bn2_ = BatchNorm2d<T>(out_ch);
    }
    if (project_) {
      proj_conv_ = Conv2d<T>(in_ch, out_ch, 1, stride, 0, false);
      proj_bn_ = BatchNorm2d<T>(out_ch);
    }
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    Tensor<T> h = relu1_.forward(bn1_.forward(conv1_.forward(x), train));
    Tensor<T> out;
    if (bottleneck_) {
      h = relu2_.forward(bn2_.forward(conv2_.forward(h), train));
      out = bn3_.forward(conv3_.forward(h), train);
    } else {
      out = bn2_.forward(conv2_.forward(h), train);
    }
    Tensor<T> skip =
        project_ ? proj_bn_.forward(proj_conv_.forward(x), train) : x;
    add_inplace(out, skip);
    return relu_out_.forward(out);
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    Tensor<T> g = relu_out_.backward(gout);
    Tensor<T> gx_main;
    if (bottleneck_) {
      Tensor<T> gh = conv3_.backward(bn3_.backward(g));
      gh = conv2_.backward(bn2_.backward(relu2_.backward(gh)));
      gx_main = conv1_.backward(bn1_.backward(relu1_.backward(gh)));
    } else {
      Tensor<T> gh = conv2_.backward(bn2_.backward(g));
      gx_main = conv1_.backward(bn1_.backward(relu1_.backward(gh)));
    }
    if (project_) {
      Tensor<T> gx_skip = proj_conv_.backward(proj_bn_.backward(g));
      add_inplace(gx_main, gx_skip);
    } else {
      add_inplace(gx_main, g);
    }
    return gx_main;
  }

  void init_params(Rng& rng) {
    conv1_.init_params(rng);
    conv2_.init_params(rng);
    if (bottleneck_) conv3_.init_params(rng);
    if (project_) proj_conv_.init_params(rng);
  }

  void collect(const std::string& p, std::vector<ParamRef<T>>& params,
               std::vector<StateRef<T>>& state) {
    conv1_.collect(p + ".conv1", params, state);
    bn1_.collect(p + ".bn1", params, state);
    conv2_.collect(p + ".conv2", params, state);
    bn2_.collect(p + ".bn2", params, state);
    if (bottleneck_) {
      conv3_.collect(p + ".conv3", params, state);
      bn3_.collect(p + ".bn3", params, state);
    }
    if (project_) {
      proj_conv_.collect(p + ".proj", params, state);
      proj_bn_.collect(p + ".proj_bn", params, state);
    }
  }

 private:
  bool bottleneck_, project_;
  Conv2d<T> conv1_, conv2_, conv3_, proj_conv_;
  BatchNorm2d<T> bn1_, bn2_, bn3_, proj_bn_;
  Relu<T> relu1_, relu2_, relu_out_;
};

template <typename T>
struct PrnOutput {
  Tensor<T> logits;     // (N, classes)
  Tensor<T> embedding;  // (N, D) — GAP over the last convolution stage
};

template <typename T>
class PrnNet {
 public:
  explicit PrnNet(const PrnConfig& cfg) : cfg_(cfg) {
    stem_conv_ = Conv2d<T>(cfg.in_channels, cfg.stem_channels, cfg.stem_kernel,
                           cfg.stem_stride, cfg.stem_kernel / 2, false);
    stem_bn_ = BatchNorm2d<T>(cfg.stem_channels);
    if (cfg.stem_pool) stem_pool_ = MaxPool2d<T>(3, 2, 1);
    int ch = cfg.stem_channels;
    for (const auto& s : cfg.stages) {
      auto& stage = stages_.emplace_back();
      for (int b = 0; b < s.blocks; ++b) {
        stage.push_back(std::make_unique<ResBlock<T>>(
            ch, s.channels, b == 0 ? s.stride : 1, cfg.bottleneck));
        ch = s.channels;
      }
    }
    head_ = Linear<T>(cfg.embedding_dim(), cfg.num_classes);
  }

  const PrnConfig& config() const { return cfg_; }

  void init_params(uint64_t seed) {
    Rng rng(seed);
    stem_conv_.init_params(rng);
    for (auto& st : stages_)
      for (auto& b : st) b->init_params(rng);
    head_.init_params(rng);
  }

  PrnOutput<T> forward(const Tensor<T>& x, bool train) {
    if (x.shape[1] != cfg_.in_channels)
      throw InputError("prn: channel mismatch");
    if (x.shape[2] != cfg_.patch_size || x.shape[3] != cfg_.patch_size)
      throw InputError("prn: expected " + std::to_string(cfg_.patch_size) +
                       "×" + std::to_string(cfg_.patch_size) + " patches");
    Tensor<T> h = stem_relu_.forward(stem_bn_.forward(stem_conv_.forward(x), train));
    if (cfg_.stem_pool) h = stem_pool_.forward(h);
    for (auto& st : stages_)
      for (auto& b : st) h = b->forward(h, train);
    PrnOutput<T> out;
    out.embedding = gap_.forward(h);
    out.logits = head_.forward(out.embedding);
    return out;
  }

  // Combines head and embedding gradients; returns gradient w.r.t. input.
  Tensor<T> backward(const Tensor<T>& glogits, const Tensor<T>& gembedding) {
    Tensor<T> gemb = head_.backward(glogits);
    if (!gembedding.empty()) add_inplace(gemb, gembedding);
    Tensor<T> gh = gap_.backward(gemb);
    for (auto st = stages_.rbegin(); st != stages_.rend(); ++st)
      for (auto b = st->rbegin(); b != st->rend(); ++b) gh = (*b)->backward(gh);
    if (cfg_.stem_pool) gh = stem_pool_.backward(gh);
    return stem_conv_.backward(stem_bn_.backward(stem_relu_.backward(gh)));
  }

  std::vector<ParamRef<T>> params() {
    std::vector<ParamRef<T>> p;
    std::vector<StateRef<T>> s;
    collect(p, s);
    return p;
  }

  void collect(std::vector<ParamRef<T>>& params, std::vector<StateRef<T>>& state) {
    stem_conv_.collect("stem.conv", params, state);
    stem_bn_.collect("stem.bn", params, state);
    for (std::size_t s2 = 0; s2 < stages_.size(); ++s2)
      for (std::size_t b = 0; b < stages_[s2].size(); ++b)
        stages_[s2][b]->collect(
            "stage" + std::to_string(s2) + ".block" + std::to_string(b),
            params, state);
    head_.collect("head", params, state);
  }

 private:
  PrnConfig cfg_;
  Conv2d<T> stem_conv_;
  BatchNorm2d<T> stem_bn_;
  Relu<T> stem_relu_;
  MaxPool2d<T> stem_pool_;
  std::vector<std::vector<std::unique_ptr<ResBlock<T>>>> stages_;
  GlobalAvgPool<T> gap_;
  Linear<T> head_;
};

}  // namespace lesionseg::nn

#endif  // LESIONSEG_NN_RESNET_HPP_
