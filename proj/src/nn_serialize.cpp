#include "lesionseg/nn/serialize.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace lesionseg::nn {

namespace {

constexpr char kMagic[6] = {'L', 'S', 'C', 'K', '1', '\n'};

static_assert(sizeof(float) == 4);

void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {(unsigned char)(v & 0xff), (unsigned char)(v >> 8 & 0xff),
                        (unsigned char)(v >> 16 & 0xff),
                        (unsigned char)(v >> 24 & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return (uint32_t)b[0] | (uint32_t)b[1] << 8 | (uint32_t)b[2] << 16 |
         (uint32_t)b[3] << 24;
}

std::string header_text(const CheckpointMeta& meta, std::size_t tensors) {
  std::ostringstream os;
  os.precision(17);
  os << "kind=" << meta.kind << '\n'
     << "arch=" << meta.arch << '\n'
     << "epoch=" << meta.epoch << '\n'
     << "val_metric=" << meta.val_metric << '\n'
     << "tensors=" << tensors << '\n';
  return os.str();
}

CheckpointMeta parse_header(const std::string& text, std::size_t* tensors) {
  CheckpointMeta meta;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "kind") meta.kind = val;
    else if (key == "arch") meta.arch = val;
    else if (key == "epoch") meta.epoch = std::stoi(val);
    else if (key == "val_metric") meta.val_metric = std::stod(val);
    else if (key == "tensors" && tensors) *tensors = std::stoul(val);
  }
  return meta;
}

void write_named_tensor(std::ostream& os, const std::string& name,
                        const Tensor<float>& t) {
  write_u32(os, (uint32_t)name.size());
  os.write(name.data(), (std::streamsize)name.size());
  write_u32(os, (uint32_t)t.shape.size());
  for (int d : t.shape) write_u32(os, (uint32_t)d);
  os.write(reinterpret_cast<const char*>(t.ptr()),
           (std::streamsize)(t.numel() * sizeof(float)));
}

}  // namespace

void save_checkpoint(const std::filesystem::path& file,
                     const CheckpointMeta& meta,
                     const std::vector<ParamRef<float>>& params,
                     const std::vector<StateRef<float>>& state) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint " + file.string());
  os.write(kMagic, sizeof(kMagic));
  const std::string hdr = header_text(meta, params.size() + state.size());
  write_u32(os, (uint32_t)hdr.size());
  os.write(hdr.data(), (std::streamsize)hdr.size());
  for (const auto& p : params) write_named_tensor(os, p.name, p.param->value);
  for (const auto& s : state) write_named_tensor(os, s.name, *s.tensor);
  if (!os) throw IoError("failed writing checkpoint " + file.string());
}

namespace {

struct Reader {
  std::ifstream is;
  CheckpointMeta meta;
  std::size_t tensors = 0;

  explicit Reader(const std::filesystem::path& file)
      : is(file, std::ios::binary) {
    if (!is) throw IoError("cannot read checkpoint " + file.string());
    char magic[6];
    is.read(magic, 6);
    if (!is || std::memcmp(magic, kMagic, 6) != 0)
      throw InputError("not a lesionseg checkpoint: " + file.string());
    const uint32_t hlen = read_u32(is);
    std::string hdr(hlen, '\0');
    is.read(hdr.data(), hlen);
    meta = parse_header(hdr, &tensors);
  }

  bool next(std::string& name, Tensor<float>& t) {
    const uint32_t nlen = read_u32(is);
    if (!is) return false;
    name.assign(nlen, '\0');
    is.read(name.data(), nlen);
    const uint32_t ndim = read_u32(is);
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = (int)read_u32(is);
    t = Tensor<float>(shape);
    is.read(reinterpret_cast<char*>(t.ptr()),
            (std::streamsize)(t.numel() * sizeof(float)));
    return static_cast<bool>(is);
  }
};

}  // namespace

CheckpointMeta peek_checkpoint(const std::filesystem::path& file) {
  return Reader(file).meta;
}

void load_checkpoint_tensors(const std::filesystem::path& file,
                             const std::vector<ParamRef<float>>& params,
                             const std::vector<StateRef<float>>& state) {
  Reader r(file);
  std::string name;
  Tensor<float> t;
  std::size_t loaded = 0;
  while (r.next(name, t)) {
    Tensor<float>* dst = nullptr;
    for (const auto& p : params)
      if (p.name == name) dst = &p.param->value;
    for (const auto& s : state)
      if (s.name == name) dst = s.tensor;
    if (!dst) throw InputError("checkpoint tensor '" + name + "' has no home");
    if (dst->shape != t.shape)
      throw InputError("checkpoint tensor '" + name + "' shape mismatch");
    *dst = std::move(t);
    ++loaded;
  }
  if (loaded != params.size() + state.size())
    throw InputError("checkpoint " + file.string() + " is incomplete (" +
                     std::to_string(loaded) + " of " +
                     std::to_string(params.size() + state.size()) +
                     " tensors)");
}

LoadedHgn load_hgn_checkpoint(const std::filesystem::path& file) {
  LoadedHgn out;
  out.meta = peek_checkpoint(file);
  if (out.meta.kind != "hgn")
    throw InputError(file.string() + " is not an hgn checkpoint");
  out.net = std::make_shared<FrrnNet<float>>(FrrnConfig::parse(out.meta.arch));
  std::vector<ParamRef<float>> params;
  std::vector<StateRef<float>> state;
  out.net->collect(params, state);
  load_checkpoint_tensors(file, params, state);
  return out;
}

LoadedPrn load_prn_checkpoint(const std::filesystem::path& file) {
  LoadedPrn out;
  out.meta = peek_checkpoint(file);
  if (out.meta.kind != "prn")
    throw InputError(file.string() + " is not a prn checkpoint");
  out.net = std::make_shared<PrnNet<float>>(PrnConfig::parse(out.meta.arch));
  std::vector<ParamRef<float>> params;
  std::vector<StateRef<float>> state;
  out.net->collect(params, state);
  load_checkpoint_tensors(file, params, state);
  return out;
}

void save_hgn_checkpoint(const std::filesystem::path& file, FrrnNet<float>& net,
                         int epoch, double val_metric) {
  std::vector<ParamRef<float>> params;
  std::vector<StateRef<float>> state;
  net.collect(params, state);
  save_checkpoint(file, {"hgn", net.config().serialize(), epoch, val_metric},
                  params, state);
}

void save_prn_checkpoint(const std::filesystem::path& file, PrnNet<float>& net,
                         int epoch, double val_metric) {
  std::vector<ParamRef<float>> params;
  std::vector<StateRef<float>> state;
  net.collect(params, state);
  save_checkpoint(file, {"prn", net.config().serialize(), epoch, val_metric},
                  params, state);
}

namespace {

// "key=value;key=value" helpers for the arch strings.
std::vector<std::pair<std::string, std::string>> split_kv(const std::string& s) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream is(s);
  std::string part;
  while (std::getline(is, part, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos)
      kv.emplace_back(part, "");
    else
      kv.emplace_back(part.substr(0, eq), part.substr(eq + 1));
  }
  return kv;
}

std::vector<std::array<int, 3>> parse_triples(const std::string& s) {
  std::vector<std::array<int, 3>> out;
  if (s.empty()) return out;
  std::istringstream is(s);
  std::string part;
  while (std::getline(is, part, ',')) {
    std::array<int, 3> t{};
    if (std::sscanf(part.c_str(), "%d:%d:%d", &t[0], &t[1], &t[2]) != 3)
      throw InputError("bad stage triple '" + part + "'");
    out.push_back(t);
  }
  return out;
}

}  // namespace

}  // namespace lesionseg::nn

namespace lesionseg::nn {

FrrnConfig FrrnConfig::parse(const std::string& s) {
  FrrnConfig c;
  c.down.clear();
  c.up.clear();
  const auto kv = split_kv(s);
  if (kv.empty() || kv[0].first != "frrn")
    throw InputError("not an frrn architecture string: " + s);
  for (const auto& [k, v] : kv) {
    if (k == "frrn") continue;
    else if (k == "in") c.in_channels = std::stoi(v);
    else if (k == "classes") c.num_classes = std::stoi(v);
    else if (k == "stemk") c.stem_kernel = std::stoi(v);
    else if (k == "stemc") c.stem_channels = std::stoi(v);
    else if (k == "stemu") c.stem_units = std::stoi(v);
    else if (k == "finalu") c.final_units = std::stoi(v);
    else if (k == "res") c.residual_channels = std::stoi(v);
    else if (k == "down")
      for (auto t : parse_triples(v)) c.down.push_back({t[0], t[1], t[2]});
    else if (k == "up")
      for (auto t : parse_triples(v)) c.up.push_back({t[0], t[1], t[2]});
    else
      throw InputError("unknown frrn arch key '" + k + "'");
  }
  c.validate();
  return c;
}

PrnConfig PrnConfig::parse(const std::string& s) {
  PrnConfig c;
  c.stages.clear();
  const auto kv = split_kv(s);
  if (kv.empty() || kv[0].first != "prn")
    throw InputError("not a prn architecture string: " + s);
  for (const auto& [k, v] : kv) {
    if (k == "prn") continue;
    else if (k == "in") c.in_channels = std::stoi(v);
    else if (k == "classes") c.num_classes = std::stoi(v);
    else if (k == "patch") c.patch_size = std::stoi(v);
    else if (k == "stemc") c.stem_channels = std::stoi(v);
    else if (k == "stemk") c.stem_kernel = std::stoi(v);
    else if (k == "stems") c.stem_stride = std::stoi(v);
    else if (k == "pool") c.stem_pool = std::stoi(v) != 0;
    else if (k == "bottleneck") c.bottleneck = std::stoi(v) != 0;
    else if (k == "stages")
      for (auto t : parse_triples(v)) c.stages.push_back({t[0], t[1], t[2]});
    else
      throw InputError("unknown prn arch key '" + k + "'");
  }
  if (c.stages.empty()) throw InputError("prn arch has no stages");
  return c;
}

}  // namespace lesionseg::nn
