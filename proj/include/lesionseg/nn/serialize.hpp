#ifndef LESIONSEG_NN_SERIALIZE_HPP_
#define LESIONSEG_NN_SERIALIZE_HPP_

#include <filesystem>
#include <memory>

#include "lesionseg/nn/frrn.hpp"
#include "lesionseg/nn/resnet.hpp"

namespace lesionseg::nn {

// Self-describing parameter archive: magic "LSCK1", text header (model kind,
// architecture string, epoch, validation metric), then named float32 tensors
// little-endian. Contains nothing time- or path-dependent, so identical
// training runs produce bit-identical files.
struct CheckpointMeta {
  std::string kind;  // "hgn" | "prn"
  std::string arch;  // FrrnConfig/PrnConfig serialization
  int epoch = 0;
  double val_metric = 0.0;
};

void save_checkpoint(const std::filesystem::path& file,
                     const CheckpointMeta& meta,
                     const std::vector<ParamRef<float>>& params,
                     const std::vector<StateRef<float>>& state);

CheckpointMeta peek_checkpoint(const std::filesystem::path& file);

// Loads tensors by name into an already-constructed net's params/state.
void load_checkpoint_tensors(const std::filesystem::path& file,
                             const std::vector<ParamRef<float>>& params,
                             const std::vector<StateRef<float>>& state);

struct LoadedHgn {
  std::shared_ptr<FrrnNet<float>> net;
  CheckpointMeta meta;
};
struct LoadedPrn {
  std::shared_ptr<PrnNet<float>> net;
  CheckpointMeta meta;
};

LoadedHgn load_hgn_checkpoint(const std::filesystem::path& file);
LoadedPrn load_prn_checkpoint(const std::filesystem::path& file);

void save_hgn_checkpoint(const std::filesystem::path& file, FrrnNet<float>& net,
                         int epoch, double val_metric);
void save_prn_checkpoint(const std::filesystem::path& file, PrnNet<float>& net,
                         int epoch, double val_metric);

}  // namespace lesionseg::nn

#endif  // LESIONSEG_NN_SERIALIZE_HPP_
