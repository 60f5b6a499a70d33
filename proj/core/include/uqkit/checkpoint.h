#ifndef UQKIT_CHECKPOINT_H_
#define UQKIT_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "uqkit/network.h"

namespace uqkit {

// A checkpoint is a directory holding one <f8 NPY file per tensor
// (layer<i>.<name>.npy, prior tensors included) and manifest.json with layer
// kinds, dimensions, activation tags, task and rng seed. `extra` is copied
// into the manifest under "extra".
void SaveCheckpoint(const ToyNet& net, const std::filesystem::path& dir,
                    std::uint64_t seed, const nlohmann::json& extra = {});

struct LoadedCheckpoint {
  ToyNet net;
  std::uint64_t seed = 0;
  nlohmann::json manifest;
};

LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& dir);

}  // namespace uqkit

#endif  // UQKIT_CHECKPOINT_H_
