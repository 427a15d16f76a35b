#pragma once

#include <memory>
#include <optional>
#include <string>

#include "flock/model.hpp"
#include "flock/optim.hpp"

namespace flock {

// Checkpoint container, little-endian throughout:
//   u32 magic "FLKC" (0x434b4c46 on disk), u32 format version (1),
//   u64 header length, header JSON (model config, parameter manifest of
//   name/rows/cols in serialization order, optimizer step count if any),
//   then raw float64 parameter arrays in manifest order, then, when the
//   optimizer is included, first- and second-moment arrays per parameter.
inline constexpr uint32_t kCheckpointMagic = 0x434b4c46;
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, FlockModel& model,
                     const nn::AdamW* optimizer = nullptr);

struct LoadedCheckpoint {
  std::unique_ptr<FlockModel> model;
  bool has_optimizer = false;
  long optimizer_step = 0;
  std::vector<nn::Array> first_moments, second_moments;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace flock
