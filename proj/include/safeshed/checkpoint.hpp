#pragma once

#include <cstdint>
#include <string>

#include "safeshed/trainer.hpp"

#include "json.hpp"

namespace safeshed {

// Versioned little-endian binary bundle of the full training state.
// save -> load -> save is byte-identical.
struct Checkpoint {
  std::uint32_t version = 1;
  std::uint64_t config_hash = 0;
  TrainerState state;

  static Checkpoint from_state(const TrainerState& state, std::uint64_t config_hash);
};

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Lossless structured-text export for debugging; weight and stats values are
// emitted both as decimals and raw IEEE-754 bit patterns.
nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);

}  // namespace safeshed
