#pragma once

#include "whamkit/nn/adam.h"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace whamkit::nn {

inline constexpr char kCheckpointMagic[8] = {'W', 'H', 'A', 'M', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout is documented in docs/checkpoint.md.
struct Checkpoint {
  std::vector<std::uint32_t> dims;  // model dimensions, checked on load
  std::uint32_t epoch = 0;
  std::string stage;                // "init", "pretrain" or "finetune"
  Eigen::VectorXd params;
  std::optional<AdamState> adam;
};

// Writes to <path>.tmp and renames, so an interrupted write never replaces
// a good checkpoint.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

// Throws IoError when the file is missing and FormatError on a bad magic,
// an unknown version or a truncated body.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace whamkit::nn
