#pragma once

#include "whamkit/core/error.h"
#include "whamkit/losses/losses.h"
#include "whamkit/model/wham.h"

#include <cstdint>
#include <filesystem>
#include <string>

namespace whamkit::app {

// Raised for bad configuration values or unknown keys.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// A required checkpoint (resume or finetune init) does not exist.
class MissingCheckpoint : public IoError {
 public:
  using IoError::IoError;
};

// An output failed its post-write self-check.
class ValidationError : public Error {
 public:
  using Error::Error;
};

enum class Stage { kPretrain, kFinetune };

std::string stage_name(Stage s);

// Training configuration. Text form is one `key = value` per line, `#`
// starts a comment; later assignments win, so command-line overrides are
// applied after the file.
struct RunConfig {
  Stage stage = Stage::kPretrain;
  std::filesystem::path dataset;
  std::filesystem::path out;
  std::filesystem::path init;  // pretrain checkpoint for finetuning
  std::uint64_t seed = 0;
  int epochs = -1;             // -1: stage default (80 pretrain, 30 finetune)
  double lr = 5e-4;            // pretraining
  double lr_new = 1e-4;        // finetuning: feature integrator
  double lr_pretrained = 1e-5; // finetuning: everything else
  int batch = 64;
  int chunk = 81;
  model::ModelDims dims;
  losses::LossWeights weights;
  double init_noise = 0.02;    // m, noise on the truth frame-0 pose fed to the init MLP
  bool integrator = true;      // finetune with the feature integrator
  bool validate = true;        // log the validation loss each epoch
  bool augment = true;         // new yaw, camera and keypoint draws per epoch

  int resolved_epochs() const;
  void set(const std::string& key, const std::string& value);
  // Parses "key=value".
  void set_assignment(const std::string& assignment);
  void load_file(const std::filesystem::path& path);
  void validate_values() const;
  std::string to_text() const;
};

}  // namespace whamkit::app
