#pragma once

#include "whamkit/app/config.h"
#include "whamkit/losses/losses.h"
#include "whamkit/model/batch.h"
#include "whamkit/model/wham.h"
#include "whamkit/nn/checkpoint.h"

#include <filesystem>
#include <string>
#include <vector>

namespace whamkit::app {

// Checkpoint stage tags.
inline const std::string kStagePretrain = "pretrain";
inline const std::string kStageFinetune = "finetune";
inline const std::string kStageFinetuneNoIntegrator = "finetune-no-integrator";

inline const char* kCheckpointFile = "checkpoint.bin";
inline const char* kTrainLogFile = "train_log.csv";

struct EpochLog {
  int epoch = 0;
  losses::LossBreakdown train;
  double val_total = 0.0;  // NaN when validation is off
};

struct TrainResult {
  nn::Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

// Runs one training stage and writes <out>/checkpoint.bin after every
// epoch, <out>/train_log.csv (epoch,term,value) and <out>/config.txt. With
// `resume` the stage continues from <out>/checkpoint.bin. A non-finite loss
// or gradient aborts with NumericError; the checkpoint of the last finished
// epoch stays on disk.
TrainResult train(const RunConfig& cfg, bool resume);

model::WhamParams params_from_checkpoint(const nn::Checkpoint& ckpt);
nn::Checkpoint checkpoint_from_params(const model::WhamParams& p, std::uint32_t epoch, const std::string& stage);

// Whether a checkpoint's stage runs the feature integrator.
bool stage_uses_integrator(const std::string& stage);

// Loads and canonicalizes every sequence of a split.
std::vector<model::SequenceData> load_split(const std::filesystem::path& dataset, const std::string& split);

// Frames [begin, begin + count) of every stream of a sample.
synth::Sample slice_sample(const synth::Sample& s, int begin, int count);

std::vector<int> permutation(int n, std::uint64_t seed);

}  // namespace whamkit::app
