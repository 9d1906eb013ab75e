#pragma once

#include "whamkit/app/evaluate.h"
#include "whamkit/synth/dataset.h"

#include <filesystem>
#include <string>

namespace whamkit::app {

// Dataset generation settings. Keys of the text form are the generator
// fields (sequence_length, fps, mask_prob, camera.pitch_mean, ...; gait_mix
// as four comma-separated weights) plus out, count and seed.
struct SynthRun {
  std::filesystem::path out;
  int count = 200;
  std::uint64_t seed = 0;
  synth::SynthConfig config;

  void set(const std::string& key, const std::string& value);
  void set_assignment(const std::string& assignment);
  void load_file(const std::filesystem::path& path);
};

// Writes the dataset, then reloads the manifest and every sequence file.
// Throws ValidationError when anything fails to load or disagrees with the
// manifest.
synth::Manifest run_synth(const SynthRun& run);
void validate_dataset(const std::filesystem::path& dir);

// Writes <out>/seq_<index>.output.ndjson for every sequence of a split.
int run_infer(const std::filesystem::path& checkpoint, const std::filesystem::path& dataset,
              const std::filesystem::path& out, const EvalOptions& opt);

}  // namespace whamkit::app
