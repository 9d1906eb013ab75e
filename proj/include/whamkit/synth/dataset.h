#pragma once

#include "whamkit/core/ndjson.h"
#include "whamkit/synth/camera.h"
#include "whamkit/synth/features.h"
#include "whamkit/synth/keypoints.h"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace whamkit::synth {

struct Sample {
  std::string gait;
  body::MotionSequence motion;
  CameraTrajectory camera;
  KeypointSequence2D keypoints;
  FeatureRows features;
};

struct Manifest {
  Json config;
  std::string config_hash;
  std::uint64_t seed = 0;
  int count = 0;
  int feature_dim = 0;
  std::vector<std::string> gaits;
  std::vector<int> train, val, test;

  Json to_json() const;
  static Manifest from_json(const Json& j);

  // "train", "val" or "test"; throws InvalidInput otherwise.
  const std::vector<int>& split(const std::string& name) const;
};

Json config_to_json(const SynthConfig& cfg);
SynthConfig config_from_json(const Json& j);

// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const Json& config);

// Sequence `index` of a dataset: random gait, speed change, bone-scale
// noise and root yaw, then camera, keypoints and proxy features.
Sample generate_sample(const SynthConfig& cfg, std::uint64_t seed, int index,
                       const FeatureEncoder& encoder);

// The encoder shared by every sequence of a dataset.
FeatureEncoder dataset_encoder(const Manifest& m);

// A fresh view of a stored sequence: new root yaw, camera path, 2D keypoints
// and feature noise; motion, bone scales and contact labels are kept.
Sample redraw_view(const Sample& s, const SynthConfig& cfg, const FeatureEncoder& encoder, std::uint64_t seed);

// 70/15/15 train/val/test assignment from a seeded permutation.
void assign_splits(Manifest& m);

// Writes seq_<k>.{ndjson,cam.ndjson,kp2d.ndjson,feat.bin} for k < count plus
// manifest.json. Sequences are generated in parallel; output does not depend
// on the worker count.
Manifest write_dataset(const std::filesystem::path& dir, const SynthConfig& cfg, int count,
                       std::uint64_t seed);

Manifest read_manifest(const std::filesystem::path& dir);
Sample load_sample(const std::filesystem::path& dir, int index, const Manifest& manifest);
void save_sample(const std::filesystem::path& dir, int index, const Sample& sample);

void write_camera(std::ostream& out, const CameraTrajectory& cam);
CameraTrajectory read_camera(std::istream& in, const std::string& source = "<stream>");
void write_keypoints(std::ostream& out, const KeypointSequence2D& kp);
KeypointSequence2D read_keypoints(std::istream& in, const std::string& source = "<stream>");

// Little-endian f32, one row per frame.
void write_features(const std::filesystem::path& path, const FeatureRows& rows);
FeatureRows read_features(const std::filesystem::path& path, int dim);

}  // namespace whamkit::synth
