#include "whamkit/app/commands.h"

#include "whamkit/app/config.h"
#include "whamkit/app/train.h"
#include "whamkit/core/parallel.h"
#include "whamkit/model/output.h"
#include "whamkit/nn/checkpoint.h"

#include <fstream>
#include <sstream>

namespace whamkit::app {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Parses a scalar or a comma list as JSON numbers.
Json parse_value(const std::string& key, const std::string& v) {
  try {
    if (v.find(',') != std::string::npos) return Json::parse("[" + v + "]");
    return Json::parse(v);
  } catch (const Json::exception&) {
    throw ConfigError("synth config: " + key + " expects a number, got '" + v + "'");
  }
}

}  // namespace

void SynthRun::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string v = trim(value_in);
  if (key == "out") {
    out = v;
    return;
  }
  if (key == "count" || key == "seed") {
    const Json j = parse_value(key, v);
    if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError("synth config: " + key + " must be a non-negative integer");
    if (key == "count") count = j.get<int>();
    else seed = j.get<std::uint64_t>();
    return;
  }
  Json cfg = synth::config_to_json(config);
  Json* slot = &cfg;
  std::string leaf = key;
  if (key.rfind("camera.", 0) == 0) {
    slot = &cfg["camera"];
    leaf = key.substr(7);
  }
  if (!slot->contains(leaf)) throw ConfigError("synth config: unknown key '" + key + "'");
  const Json value = parse_value(key, v);
  if ((*slot)[leaf].is_number_integer() && !value.is_number_integer()) {
    throw ConfigError("synth config: " + key + " expects an integer");
  }
  (*slot)[leaf] = value;
  try {
    config = synth::config_from_json(cfg);
  } catch (const Error& e) {
    throw ConfigError(std::string("synth config: ") + key + ": " + e.what());
  }
}

void SynthRun::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("synth config: expected key=value, got '" + assignment + "'");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void SynthRun::load_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      set_assignment(line);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

synth::Manifest run_synth(const SynthRun& run) {
  if (run.out.empty()) throw ConfigError("synth: no output directory");
  if (run.count < 0) throw ConfigError("synth: count must be >= 0");
  try {
    run.config.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  const synth::Manifest m = synth::write_dataset(run.out, run.config, run.count, run.seed);
  validate_dataset(run.out);
  return m;
}

void validate_dataset(const fs::path& dir) {
  synth::Manifest m;
  try {
    m = synth::read_manifest(dir);
  } catch (const Error& e) {
    throw ValidationError(std::string("dataset self-check: ") + e.what());
  }
  if (synth::config_hash(m.config) != m.config_hash) throw ValidationError("dataset self-check: config hash mismatch");
  if (static_cast<int>(m.train.size() + m.val.size() + m.test.size()) != m.count) {
    throw ValidationError("dataset self-check: splits do not cover the sequences");
  }
  const synth::SynthConfig cfg = synth::config_from_json(m.config);
  std::vector<std::string> errors(static_cast<std::size_t>(m.count));
  parallel_for(errors.size(), [&](std::size_t i) {
    try {
      const synth::Sample s = synth::load_sample(dir, static_cast<int>(i), m);
      if (s.motion.length() != cfg.sequence_length || s.camera.length() != cfg.sequence_length ||
          s.keypoints.length() != cfg.sequence_length ||
          static_cast<int>(s.features.rows()) != cfg.sequence_length) {
        errors[i] = "stream lengths differ from the manifest";
      } else if (s.gait != m.gaits.at(i)) {
        errors[i] = "gait differs from the manifest";
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw ValidationError("dataset self-check: sequence " + std::to_string(i) + ": " + errors[i]);
  }
}

int run_infer(const fs::path& checkpoint, const fs::path& dataset, const fs::path& out, const EvalOptions& opt) {
  if (!fs::exists(checkpoint)) throw MissingCheckpoint("infer needs a checkpoint: " + checkpoint.string());
  const nn::Checkpoint c = nn::load_checkpoint(checkpoint);
  const model::WhamParams params = params_from_checkpoint(c);
  const synth::Manifest m = synth::read_manifest(dataset);
  if (m.feature_dim != params.dims.feature) throw ConfigError("checkpoint feature_dim differs from the dataset");
  const std::vector<int>& indices = m.split(opt.split);
  const model::ForwardOptions fwd = forward_options(c.stage, opt);
  fs::create_directories(out);
  parallel_for(indices.size(), [&](std::size_t i) {
    const int k = indices[i];
    const auto seq = model::canonicalize(synth::load_sample(dataset, k, m));
    const fs::path path = out / ("seq_" + std::to_string(k) + ".output.ndjson");
    const model::WhamOutput o = model::infer(params, seq, fwd);
    model::save_output(path, o);
    std::ifstream in(path, std::ios::binary);
    const model::WhamOutput back = model::read_output(in);
    if (back.length() != o.length()) throw ValidationError("infer self-check failed for " + path.string());
  });
  return static_cast<int>(indices.size());
}

}  // namespace whamkit::app
