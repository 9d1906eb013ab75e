#include "whamkit/app/train.h"

#include "whamkit/core/parallel.h"
#include "whamkit/core/random.h"
#include "whamkit/model/network.h"
#include "whamkit/nn/adam.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace whamkit::app {

namespace fs = std::filesystem;
using model::SequenceData;

namespace {

std::string fmt(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string log_csv(const std::vector<EpochLog>& log, bool with_val) {
  std::ostringstream s;
  s << "epoch,term,value\n";
  for (const auto& e : log) {
    for (int k = 0; k < losses::kNumTerms; ++k) {
      s << e.epoch << ',' << losses::term_name(k) << ',' << fmt(e.train.terms[k]) << '\n';
    }
    s << e.epoch << ",total," << fmt(e.train.total) << '\n';
    if (with_val) s << e.epoch << ",val_total," << fmt(e.val_total) << '\n';
  }
  return s.str();
}

// Reads back the rows of epochs < `upto` from an existing log.
std::vector<EpochLog> read_log(const fs::path& path, int upto) {
  std::vector<EpochLog> out(static_cast<std::size_t>(upto));
  for (int e = 0; e < upto; ++e) {
    out[static_cast<std::size_t>(e)].epoch = e;
    out[static_cast<std::size_t>(e)].val_total = std::numeric_limits<double>::quiet_NaN();
  }
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string epoch, term, value;
    if (!std::getline(row, epoch, ',') || !std::getline(row, term, ',') || !std::getline(row, value)) {
      throw FormatError(path.string() + ": malformed row '" + line + "'");
    }
    const int e = std::stoi(epoch);
    if (e >= upto) continue;
    const double v = value == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(value);
    auto& entry = out[static_cast<std::size_t>(e)];
    if (term == "total") entry.train.total = v;
    else if (term == "val_total") entry.val_total = v;
    else {
      for (int k = 0; k < losses::kNumTerms; ++k) {
        if (losses::term_name(k) == term) entry.train.terms[k] = v;
      }
    }
  }
  return out;
}

Eigen::VectorXd learning_rates(const model::WhamParams& p, const RunConfig& cfg) {
  Eigen::VectorXd lr(p.store.size());
  for (const auto& b : p.store.blocks()) {
    double rate;
    if (cfg.stage == Stage::kPretrain) {
      rate = b.group == model::kGroupIntegrator ? 0.0 : cfg.lr;
    } else if (b.group == model::kGroupIntegrator) {
      rate = cfg.integrator ? cfg.lr_new : 0.0;
    } else {
      rate = cfg.lr_pretrained;
    }
    lr.segment(b.offset, b.size()).setConstant(rate);
  }
  return lr;
}

double validation_loss(const model::WhamParams& p, const std::vector<SequenceData>& val, const RunConfig& cfg,
                       const model::ForwardOptions& train_opt) {
  if (val.empty()) return std::numeric_limits<double>::quiet_NaN();
  model::ForwardOptions opt = train_opt;
  opt.init = model::InitMode::kPredicted;
  double sum = 0.0;
  for (std::size_t begin = 0; begin < val.size(); begin += static_cast<std::size_t>(cfg.batch)) {
    std::vector<const SequenceData*> ptr;
    for (std::size_t i = begin; i < std::min(val.size(), begin + static_cast<std::size_t>(cfg.batch)); ++i) {
      ptr.push_back(&val[i]);
    }
    const model::Batch batch = model::make_batch(ptr);
    nn::Tape tape(&p.store);
    const auto r = model::forward(tape, model::bind(tape, p), batch, opt);
    sum += losses::total_loss(r, batch, cfg.weights).total.value()(0, 0) * static_cast<double>(ptr.size());
  }
  return sum / static_cast<double>(val.size());
}

}  // namespace

std::vector<int> permutation(int n, std::uint64_t seed) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  return order;
}

bool stage_uses_integrator(const std::string& stage) { return stage == kStageFinetune; }

model::WhamParams params_from_checkpoint(const nn::Checkpoint& ckpt) {
  model::WhamParams p = model::WhamParams::zeros(model::ModelDims::from_vector(ckpt.dims));
  if (ckpt.params.size() != p.store.size()) throw FormatError("checkpoint parameter count does not match its dims");
  p.store.values() = ckpt.params;
  return p;
}

nn::Checkpoint checkpoint_from_params(const model::WhamParams& p, std::uint32_t epoch, const std::string& stage) {
  nn::Checkpoint c;
  c.dims = p.dims.to_vector();
  c.epoch = epoch;
  c.stage = stage;
  c.params = p.store.values();
  return c;
}

synth::Sample slice_sample(const synth::Sample& s, int begin, int count) {
  if (begin < 0 || count < 2 || begin + count > s.motion.length()) throw IndexError("slice_sample: range out of bounds");
  synth::Sample out;
  out.gait = s.gait;
  out.motion = body::slice_frames(s.motion, begin, count);
  const auto b = static_cast<std::ptrdiff_t>(begin);
  const auto e = static_cast<std::ptrdiff_t>(begin + count);
  out.camera = synth::CameraTrajectory::from_extrinsics(
      s.camera.fps, s.camera.intrinsics, std::vector<Rotation>(s.camera.rotation.begin() + b, s.camera.rotation.begin() + e),
      std::vector<Vec3>(s.camera.translation.begin() + b, s.camera.translation.begin() + e));
  const auto& k = s.keypoints;
  out.keypoints.image_width = k.image_width;
  out.keypoints.image_height = k.image_height;
  out.keypoints.keypoints.assign(k.keypoints.begin() + b, k.keypoints.begin() + e);
  out.keypoints.mask.assign(k.mask.begin() + b, k.mask.begin() + e);
  out.keypoints.center.assign(k.center.begin() + b, k.center.begin() + e);
  out.keypoints.scale.assign(k.scale.begin() + b, k.scale.begin() + e);
  out.keypoints.carried.assign(k.carried.begin() + b, k.carried.begin() + e);
  out.features = s.features.middleRows(begin, count);
  return out;
}

std::vector<SequenceData> load_split(const fs::path& dataset, const std::string& split) {
  const synth::Manifest m = synth::read_manifest(dataset);
  std::vector<SequenceData> out;
  for (int i : m.split(split)) out.push_back(model::canonicalize(synth::load_sample(dataset, i, m)));
  return out;
}

TrainResult train(const RunConfig& cfg, bool resume) {
  cfg.validate_values();
  if (cfg.out.empty()) throw ConfigError("config: out directory is required");
  const synth::Manifest manifest = synth::read_manifest(cfg.dataset);
  if (manifest.feature_dim != cfg.dims.feature) {
    throw ConfigError("config: feature_dim " + std::to_string(cfg.dims.feature) + " does not match the dataset (" +
                      std::to_string(manifest.feature_dim) + ")");
  }
  const std::string stage = cfg.stage == Stage::kPretrain ? kStagePretrain
                            : cfg.integrator              ? kStageFinetune
                                                          : kStageFinetuneNoIntegrator;
  fs::create_directories(cfg.out);
  const fs::path ckpt_path = cfg.out / kCheckpointFile;
  const fs::path log_path = cfg.out / kTrainLogFile;

  model::WhamParams params;
  nn::AdamState adam;
  int start = 0;
  std::vector<EpochLog> log;
  if (resume) {
    if (!fs::exists(ckpt_path)) throw MissingCheckpoint("no checkpoint to resume at " + ckpt_path.string());
    const nn::Checkpoint c = nn::load_checkpoint(ckpt_path);
    if (c.stage != stage) throw ConfigError("resume: checkpoint stage '" + c.stage + "' differs from '" + stage + "'");
    params = params_from_checkpoint(c);
    if (!(params.dims == cfg.dims)) throw ConfigError("resume: checkpoint dims differ from the config");
    adam = c.adam ? *c.adam : nn::AdamState::zeros(params.store.size());
    start = static_cast<int>(c.epoch);
    log = read_log(log_path, start);
  } else if (cfg.stage == Stage::kPretrain) {
    params = model::WhamParams::create(cfg.dims, cfg.seed);
    adam = nn::AdamState::zeros(params.store.size());
  } else {
    if (cfg.init.empty() || !fs::exists(cfg.init)) {
      throw MissingCheckpoint("finetune needs a pretrain checkpoint (init = " + cfg.init.string() + ")");
    }
    const nn::Checkpoint c = nn::load_checkpoint(cfg.init);
    if (c.stage != kStagePretrain) throw ConfigError("finetune init must be a pretrain checkpoint, got '" + c.stage + "'");
    params = params_from_checkpoint(c);
    if (!(params.dims == cfg.dims)) throw ConfigError("finetune: init checkpoint dims differ from the config");
    adam = nn::AdamState::zeros(params.store.size());
  }
  write_text(cfg.out / "config.txt", cfg.to_text());

  std::vector<synth::Sample> raw;
  for (int i : manifest.train) {
    raw.push_back(synth::load_sample(cfg.dataset, i, manifest));
    if (raw.back().motion.length() < cfg.chunk) throw ConfigError("config: chunk is longer than the sequences");
  }
  const synth::SynthConfig synth_cfg = synth::config_from_json(manifest.config);
  const synth::FeatureEncoder encoder = synth::dataset_encoder(manifest);
  const std::vector<SequenceData> val = cfg.validate ? load_split(cfg.dataset, "val") : std::vector<SequenceData>{};

  model::ForwardOptions opt;
  opt.integrator = cfg.stage == Stage::kFinetune && cfg.integrator;
  opt.init = model::InitMode::kTruth;
  const Eigen::VectorXd lr = learning_rates(params, cfg);
  const int epochs = cfg.resolved_epochs();
  const int n = static_cast<int>(raw.size());

  auto save = [&](int epoch) {
    nn::Checkpoint c = checkpoint_from_params(params, static_cast<std::uint32_t>(epoch), stage);
    c.adam = adam;
    nn::save_checkpoint(ckpt_path, c);
    return c;
  };
  TrainResult result;
  result.checkpoint = save(start);
  write_text(log_path, log_csv(log, cfg.validate));

  for (int epoch = start; epoch < epochs; ++epoch) {
    const std::vector<int> order = permutation(n, derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    Rng chunk_rng(derive_seed(cfg.seed, 2000 + static_cast<std::uint64_t>(epoch)));
    EpochLog entry;
    entry.epoch = epoch;
    int batch_index = 0;
    std::vector<synth::Sample> views;
    if (cfg.augment) {
      views.resize(raw.size());
      const std::uint64_t view_seed = derive_seed(cfg.seed, 3000 + static_cast<std::uint64_t>(epoch));
      parallel_for(raw.size(), [&](std::size_t i) {
        views[i] = synth::redraw_view(raw[i], synth_cfg, encoder, derive_seed(view_seed, i));
      });
    }
    const std::vector<synth::Sample>& source = cfg.augment ? views : raw;
    for (int begin = 0; begin < n; begin += cfg.batch, ++batch_index) {
      std::vector<SequenceData> seqs;
      const int end = std::min(n, begin + cfg.batch);
      for (int i = begin; i < end; ++i) {
        const synth::Sample& sample = source[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        const int len = sample.motion.length();
        if (cfg.chunk < len) {
          const int offset = static_cast<int>(chunk_rng() % static_cast<std::uint64_t>(len - cfg.chunk + 1));
          seqs.push_back(model::canonicalize(slice_sample(sample, offset, cfg.chunk)));
        } else {
          seqs.push_back(model::canonicalize(sample));
        }
      }
      std::vector<const SequenceData*> ptr;
      for (const auto& q : seqs) ptr.push_back(&q);
      const std::uint64_t noise_seed =
          derive_seed(cfg.seed, (static_cast<std::uint64_t>(epoch) << 20) + static_cast<std::uint64_t>(batch_index));
      const model::Batch batch = model::make_batch(ptr, cfg.init_noise, noise_seed);

      nn::Tape tape(&params.store);
      const auto r = model::forward(tape, model::bind(tape, params), batch, opt);
      const auto g = losses::total_loss(r, batch, cfg.weights);
      const auto values = g.values();
      if (!std::isfinite(values.total)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index));
      }
      tape.backward(g.total);
      if (!tape.param_grad().allFinite()) {
        throw NumericError("non-finite gradient at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
      }
      nn::adam_step(adam, params.store.values(), tape.param_grad(), lr);
      const double w = static_cast<double>(ptr.size()) / n;
      for (int k = 0; k < losses::kNumTerms; ++k) entry.train.terms[k] += w * values.terms[k];
      entry.train.total += w * values.total;
    }
    entry.val_total = cfg.validate ? validation_loss(params, val, cfg, opt) : std::numeric_limits<double>::quiet_NaN();
    log.push_back(entry);
    result.checkpoint = save(epoch + 1);
    write_text(log_path, log_csv(log, cfg.validate));
  }

  // Self-check: the checkpoint on disk reloads to the same parameters.
  const nn::Checkpoint back = nn::load_checkpoint(ckpt_path);
  if (back.params != params.store.values() || back.epoch != static_cast<std::uint32_t>(std::max(start, epochs))) {
    throw ValidationError("checkpoint did not reload identically");
  }
  result.log = log;
  return result;
}

}  // namespace whamkit::app
