#pragma once

#include "whamkit/metrics/metrics.h"
#include "whamkit/model/batch.h"
#include "whamkit/model/network.h"
#include "whamkit/model/output.h"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace whamkit::app {

struct EvalOptions {
  std::string split = "test";
  bool oracle = false;  // score the truth against itself
  bool no_integrator = false;
  bool no_omega = false;
  bool no_refiner = false;
  bool no_neural_init = false;
  bool plots = true;
};

struct SequenceEval {
  int index = 0;  // dataset index
  std::string gait;
  metrics::MetricReport report;
  std::vector<Vec3> pred_root;
  std::vector<Vec3> truth_root;
};

struct EvalResult {
  std::vector<SequenceEval> sequences;
  metrics::MetricReport aggregate;
};

model::ForwardOptions forward_options(const std::string& stage, const EvalOptions& opt);

// Truth camera-frame landmarks of every frame.
std::vector<Points3> camera_landmarks(const model::SequenceData& seq);

metrics::MetricReport score(const model::WhamOutput& out, const model::SequenceData& seq);
metrics::MetricReport score_oracle(const model::SequenceData& seq);

// Parallel over sequences (WHAMKIT_THREADS); results keep split order.
// `params` may be null only in oracle mode.
EvalResult evaluate(const model::WhamParams* params, const std::string& stage, const std::vector<int>& indices,
                    const std::vector<model::SequenceData>& seqs, const EvalOptions& opt);

// Loads the checkpoint (unless oracle) and the split, evaluates, writes
// <out>/metrics.csv and, with plots on, <out>/traj_<index>.svg. The CSV is
// re-read afterwards as a self-check.
EvalResult run_eval(const std::optional<std::filesystem::path>& checkpoint, const std::filesystem::path& dataset,
                    const std::filesystem::path& out, const EvalOptions& opt);

std::string metrics_csv(const EvalResult& r);

// Top-down (x, z) plot of a predicted and a truth root path, axes in meters.
std::string trajectory_svg(const std::vector<Vec3>& pred, const std::vector<Vec3>& truth, const std::string& title);

}  // namespace whamkit::app
