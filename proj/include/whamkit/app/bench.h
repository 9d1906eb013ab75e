#pragma once

#include "whamkit/model/network.h"

#include <string>
#include <vector>

namespace whamkit::app {

struct BenchMode {
  int batch = 1;
  std::vector<double> runs;  // frames per second of each run
  double median = 0.0;
};

struct BenchReport {
  int frames = 0;
  int hidden = 0;
  BenchMode batch1;
  BenchMode batch64;
};

// Times the core recurrent inference (encode, decode, trajectory, refine,
// roll-out) on 64 generated sequences: one at a time, then as one batch.
// Runs on the calling thread only.
BenchReport run_bench(const model::WhamParams& params, const model::ForwardOptions& opt = {}, int runs = 5,
                      int frames = 81, std::uint64_t seed = 1);

std::string to_text(const BenchReport& r);

}  // namespace whamkit::app
