#pragma once

#include "whamkit/nn/gradcheck.h"

#include <string>
#include <vector>

namespace whamkit::app {

struct GradCase {
  std::string name;
  nn::GradCheckReport report;
  double seconds = 0.0;
};

// grad_check over every layer type and over the composed model at toy dims
// (hidden 8, 4 frames, batch 2): each loss term alone, then the weighted
// total, in both training init modes.
std::vector<GradCase> run_gradient_suite(const nn::GradCheckOptions& options = {}, std::uint64_t seed = 13);

std::string to_text(const std::vector<GradCase>& cases);

}  // namespace whamkit::app
