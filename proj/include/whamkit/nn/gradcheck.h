#pragma once

#include "whamkit/nn/params.h"

#include <functional>
#include <string>
#include <vector>

namespace whamkit::nn {

// Loss as a function of the flat parameter vector. When `grad` is non-null
// the analytic gradient is written to it.
using LossFn = std::function<double(const Eigen::VectorXd& params, Eigen::VectorXd* grad)>;

struct GradCheckOptions {
  double delta = 1e-5;
  double tolerance = 1e-4;
  // Relative error is |a - n| / max(|a|, |n|, floor * max(1, |L|)). The
  // floor keeps entries whose true gradient is ~0 from dividing round-off
  // by round-off; it grows with the loss value because the round-off in a
  // central difference is about eps * |L| / delta.
  double floor = 1e-6;
};

struct BlockReport {
  std::string name;
  double max_rel_error = 0.0;
  Eigen::Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  std::vector<BlockReport> blocks;
  double max_rel_error = 0.0;
  bool passed = false;
};

// Central differences on every parameter, grouped by the store's blocks.
GradCheckReport grad_check(const ParamStore& store, const LossFn& loss,
                           const GradCheckOptions& options = {});

// As above with a caller-supplied analytic gradient (used for fault
// injection tests).
GradCheckReport grad_check(const ParamStore& store, const LossFn& loss,
                           const Eigen::VectorXd& analytic, const GradCheckOptions& options);

}  // namespace whamkit::nn
