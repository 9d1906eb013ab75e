#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace whamkit::nn {

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState zeros(Eigen::Index n);
};

// Bias-corrected Adam update with one learning rate per parameter. Entries
// with learning rate 0 are frozen: neither the parameter nor its moments
// change. Throws InvalidInput when lengths disagree.
void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               const Eigen::VectorXd& lr);
void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grads, double lr);

}  // namespace whamkit::nn
