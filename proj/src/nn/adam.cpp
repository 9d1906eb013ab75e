#include "whamkit/nn/adam.h"

#include "whamkit/core/error.h"

#include <cmath>

namespace whamkit::nn {

AdamState AdamState::zeros(Eigen::Index n) {
  AdamState s;
  s.m = Eigen::VectorXd::Zero(n);
  s.v = Eigen::VectorXd::Zero(n);
  return s;
}

void adam_step(AdamState& s, Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               const Eigen::VectorXd& lr) {
  const Eigen::Index n = params.size();
  if (grads.size() != n || lr.size() != n || s.m.size() != n || s.v.size() != n) {
    throw InvalidInput("adam_step: parameter, gradient, rate and moment lengths differ");
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lr[i] == 0.0) continue;
    const double g = grads[i];
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g;
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g * g;
    const double mhat = s.m[i] / c1;
    const double vhat = s.v[i] / c2;
    params[i] -= lr[i] * mhat / (std::sqrt(vhat) + s.eps);
  }
}

void adam_step(AdamState& s, Eigen::VectorXd& params, const Eigen::VectorXd& grads, double lr) {
  adam_step(s, params, grads, Eigen::VectorXd::Constant(params.size(), lr));
}

}  // namespace whamkit::nn
