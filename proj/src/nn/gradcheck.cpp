#include "whamkit/nn/gradcheck.h"

#include "whamkit/core/error.h"

#include <algorithm>
#include <cmath>

namespace whamkit::nn {

GradCheckReport grad_check(const ParamStore& store, const LossFn& loss,
                           const GradCheckOptions& options) {
  Eigen::VectorXd analytic = Eigen::VectorXd::Zero(store.size());
  loss(store.values(), &analytic);
  return grad_check(store, loss, analytic, options);
}

GradCheckReport grad_check(const ParamStore& store, const LossFn& loss,
                           const Eigen::VectorXd& analytic, const GradCheckOptions& options) {
  if (analytic.size() != store.size()) throw InvalidInput("grad_check: gradient length mismatch");
  GradCheckReport report;
  Eigen::VectorXd p = store.values();
  const double floor = options.floor * std::max(1.0, std::abs(loss(p, nullptr)));
  for (const auto& b : store.blocks()) {
    BlockReport br;
    br.name = b.name;
    for (Eigen::Index k = 0; k < b.size(); ++k) {
      const Eigen::Index i = b.offset + k;
      const double keep = p[i];
      p[i] = keep + options.delta;
      const double up = loss(p, nullptr);
      p[i] = keep - options.delta;
      const double down = loss(p, nullptr);
      p[i] = keep;
      const double numeric = (up - down) / (2.0 * options.delta);
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > br.max_rel_error || br.worst_index < 0) {
        br.max_rel_error = rel;
        br.worst_index = k;
        br.analytic = a;
        br.numeric = numeric;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, br.max_rel_error);
    report.blocks.push_back(br);
  }
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

}  // namespace whamkit::nn
