#pragma once

#include <Eigen/Core>

#include <string>

namespace whamkit::nn {

// Batch-major dense matrix: one row per batch element.
using Tensor2 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Throws NumericError naming `what` when any entry is NaN or infinite.
void check_finite(const Tensor2& t, const std::string& what);

}  // namespace whamkit::nn
