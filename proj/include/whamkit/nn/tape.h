#pragma once

#include "whamkit/nn/params.h"
#include "whamkit/nn/tensor.h"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace whamkit::nn {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor2& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

// Records a computation for reverse-mode differentiation. Parameter leaves
// read from a ParamStore and their gradients land in one flat vector with
// the store's layout.
class Tape {
 public:
  explicit Tape(const ParamStore* params = nullptr);
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor2 value);
  Var param(int block);

  const Tensor2& value(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).value; }

  // Gradient of a node after backward(); zeros when it received none.
  Tensor2 grad(Var v) const;
  const Eigen::VectorXd& param_grad() const { return param_grad_; }

  // Seeds d(loss)/d(loss) = 1 for a 1x1 loss and sweeps the tape backwards.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  const ParamStore* params() const { return params_; }

  // Building blocks for ops. The backward closure receives the tape and
  // the node's own upstream gradient.
  using Backward = std::function<void(Tape&, const Tensor2&)>;
  Var record(Tensor2 value, Backward backward);
  void accumulate(Var v, const Tensor2& g);
  // grad(v) += a^T * b, deferred: every pending pair of a node is stacked
  // into one product when the sweep reaches it. Weight gradients of layers
  // applied once per frame go through here.
  void accumulate_outer(Var v, Tensor2 a, Tensor2 b);
  void accumulate_param(int block, const Tensor2& g);

 private:
  struct Node {
    Tensor2 value;
    Tensor2 grad;
    Backward backward;
    std::vector<std::pair<Tensor2, Tensor2>> outer;
  };
  void flush_outer(Node& n);
  const ParamStore* params_;
  std::vector<Node> nodes_;
  Eigen::VectorXd param_grad_;
};

// Elementwise and structural ops. Shapes must match unless noted; a shape
// mismatch throws InvalidInput.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var divide(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var add_row(Var a, Var row);  // broadcasts a 1 x n row over every row of a
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var exp(Var a);
Var square(Var a);

Var matmul(Var a, Var b);                       // a * b
Var linear(Var x, Var weight, Var bias);        // x * W^T + bias (bias 1 x out)
Var linear(Var x, Var weight);                  // x * W^T

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, Eigen::Index begin, Eigen::Index count);
Var slice_rows(Var a, Eigen::Index begin, Eigen::Index count);
Var select_cols(Var a, const std::vector<Eigen::Index>& cols);

Var sum(Var a);     // 1x1
Var sum_sq(Var a);  // 1x1, sum of squares

// Rotation ops act row-wise on batches: a rotation is a row of 9 entries
// (row-major 3x3), a 6D code a row of 6 (first column, then second column),
// and a point set a row of 3N coordinates.
Var rot6d_to_mat(Var six);
Var mat3_mul(Var a, Var b, bool transpose_a = false, bool transpose_b = false);
Var mat3_vec(Var r, Var v, bool transpose_r = false);
Var rotate_points(Var r, Var points, bool transpose_r = false);
Var translate_points(Var points, Var offset);  // adds a B x 3 offset to every point
Var so3_log(Var r);

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(double s, Var a);

}  // namespace whamkit::nn
