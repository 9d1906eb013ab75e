#pragma once

#include "whamkit/nn/params.h"
#include "whamkit/nn/tape.h"

#include <cstdint>
#include <string>
#include <vector>

namespace whamkit::nn {

// Gated recurrent unit:
//   z  = sigmoid(W_z x + U_z h + b_z)
//   r  = sigmoid(W_r x + U_r h + b_r)
//   h~ = tanh(W_h x + U_h (r * h) + b_h)
//   h' = (1 - z) * h + z * h~
// Stored as three blocks: <name>.Wx (3H x in, rows z|r|h), <name>.Uh
// (3H x H) and <name>.b (1 x 3H).
struct GruLayer {
  std::string name;
  int input = 0;
  int hidden = 0;
  int wx = -1, uh = -1, bias = -1;

  static GruLayer create(ParamStore& store, const std::string& name, const std::string& group,
                         int input, int hidden);
  // Uniform(+-1/sqrt(fan_in)) weights, seeded per block.
  void init(ParamStore& store, std::uint64_t seed) const;
};

struct LinearLayer {
  std::string name;
  int input = 0;
  int output = 0;
  int weight = -1, bias = -1;

  static LinearLayer create(ParamStore& store, const std::string& name, const std::string& group,
                            int input, int output);
  void init(ParamStore& store, std::uint64_t seed) const;
};

enum class Activation { kLinear, kRelu };

// Feed-forward stack; ReLU on hidden layers, linear output.
struct DenseStack {
  std::string name;
  std::vector<LinearLayer> layers;

  static DenseStack create(ParamStore& store, const std::string& name, const std::string& group,
                           const std::vector<int>& sizes);
  void init(ParamStore& store, std::uint64_t seed) const;
  int input() const { return layers.front().input; }
  int output() const { return layers.back().output; }
};

// Parameters pulled onto a tape once per forward pass.
struct GruVars {
  const GruLayer* layer;
  Var wx, uh, bias;
};
struct LinearVars {
  const LinearLayer* layer;
  Var weight, bias;
};

GruVars bind(Tape& tape, const GruLayer& layer);
LinearVars bind(Tape& tape, const LinearLayer& layer);
std::vector<LinearVars> bind(Tape& tape, const DenseStack& stack);

// One fused GRU step on a batch (x: B x in, h: B x H). Throws NumericError
// naming the layer when the new state is not finite.
Var gru_step(const GruVars& gru, Var x, Var h);
Var apply(const LinearVars& lin, Var x);
Var apply(const std::vector<LinearVars>& stack, Var x);

// Plain evaluation of a single GRU step on vectors.
Eigen::VectorXd gru_step(const ParamStore& store, const GruLayer& layer, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h);

}  // namespace whamkit::nn
