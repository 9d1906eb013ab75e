#include "whamkit/nn/layers.h"

#include "whamkit/core/error.h"
#include "whamkit/core/random.h"

#include <cmath>

namespace whamkit::nn {

namespace {

Tensor2 sigmoid_of(const Tensor2& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

}  // namespace

GruLayer GruLayer::create(ParamStore& store, const std::string& name, const std::string& group,
                          int input, int hidden) {
  if (input < 1 || hidden < 1) throw InvalidInput("GRU '" + name + "': dims must be positive");
  GruLayer g;
  g.name = name;
  g.input = input;
  g.hidden = hidden;
  g.wx = store.add(name + ".Wx", group, 3 * hidden, input);
  g.uh = store.add(name + ".Uh", group, 3 * hidden, hidden);
  g.bias = store.add(name + ".b", group, 1, 3 * hidden);
  return g;
}

void GruLayer::init(ParamStore& store, std::uint64_t seed) const {
  store.init_uniform(wx, 1.0 / std::sqrt(static_cast<double>(input)), derive_seed(seed, 0));
  store.init_uniform(uh, 1.0 / std::sqrt(static_cast<double>(hidden)), derive_seed(seed, 1));
  store.init_uniform(bias, 1.0 / std::sqrt(static_cast<double>(hidden)), derive_seed(seed, 2));
}

LinearLayer LinearLayer::create(ParamStore& store, const std::string& name, const std::string& group,
                                int input, int output) {
  if (input < 1 || output < 1) throw InvalidInput("linear '" + name + "': dims must be positive");
  LinearLayer l;
  l.name = name;
  l.input = input;
  l.output = output;
  l.weight = store.add(name + ".W", group, output, input);
  l.bias = store.add(name + ".b", group, 1, output);
  return l;
}

void LinearLayer::init(ParamStore& store, std::uint64_t seed) const {
  const double bound = 1.0 / std::sqrt(static_cast<double>(input));
  store.init_uniform(weight, bound, derive_seed(seed, 0));
  store.init_uniform(bias, bound, derive_seed(seed, 1));
}

DenseStack DenseStack::create(ParamStore& store, const std::string& name, const std::string& group,
                              const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw InvalidInput("dense stack '" + name + "': need at least two sizes");
  DenseStack s;
  s.name = name;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    s.layers.push_back(LinearLayer::create(store, name + "." + std::to_string(i), group, sizes[i],
                                           sizes[i + 1]));
  }
  return s;
}

void DenseStack::init(ParamStore& store, std::uint64_t seed) const {
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].init(store, derive_seed(seed, i));
}

GruVars bind(Tape& tape, const GruLayer& l) {
  return {&l, tape.param(l.wx), tape.param(l.uh), tape.param(l.bias)};
}

LinearVars bind(Tape& tape, const LinearLayer& l) {
  return {&l, tape.param(l.weight), tape.param(l.bias)};
}

std::vector<LinearVars> bind(Tape& tape, const DenseStack& s) {
  std::vector<LinearVars> out;
  for (const auto& l : s.layers) out.push_back(bind(tape, l));
  return out;
}

Var gru_step(const GruVars& g, Var x, Var h) {
  const int hd = g.layer->hidden;
  if (x.cols() != g.layer->input || h.cols() != hd || x.rows() != h.rows()) {
    throw InvalidInput("GRU '" + g.layer->name + "': input shape mismatch");
  }
  const Tensor2& wx = g.wx.value();
  const Tensor2& uh = g.uh.value();
  const Tensor2& hv = h.value();

  Tensor2 gates = x.value() * wx.transpose();
  gates.rowwise() += g.bias.value().row(0);
  gates.leftCols(2 * hd) += hv * uh.topRows(2 * hd).transpose();
  const Tensor2 z = sigmoid_of(gates.leftCols(hd));
  const Tensor2 r = sigmoid_of(gates.middleCols(hd, hd));
  const Tensor2 q = r.cwiseProduct(hv);
  const Tensor2 n = (gates.rightCols(hd) + q * uh.bottomRows(hd).transpose()).array().tanh();
  Tensor2 out = hv + z.cwiseProduct(n - hv);
  check_finite(out, "GRU '" + g.layer->name + "'");

  GruVars gv = g;
  return x.tape->record(out, [gv, x, h, z, r, q, n, hd](Tape& tp, const Tensor2& dout) {
    const Tensor2& hv = h.value();
    const Tensor2& uh = gv.uh.value();
    const Tensor2 dz = dout.cwiseProduct(n - hv);
    const Tensor2 dn = dout.cwiseProduct(z);
    Tensor2 dh = dout.cwiseProduct((1.0 - z.array()).matrix());
    const Tensor2 dgn = dn.cwiseProduct((1.0 - n.array().square()).matrix());
    const Tensor2 dq = dgn * uh.bottomRows(hd);
    dh += dq.cwiseProduct(r);
    const Tensor2 dgr = dq.cwiseProduct(hv).cwiseProduct(r.cwiseProduct((1.0 - r.array()).matrix()));
    const Tensor2 dgz = dz.cwiseProduct(z.cwiseProduct((1.0 - z.array()).matrix()));

    Tensor2 dgates(dout.rows(), 3 * hd);
    dgates << dgz, dgr, dgn;
    dh += dgates.leftCols(2 * hd) * uh.topRows(2 * hd);

    // duh = [dgz dgr 0]^T hv + [0 0 dgn]^T q, as one stacked outer product.
    const Eigen::Index b = dout.rows();
    Tensor2 lhs = Tensor2::Zero(2 * b, 3 * hd);
    lhs.topLeftCorner(b, 2 * hd) = dgates.leftCols(2 * hd);
    lhs.bottomRightCorner(b, hd) = dgn;
    Tensor2 rhs(2 * b, hd);
    rhs << hv, q;

    tp.accumulate(x, dgates * gv.wx.value());
    tp.accumulate(h, dh);
    tp.accumulate_outer(gv.wx, dgates, x.value());
    tp.accumulate_outer(gv.uh, std::move(lhs), std::move(rhs));
    tp.accumulate(gv.bias, dgates.colwise().sum());
  });
}

Var apply(const LinearVars& l, Var x) {
  Var y = linear(x, l.weight, l.bias);
  check_finite(y.value(), "linear '" + l.layer->name + "'");
  return y;
}

Var apply(const std::vector<LinearVars>& stack, Var x) {
  for (std::size_t i = 0; i < stack.size(); ++i) {
    x = apply(stack[i], x);
    if (i + 1 < stack.size()) x = relu(x);
  }
  return x;
}

Eigen::VectorXd gru_step(const ParamStore& store, const GruLayer& layer, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h) {
  Tape tape(&store);
  const GruVars g = bind(tape, layer);
  const Var out = gru_step(g, tape.constant(x.transpose()), tape.constant(h.transpose()));
  return out.value().row(0).transpose();
}

}  // namespace whamkit::nn
