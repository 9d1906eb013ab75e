#include "whamkit/nn/tape.h"

#include "whamkit/core/error.h"
#include "whamkit/geom/so3.h"

#include <cmath>
#include <string>

namespace whamkit::nn {

namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) throw InvalidInput("vars belong to different tapes");
  return *a.tape;
}

void require_same_shape(const Tensor2& a, const Tensor2& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                       std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                       std::to_string(b.cols()) + ")");
  }
}

void require_cols(const Tensor2& a, Eigen::Index cols, const char* op) {
  if (a.cols() != cols) {
    throw InvalidInput(std::string(op) + ": expected " + std::to_string(cols) + " columns, got " +
                       std::to_string(a.cols()));
  }
}

using M3 = Eigen::Matrix3d;
using V3 = Eigen::Vector3d;

M3 row_to_m3(const Tensor2& t, Eigen::Index r) {
  M3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = t(r, i);
  return m;
}

void m3_to_row(const M3& m, Tensor2& t, Eigen::Index r) {
  for (int i = 0; i < 9; ++i) t(r, i) = m(i / 3, i % 3);
}

V3 row_to_v3(const Tensor2& t, Eigen::Index r, Eigen::Index c0 = 0) {
  return V3(t(r, c0), t(r, c0 + 1), t(r, c0 + 2));
}

constexpr double kNormFloor = 1e-12;

}  // namespace

const Tensor2& Var::value() const { return tape->value(*this); }

Tape::Tape(const ParamStore* params) : params_(params) {
  if (params_ != nullptr) param_grad_ = Eigen::VectorXd::Zero(params_->size());
}

Var Tape::record(Tensor2 value, Backward backward) {
  nodes_.push_back(Node{std::move(value), Tensor2(), std::move(backward), {}});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor2 value) { return record(std::move(value), nullptr); }

Var Tape::param(int block) {
  if (params_ == nullptr) throw InvalidInput("tape has no parameter store");
  Tensor2 v = params_->view(block);
  return record(std::move(v), [block](Tape& t, const Tensor2& g) { t.accumulate_param(block, g); });
}

void Tape::accumulate(Var v, const Tensor2& g) {
  Node& n = nodes_.at(static_cast<std::size_t>(v.id));
  if (!n.backward) return;  // constants need no gradient
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::accumulate_outer(Var v, Tensor2 a, Tensor2 b) {
  Node& n = nodes_.at(static_cast<std::size_t>(v.id));
  if (!n.backward) return;
  if (a.rows() != b.rows() || a.cols() != n.value.rows() || b.cols() != n.value.cols()) {
    throw InvalidInput("accumulate_outer: shape mismatch");
  }
  n.outer.emplace_back(std::move(a), std::move(b));
}

void Tape::flush_outer(Node& n) {
  if (n.outer.empty()) return;
  Eigen::Index rows = 0;
  for (const auto& [a, b] : n.outer) rows += a.rows();
  Tensor2 big_a(rows, n.value.rows());
  Tensor2 big_b(rows, n.value.cols());
  Eigen::Index r = 0;
  for (const auto& [a, b] : n.outer) {
    big_a.middleRows(r, a.rows()) = a;
    big_b.middleRows(r, b.rows()) = b;
    r += a.rows();
  }
  n.outer.clear();
  if (n.grad.size() == 0) n.grad = Tensor2::Zero(n.value.rows(), n.value.cols());
  n.grad.noalias() += big_a.transpose() * big_b;
}

void Tape::accumulate_param(int block, const Tensor2& g) {
  const auto& b = params_->block(block);
  param_grad_.segment(b.offset, b.size()) += Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
}

Tensor2 Tape::grad(Var v) const {
  const Node& n = nodes_.at(static_cast<std::size_t>(v.id));
  if (n.grad.size() == 0) return Tensor2::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  const Tensor2& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) throw InvalidInput("backward: loss must be 1x1");
  if (!std::isfinite(lv(0, 0))) throw NumericError("backward: loss is not finite");
  for (auto& n : nodes_) {
    n.grad.resize(0, 0);
    n.outer.clear();
  }
  if (params_ != nullptr) param_grad_.setZero();
  nodes_[static_cast<std::size_t>(loss.id)].grad = Tensor2::Ones(1, 1);
  for (std::size_t i = static_cast<std::size_t>(loss.id) + 1; i-- > 0;) {
    Node& n = nodes_[i];
    flush_outer(n);
    if (!n.backward || n.grad.size() == 0) continue;
    // Closures only touch earlier nodes, so this reference stays valid.
    n.backward(*this, n.grad);
  }
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(a.value(), b.value(), "add");
  return t.record(a.value() + b.value(), [a, b](Tape& tp, const Tensor2& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  return t.record(a.value() - b.value(), [a, b](Tape& tp, const Tensor2& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, -g);
  });
}

Var hadamard(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(a.value(), b.value(), "hadamard");
  return t.record(a.value().cwiseProduct(b.value()), [a, b](Tape& tp, const Tensor2& g) {
    tp.accumulate(a, g.cwiseProduct(b.value()));
    tp.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var divide(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_same_shape(a.value(), b.value(), "divide");
  Tensor2 out = a.value().cwiseQuotient(b.value());
  return t.record(out, [a, b, out](Tape& tp, const Tensor2& g) {
    const Tensor2 ga = g.cwiseQuotient(b.value());
    tp.accumulate(a, ga);
    tp.accumulate(b, -ga.cwiseProduct(out));
  });
}

Var scale(Var a, double s) {
  return a.tape->record(s * a.value(), [a, s](Tape& tp, const Tensor2& g) { tp.accumulate(a, s * g); });
}

Var add_scalar(Var a, double s) {
  return a.tape->record(a.value().array() + s, [a](Tape& tp, const Tensor2& g) { tp.accumulate(a, g); });
}

Var add_row(Var a, Var row) {
  Tape& t = same_tape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) throw InvalidInput("add_row: row shape mismatch");
  Tensor2 out = a.value();
  out.rowwise() += row.value().row(0);
  return t.record(out, [a, row](Tape& tp, const Tensor2& g) {
    tp.accumulate(a, g);
    tp.accumulate(row, g.colwise().sum());
  });
}

Var sigmoid(Var a) {
  Tensor2 out = a.value().unaryExpr([](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return a.tape->record(out, [a, out](Tape& tp, const Tensor2& g) {
    tp.accumulate(a, g.cwiseProduct(out.cwiseProduct((1.0 - out.array()).matrix())));
  });
}

Var tanh(Var a) {
  Tensor2 out = a.value().array().tanh();
  return a.tape->record(out, [a, out](Tape& tp, const Tensor2& g) {
    tp.accumulate(a, g.cwiseProduct((1.0 - out.array().square()).matrix()));
  });
}

Var relu(Var a) {
  Tensor2 out = a.value().cwiseMax(0.0);
  return a.tape->record(out, [a](Tape& tp, const Tensor2& g) {
    tp.accumulate(a, (a.value().array() > 0.0).select(g, 0.0));
  });
}

Var exp(Var a) {
  Tensor2 out = a.value().array().exp();
  return a.tape->record(out, [a, out](Tape& tp, const Tensor2& g) { tp.accumulate(a, g.cwiseProduct(out)); });
}

Var square(Var a) {
  return a.tape->record(a.value().array().square(), [a](Tape& tp, const Tensor2& g) {
    tp.accumulate(a, 2.0 * g.cwiseProduct(a.value()));
  });
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  if (a.cols() != b.rows()) throw InvalidInput("matmul: inner dimensions differ");
  return t.record(a.value() * b.value(), [a, b](Tape& tp, const Tensor2& g) {
    tp.accumulate(a, g * b.value().transpose());
    tp.accumulate(b, a.value().transpose() * g);
  });
}

Var linear(Var x, Var w) {
  Tape& t = same_tape(x, w);
  if (x.cols() != w.cols()) throw InvalidInput("linear: input width does not match weight");
  return t.record(x.value() * w.value().transpose(), [x, w](Tape& tp, const Tensor2& g) {
    tp.accumulate(x, g * w.value());
    tp.accumulate_outer(w, g, x.value());
  });
}

Var linear(Var x, Var w, Var bias) {
  Tape& t = same_tape(x, w);
  if (x.cols() != w.cols()) throw InvalidInput("linear: input width does not match weight");
  if (bias.rows() != 1 || bias.cols() != w.rows()) throw InvalidInput("linear: bias shape mismatch");
  Tensor2 out = x.value() * w.value().transpose();
  out.rowwise() += bias.value().row(0);
  return t.record(out, [x, w, bias](Tape& tp, const Tensor2& g) {
    tp.accumulate(x, g * w.value());
    tp.accumulate_outer(w, g, x.value());
    tp.accumulate(bias, g.colwise().sum());
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidInput("concat_cols: nothing to concatenate");
  Tape& t = *parts.front().tape;
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.tape != &t || p.rows() != rows) throw InvalidInput("concat_cols: row counts differ");
    cols += p.cols();
  }
  Tensor2 out(rows, cols);
  Eigen::Index c = 0;
  for (const Var& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  std::vector<Var> keep(parts.begin(), parts.end());
  return t.record(out, [keep](Tape& tp, const Tensor2& g) {
    Eigen::Index col = 0;
    for (const Var& p : keep) {
      const Eigen::Index w = p.cols();
      tp.accumulate(p, g.middleCols(col, w));
      col += w;
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidInput("concat_rows: nothing to concatenate");
  Tape& t = *parts.front().tape;
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.tape != &t || p.cols() != cols) throw InvalidInput("concat_rows: column counts differ");
    rows += p.rows();
  }
  Tensor2 out(rows, cols);
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<Var> keep(parts.begin(), parts.end());
  return t.record(out, [keep](Tape& tp, const Tensor2& g) {
    Eigen::Index row = 0;
    for (const Var& p : keep) {
      const Eigen::Index h = p.rows();
      tp.accumulate(p, g.middleRows(row, h));
      row += h;
    }
  });
}

Var slice_cols(Var a, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > a.cols()) throw InvalidInput("slice_cols: out of range");
  return a.tape->record(a.value().middleCols(begin, count), [a, begin, count](Tape& tp, const Tensor2& g) {
    Tensor2 full = Tensor2::Zero(a.rows(), a.cols());
    full.middleCols(begin, count) = g;
    tp.accumulate(a, full);
  });
}

Var slice_rows(Var a, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows()) throw InvalidInput("slice_rows: out of range");
  return a.tape->record(a.value().middleRows(begin, count), [a, begin, count](Tape& tp, const Tensor2& g) {
    Tensor2 full = Tensor2::Zero(a.rows(), a.cols());
    full.middleRows(begin, count) = g;
    tp.accumulate(a, full);
  });
}

Var select_cols(Var a, const std::vector<Eigen::Index>& cols) {
  Tensor2 out(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] < 0 || cols[k] >= a.cols()) throw InvalidInput("select_cols: index out of range");
    out.col(static_cast<Eigen::Index>(k)) = a.value().col(cols[k]);
  }
  return a.tape->record(out, [a, cols](Tape& tp, const Tensor2& g) {
    Tensor2 full = Tensor2::Zero(a.rows(), a.cols());
    for (std::size_t k = 0; k < cols.size(); ++k) full.col(cols[k]) += g.col(static_cast<Eigen::Index>(k));
    tp.accumulate(a, full);
  });
}

Var sum(Var a) {
  Tensor2 out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape->record(out, [a](Tape& tp, const Tensor2& g) {
    tp.accumulate(a, Tensor2::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var sum_sq(Var a) {
  Tensor2 out(1, 1);
  out(0, 0) = a.value().squaredNorm();
  return a.tape->record(out, [a](Tape& tp, const Tensor2& g) { tp.accumulate(a, 2.0 * g(0, 0) * a.value()); });
}

Var rot6d_to_mat(Var six) {
  require_cols(six.value(), 6, "rot6d_to_mat");
  const Eigen::Index n = six.rows();
  Tensor2 out(n, 9);
  for (Eigen::Index r = 0; r < n; ++r) {
    const V3 a1 = row_to_v3(six.value(), r, 0);
    const V3 a2 = row_to_v3(six.value(), r, 3);
    const V3 b1 = a1 / std::max(a1.norm(), kNormFloor);
    const V3 u = a2 - b1.dot(a2) * b1;
    const V3 b2 = u / std::max(u.norm(), kNormFloor);
    M3 m;
    m.col(0) = b1;
    m.col(1) = b2;
    m.col(2) = b1.cross(b2);
    m3_to_row(m, out, r);
  }
  return six.tape->record(out, [six](Tape& tp, const Tensor2& g) {
    const Eigen::Index n = six.rows();
    Tensor2 d(n, 6);
    for (Eigen::Index r = 0; r < n; ++r) {
      const V3 a1 = row_to_v3(six.value(), r, 0);
      const V3 a2 = row_to_v3(six.value(), r, 3);
      const double n1 = std::max(a1.norm(), kNormFloor);
      const V3 b1 = a1 / n1;
      const V3 u = a2 - b1.dot(a2) * b1;
      const double nu = std::max(u.norm(), kNormFloor);
      const V3 b2 = u / nu;
      const M3 gm = row_to_m3(g, r);
      V3 db1 = gm.col(0);
      V3 db2 = gm.col(1);
      const V3 db3 = gm.col(2);
      db1 += b2.cross(db3);
      db2 += db3.cross(b1);
      const V3 du = (db2 - b2 * b2.dot(db2)) / nu;
      const V3 da2 = du - b1 * b1.dot(du);
      db1 -= b1.dot(a2) * du + b1.dot(du) * a2;
      const V3 da1 = (db1 - b1 * b1.dot(db1)) / n1;
      d.block(r, 0, 1, 3) = da1.transpose();
      d.block(r, 3, 1, 3) = da2.transpose();
    }
    tp.accumulate(six, d);
  });
}

Var mat3_mul(Var a, Var b, bool ta, bool tb) {
  Tape& t = same_tape(a, b);
  require_cols(a.value(), 9, "mat3_mul");
  require_cols(b.value(), 9, "mat3_mul");
  if (a.rows() != b.rows()) throw InvalidInput("mat3_mul: batch sizes differ");
  const Eigen::Index n = a.rows();
  Tensor2 out(n, 9);
  for (Eigen::Index r = 0; r < n; ++r) {
    const M3 ma = ta ? M3(row_to_m3(a.value(), r).transpose()) : row_to_m3(a.value(), r);
    const M3 mb = tb ? M3(row_to_m3(b.value(), r).transpose()) : row_to_m3(b.value(), r);
    m3_to_row(ma * mb, out, r);
  }
  return t.record(out, [a, b, ta, tb](Tape& tp, const Tensor2& g) {
    const Eigen::Index n = a.rows();
    Tensor2 da(n, 9), db(n, 9);
    for (Eigen::Index r = 0; r < n; ++r) {
      const M3 ma = ta ? M3(row_to_m3(a.value(), r).transpose()) : row_to_m3(a.value(), r);
      const M3 mb = tb ? M3(row_to_m3(b.value(), r).transpose()) : row_to_m3(b.value(), r);
      const M3 gc = row_to_m3(g, r);
      const M3 ga = gc * mb.transpose();
      const M3 gb = ma.transpose() * gc;
      m3_to_row(ta ? M3(ga.transpose()) : ga, da, r);
      m3_to_row(tb ? M3(gb.transpose()) : gb, db, r);
    }
    tp.accumulate(a, da);
    tp.accumulate(b, db);
  });
}

Var rotate_points(Var r, Var p, bool tr) {
  Tape& t = same_tape(r, p);
  require_cols(r.value(), 9, "rotate_points");
  if (p.cols() % 3 != 0 || p.rows() != r.rows()) throw InvalidInput("rotate_points: bad point shape");
  const Eigen::Index n = p.rows();
  const Eigen::Index k = p.cols() / 3;
  Tensor2 out(n, p.cols());
  for (Eigen::Index b = 0; b < n; ++b) {
    const M3 m = tr ? M3(row_to_m3(r.value(), b).transpose()) : row_to_m3(r.value(), b);
    for (Eigen::Index j = 0; j < k; ++j) {
      out.block(b, 3 * j, 1, 3) = (m * row_to_v3(p.value(), b, 3 * j)).transpose();
    }
  }
  return t.record(out, [r, p, tr](Tape& tp, const Tensor2& g) {
    const Eigen::Index n = p.rows();
    const Eigen::Index k = p.cols() / 3;
    Tensor2 dr(n, 9), dp(n, p.cols());
    for (Eigen::Index b = 0; b < n; ++b) {
      const M3 m = tr ? M3(row_to_m3(r.value(), b).transpose()) : row_to_m3(r.value(), b);
      M3 gm = M3::Zero();
      for (Eigen::Index j = 0; j < k; ++j) {
        const V3 gy = row_to_v3(g, b, 3 * j);
        gm += gy * row_to_v3(p.value(), b, 3 * j).transpose();
        dp.block(b, 3 * j, 1, 3) = (m.transpose() * gy).transpose();
      }
      m3_to_row(tr ? M3(gm.transpose()) : gm, dr, b);
    }
    tp.accumulate(r, dr);
    tp.accumulate(p, dp);
  });
}

Var mat3_vec(Var r, Var v, bool tr) {
  require_cols(v.value(), 3, "mat3_vec");
  return rotate_points(r, v, tr);
}

Var translate_points(Var p, Var offset) {
  Tape& t = same_tape(p, offset);
  require_cols(offset.value(), 3, "translate_points");
  if (p.cols() % 3 != 0 || p.rows() != offset.rows()) {
    throw InvalidInput("translate_points: bad point shape");
  }
  const Eigen::Index k = p.cols() / 3;
  Tensor2 out = p.value();
  for (Eigen::Index j = 0; j < k; ++j) out.middleCols(3 * j, 3) += offset.value();
  return t.record(out, [p, offset, k](Tape& tp, const Tensor2& g) {
    tp.accumulate(p, g);
    Tensor2 d = Tensor2::Zero(g.rows(), 3);
    for (Eigen::Index j = 0; j < k; ++j) d += g.middleCols(3 * j, 3);
    tp.accumulate(offset, d);
  });
}

Var so3_log(Var r) {
  require_cols(r.value(), 9, "so3_log");
  const Eigen::Index n = r.rows();
  Tensor2 out(n, 3);
  for (Eigen::Index b = 0; b < n; ++b) {
    const M3 m = row_to_m3(r.value(), b);
    const V3 s(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
    const double sigma = s.norm();
    const double c = m.trace() - 1.0;
    V3 w;
    if (sigma < 1e-12 && c < 0.0) {
      w = geom::log_so3(m);  // rotation by pi; gradient is not defined here
    } else if (sigma < 1e-12) {
      w = 0.5 * s;
    } else {
      w = (std::atan2(sigma, c) / sigma) * s;
    }
    out.row(b) = w.transpose();
  }
  return r.tape->record(out, [r](Tape& tp, const Tensor2& g) {
    const Eigen::Index n = r.rows();
    Tensor2 d = Tensor2::Zero(n, 9);
    for (Eigen::Index b = 0; b < n; ++b) {
      const M3 m = row_to_m3(r.value(), b);
      const V3 s(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
      const double sigma = s.norm();
      const double c = m.trace() - 1.0;
      const V3 gw = row_to_v3(g, b);
      V3 ds;
      double dc = 0.0;
      if (sigma < 1e-12) {
        if (c < 0.0) continue;
        ds = 0.5 * gw;
      } else {
        const double theta = std::atan2(sigma, c);
        const double rr = sigma * sigma + c * c;
        const double gs = theta / sigma;
        const double dtheta_dsigma = c / rr;
        const double dtheta_dc = -sigma / rr;
        const double dg_dsigma = (dtheta_dsigma * sigma - theta) / (sigma * sigma);
        const double proj = gw.dot(s);
        ds = gs * gw + proj * dg_dsigma * (s / sigma);
        dc = proj * dtheta_dc / sigma;
      }
      M3 dm = M3::Zero();
      dm(2, 1) += ds.x();
      dm(1, 2) -= ds.x();
      dm(0, 2) += ds.y();
      dm(2, 0) -= ds.y();
      dm(1, 0) += ds.z();
      dm(0, 1) -= ds.z();
      dm.diagonal().array() += dc;
      m3_to_row(dm, d, b);
    }
    tp.accumulate(r, d);
  });
}

Var operator+(Var a, Var b) { return add(a, b); }
Var operator-(Var a, Var b) { return sub(a, b); }
Var operator*(double s, Var a) { return scale(a, s); }

}  // namespace whamkit::nn
