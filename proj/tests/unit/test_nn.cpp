#include "whamkit/core/error.h"
#include "whamkit/core/random.h"
#include "whamkit/geom/so3.h"
#include "whamkit/nn/adam.h"
#include "whamkit/nn/checkpoint.h"
#include "whamkit/nn/gradcheck.h"
#include "whamkit/nn/layers.h"
#include "whamkit/nn/tape.h"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace whamkit;
using namespace whamkit::nn;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar re-evaluation of the GRU cell straight from its equations.
Eigen::VectorXd gru_reference(const ParamStore& s, const GruLayer& g, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& h) {
  const auto wx = s.view(g.wx);
  const auto uh = s.view(g.uh);
  const auto b = s.view(g.bias);
  const int H = g.hidden;
  Eigen::VectorXd out(H);
  std::vector<double> r(static_cast<std::size_t>(H)), z(static_cast<std::size_t>(H));
  for (int i = 0; i < H; ++i) {
    double az = b(0, i), ar = b(0, H + i);
    for (int k = 0; k < g.input; ++k) {
      az += wx(i, k) * x[k];
      ar += wx(H + i, k) * x[k];
    }
    for (int k = 0; k < H; ++k) {
      az += uh(i, k) * h[k];
      ar += uh(H + i, k) * h[k];
    }
    z[static_cast<std::size_t>(i)] = sig(az);
    r[static_cast<std::size_t>(i)] = sig(ar);
  }
  for (int i = 0; i < H; ++i) {
    double an = b(0, 2 * H + i);
    for (int k = 0; k < g.input; ++k) an += wx(2 * H + i, k) * x[k];
    for (int k = 0; k < H; ++k) an += uh(2 * H + i, k) * r[static_cast<std::size_t>(k)] * h[k];
    const double n = std::tanh(an);
    const double zi = z[static_cast<std::size_t>(i)];
    out[i] = (1.0 - zi) * h[i] + zi * n;
  }
  return out;
}

void fill_random(ParamStore& s, std::uint64_t seed, double bound = 1.0) {
  for (int i = 0; i < static_cast<int>(s.blocks().size()); ++i) {
    s.init_uniform(i, bound, derive_seed(seed, static_cast<std::uint64_t>(i)));
  }
}

using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;

// Finite-difference check of an op: the inputs are parameter blocks with the
// given shapes, the loss is a fixed random projection of the op output.
GradCheckReport check_op(const std::vector<std::pair<int, int>>& shapes, const Builder& build,
                         std::uint64_t seed, const std::function<void(ParamStore&)>& prepare = {}) {
  ParamStore store;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    store.add("in" + std::to_string(i), "test", shapes[i].first, shapes[i].second);
  }
  fill_random(store, seed);
  if (prepare) prepare(store);
  Tensor2 weights;
  const LossFn loss = [&](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    ParamStore local = store;
    local.values() = p;
    Tape tape(&local);
    std::vector<Var> in;
    for (int i = 0; i < static_cast<int>(shapes.size()); ++i) in.push_back(tape.param(i));
    const Var out = build(tape, in);
    if (weights.size() == 0) {
      weights = Tensor2::Random(out.rows(), out.cols());
    }
    const Var l = sum(hadamard(out, tape.constant(weights)));
    if (grad != nullptr) {
      tape.backward(l);
      *grad = tape.param_grad();
    }
    return l.value()(0, 0);
  };
  return grad_check(store, loss);
}

}  // namespace

TEST_CASE("GRU zero weights halve the state") {
  ParamStore s;
  const GruLayer g = GruLayer::create(s, "gru", "test", 2, 3);
  const Eigen::VectorXd h = Eigen::Vector3d(0.4, -1.0, 2.0);
  CHECK((gru_step(s, g, Eigen::Vector2d(1, 2), h) - 0.5 * h).norm() == 0.0);
  CHECK(gru_step(s, g, Eigen::Vector2d(1, 2), Eigen::Vector3d::Zero()).norm() == 0.0);
}

TEST_CASE("GRU matches a scalar evaluation") {
  ParamStore s;
  const GruLayer g = GruLayer::create(s, "gru", "test", 2, 3);
  fill_random(s, 17, 0.8);
  const Eigen::VectorXd x = Eigen::Vector2d(0.3, -0.7);
  const Eigen::VectorXd h = Eigen::Vector3d(0.1, 0.5, -0.4);
  CHECK((gru_step(s, g, x, h) - gru_reference(s, g, x, h)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("GRU reports the layer on non-finite output") {
  ParamStore s;
  const GruLayer g = GruLayer::create(s, "encoder", "test", 1, 1);
  Eigen::VectorXd x(1);
  x << std::nan("");
  try {
    gru_step(s, g, x, Eigen::VectorXd::Zero(1));
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("encoder") != std::string::npos);
  }
}

TEST_CASE("linear regression gradient is exact") {
  ParamStore s;
  const int w = s.add("W", "test", 2, 3);
  fill_random(s, 3);
  const Tensor2 x = Tensor2::Random(1, 3);
  const Tensor2 y = Tensor2::Random(1, 2);
  Tape tape(&s);
  const Var pred = linear(tape.constant(x), tape.param(w));
  const Var loss = scale(sum_sq(sub(pred, tape.constant(y))), 0.5);
  tape.backward(loss);
  const Tensor2 resid = s.view(w) * x.transpose() - y.transpose();  // W x - y
  const Tensor2 expected = resid * x;                                // (Wx - y) x^T
  const Eigen::Map<const Tensor2> got(tape.param_grad().data(), 2, 3);
  CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("backward requires a finite scalar") {
  Tape tape;
  const Var v = tape.constant(Tensor2::Ones(2, 2));
  CHECK_THROWS_AS(tape.backward(v), InvalidInput);
  Tensor2 bad(1, 1);
  bad << std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(tape.backward(tape.constant(bad)), NumericError);
}

TEST_CASE("grad_check: linear layer with squared error") {
  ParamStore s;
  const LinearLayer lin = LinearLayer::create(s, "lin", "test", 4, 3);
  lin.init(s, 2);
  const Tensor2 x = Tensor2::Random(5, 4);
  const Tensor2 y = Tensor2::Random(5, 3);
  const LossFn loss = [&](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    ParamStore local = s;
    local.values() = p;
    Tape tape(&local);
    const Var l = sum_sq(sub(apply(bind(tape, lin), tape.constant(x)), tape.constant(y)));
    if (grad) {
      tape.backward(l);
      *grad = tape.param_grad();
    }
    return l.value()(0, 0);
  };
  const GradCheckReport r = grad_check(s, loss);
  CHECK(r.passed);
  CHECK(r.max_rel_error < 1e-8);
}

TEST_CASE("grad_check: GRU 2x3 over four frames, and fault injection") {
  ParamStore s;
  const GruLayer g = GruLayer::create(s, "gru", "test", 2, 3);
  g.init(s, 5);
  const Tensor2 xs = Tensor2::Random(4 * 2, 2);  // 4 frames, batch 2
  const Tensor2 target = Tensor2::Random(2, 3);
  const LossFn loss = [&](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    ParamStore local = s;
    local.values() = p;
    Tape tape(&local);
    const GruVars gv = bind(tape, g);
    Var h = tape.constant(Tensor2::Zero(2, 3));
    Var acc = tape.constant(Tensor2::Zero(1, 1));
    for (int t = 0; t < 4; ++t) {
      h = gru_step(gv, tape.constant(xs.middleRows(2 * t, 2)), h);
      acc = acc + sum_sq(sub(h, tape.constant(target)));
    }
    if (grad) {
      tape.backward(acc);
      *grad = tape.param_grad();
    }
    return acc.value()(0, 0);
  };
  const GradCheckReport ok = grad_check(s, loss);
  CHECK(ok.passed);
  CHECK(ok.blocks.size() == 3);

  Eigen::VectorXd analytic(s.size());
  loss(s.values(), &analytic);
  const GradCheckReport bad = grad_check(s, loss, 1.01 * analytic, GradCheckOptions{});
  CHECK_FALSE(bad.passed);
}

TEST_CASE("grad_check: elementwise and structural ops") {
  CHECK(check_op({{3, 4}, {3, 4}}, [](Tape&, const auto& v) { return hadamard(v[0], v[1]); }, 1).passed);
  CHECK(check_op({{3, 4}, {3, 4}}, [](Tape&, const auto& v) { return sub(v[0], v[1]); }, 2).passed);
  CHECK(check_op(
            {{3, 4}, {3, 4}},
            [](Tape&, const auto& v) { return divide(v[0], add_scalar(square(v[1]), 0.5)); }, 3)
            .passed);
  CHECK(check_op({{3, 4}}, [](Tape&, const auto& v) { return sigmoid(scale(v[0], 3.0)); }, 4).passed);
  CHECK(check_op({{3, 4}}, [](Tape&, const auto& v) { return nn::tanh(v[0]); }, 5).passed);
  CHECK(check_op({{3, 4}}, [](Tape&, const auto& v) { return nn::exp(v[0]); }, 6).passed);
  CHECK(check_op({{3, 4}}, [](Tape&, const auto& v) { return relu(v[0]); }, 7).passed);
  CHECK(check_op({{3, 4}, {1, 4}}, [](Tape&, const auto& v) { return add_row(v[0], v[1]); }, 8).passed);
  CHECK(check_op({{3, 4}, {4, 2}}, [](Tape&, const auto& v) { return matmul(v[0], v[1]); }, 9).passed);
  CHECK(check_op({{3, 4}, {2, 4}, {1, 2}},
                 [](Tape&, const auto& v) { return linear(v[0], v[1], v[2]); }, 10)
            .passed);
  CHECK(check_op({{3, 4}, {3, 2}},
                 [](Tape&, const auto& v) {
                   const Var parts[] = {v[1], slice_cols(v[0], 1, 2), v[0]};
                   return concat_cols(parts);
                 },
                 11)
            .passed);
  CHECK(check_op({{3, 4}, {2, 4}},
                 [](Tape&, const auto& v) {
                   const Var parts[] = {slice_rows(v[0], 1, 2), v[1]};
                   return concat_rows(parts);
                 },
                 12)
            .passed);
  CHECK(check_op({{3, 5}}, [](Tape&, const auto& v) { return select_cols(v[0], {4, 0, 0, 2}); }, 13).passed);
  CHECK(check_op({{3, 5}}, [](Tape&, const auto& v) { return sum_sq(v[0]); }, 14).passed);
}

TEST_CASE("grad_check: rotation ops") {
  CHECK(check_op({{4, 6}}, [](Tape&, const auto& v) { return rot6d_to_mat(v[0]); }, 21).passed);
  for (bool ta : {false, true}) {
    for (bool tb : {false, true}) {
      CHECK(check_op({{3, 9}, {3, 9}},
                     [=](Tape&, const auto& v) { return mat3_mul(v[0], v[1], ta, tb); }, 22)
                .passed);
    }
    CHECK(check_op({{3, 9}, {3, 12}},
                   [=](Tape&, const auto& v) { return rotate_points(v[0], v[1], ta); }, 23)
              .passed);
    CHECK(check_op({{3, 9}, {3, 3}}, [=](Tape&, const auto& v) { return mat3_vec(v[0], v[1], ta); }, 24)
              .passed);
  }
  CHECK(check_op({{3, 12}, {3, 3}}, [](Tape&, const auto& v) { return translate_points(v[0], v[1]); }, 25)
            .passed);

  // so3_log on proper rotations built from a 6D code, away from angle pi.
  const auto prepare = [](ParamStore& s) {
    auto m = s.view(0);
    m *= 0.3;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      m(r, 0) += 1.0;
      m(r, 4) += 1.0;
    }
  };
  CHECK(check_op({{5, 6}}, [](Tape&, const auto& v) { return so3_log(rot6d_to_mat(v[0])); }, 26, prepare)
            .passed);
}

TEST_CASE("rotation ops agree with the geometry module") {
  Rng rng(1);
  Tape tape;
  Tensor2 six(1, 6);
  six << 0.9, 0.2, -0.3, 0.1, 1.2, 0.4;
  const Var r = rot6d_to_mat(tape.constant(six));
  geom::Rotation6D arr;
  for (int i = 0; i < 6; ++i) arr[static_cast<std::size_t>(i)] = six(0, i);
  const Rotation ref = geom::from_6d(arr);
  for (int i = 0; i < 9; ++i) CHECK(std::abs(r.value()(0, i) - ref(i / 3, i % 3)) < 1e-14);
  const Var w = so3_log(r);
  const Vec3 lw = geom::log_so3(ref);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(w.value()(0, i) - lw[i]) < 1e-12);

  Tensor2 id(1, 9);
  id << 1, 0, 0, 0, 1, 0, 0, 0, 1;
  CHECK(so3_log(tape.constant(id)).value().norm() == 0.0);
}

TEST_CASE("shape mismatches are rejected") {
  Tape tape;
  const Var a = tape.constant(Tensor2::Zero(2, 3));
  const Var b = tape.constant(Tensor2::Zero(3, 2));
  CHECK_THROWS_AS(add(a, b), InvalidInput);
  CHECK_THROWS_AS(rot6d_to_mat(a), InvalidInput);
  CHECK_THROWS_AS(slice_cols(a, 2, 2), InvalidInput);
}

TEST_CASE("adam update rules") {
  {
    AdamState s = AdamState::zeros(3);
    Eigen::VectorXd p = Eigen::Vector3d(1, 2, 3);
    const Eigen::VectorXd g = Eigen::Vector3d(0.5, -2.0, 10.0);
    adam_step(s, p, g, 0.01);
    for (int i = 0; i < 3; ++i) {
      const double expected = -0.01 * g[i] / (std::abs(g[i]) + 1e-8);
      CHECK(std::abs((p[i] - (i + 1.0)) - expected) < 1e-15);
    }
  }
  {
    AdamState s = AdamState::zeros(2);
    Eigen::VectorXd p = Eigen::Vector2d(1, 2);
    adam_step(s, p, Eigen::Vector2d::Zero(), 0.1);
    CHECK(p == Eigen::Vector2d(1, 2));
  }
  {
    // Scalar recurrence by hand: with constant g, m_hat = g and
    // v_hat = g^2 on every step, so both steps equal lr*g/(|g|+eps).
    AdamState s = AdamState::zeros(1);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
    const Eigen::VectorXd g = Eigen::VectorXd::Constant(1, 0.3);
    adam_step(s, p, g, 0.05);
    const double step1 = std::abs(p[0]);
    adam_step(s, p, g, 0.05);
    const double step2 = std::abs(p[0]) - step1;
    const double m1 = 0.1 * 0.3, v1 = 0.001 * 0.09;
    const double m2 = 0.9 * m1 + 0.1 * 0.3, v2 = 0.999 * v1 + 0.001 * 0.09;
    const double hand = 0.05 * (m2 / (1 - 0.81)) / (std::sqrt(v2 / (1 - 0.999 * 0.999)) + 1e-8);
    CHECK(std::abs(step2 - hand) < 1e-15);
    CHECK(step2 <= step1 + 1e-12);
  }
  {
    AdamState s = AdamState::zeros(2);
    Eigen::VectorXd p = Eigen::Vector2d(1, 1);
    adam_step(s, p, Eigen::Vector2d(1, 1), Eigen::Vector2d(0.0, 0.1));
    CHECK(p[0] == 1.0);
    CHECK(s.m[0] == 0.0);
    CHECK(p[1] < 1.0);
    CHECK_THROWS_AS(adam_step(s, p, Eigen::Vector3d(1, 1, 1), 0.1), InvalidInput);
  }
}

TEST_CASE("checkpoint round trip and validation") {
  const auto dir = std::filesystem::temp_directory_path() / "whamkit_ckpt_test";
  std::filesystem::create_directories(dir);
  Checkpoint c;
  c.dims = {54, 128, 32};
  c.epoch = 7;
  c.stage = "pretrain";
  c.params = Eigen::VectorXd::Random(50);
  AdamState a = AdamState::zeros(50);
  a.step = 12;
  a.m.setRandom();
  c.adam = a;
  save_checkpoint(dir / "a.ckpt", c);
  const Checkpoint r = load_checkpoint(dir / "a.ckpt");
  CHECK(r.dims == c.dims);
  CHECK(r.epoch == 7);
  CHECK(r.stage == "pretrain");
  CHECK(r.params == c.params);
  REQUIRE(r.adam.has_value());
  CHECK(r.adam->m == a.m);
  CHECK(r.adam->step == 12);

  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), IoError);
  {
    std::ofstream out(dir / "bad.ckpt", std::ios::binary);
    out << "NOTACKPT";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt"), FormatError);
  {
    std::fstream f(dir / "a.ckpt", std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(8);
    const std::uint32_t v = 99;
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "a.ckpt"), FormatError);
  std::filesystem::remove_all(dir);
}
