#include "whamkit/body/gait.h"
#include "whamkit/core/error.h"
#include "whamkit/core/random.h"
#include "whamkit/geom/conventions.h"
#include "whamkit/geom/so3.h"
#include "whamkit/losses/losses.h"
#include "whamkit/model/batch.h"
#include "whamkit/model/network.h"
#include "whamkit/model/ops.h"
#include "whamkit/model/output.h"
#include "whamkit/nn/checkpoint.h"
#include "whamkit/nn/gradcheck.h"
#include "whamkit/synth/dataset.h"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace whamkit;
using namespace whamkit::model;
using nn::Tape;
using nn::Tensor2;

namespace {

synth::SynthConfig small_config(int frames, int feature_dim = 8) {
  synth::SynthConfig cfg;
  cfg.sequence_length = frames;
  cfg.feature_dim = feature_dim;
  return cfg;
}

std::vector<SequenceData> make_sequences(int count, int frames, int feature_dim = 8, std::uint64_t seed = 5) {
  const auto cfg = small_config(frames, feature_dim);
  const synth::FeatureEncoder enc(feature_dim, 99);
  std::vector<SequenceData> out;
  for (int i = 0; i < count; ++i) out.push_back(canonicalize(synth::generate_sample(cfg, seed, i, enc)));
  return out;
}

Batch batch_of(const std::vector<SequenceData>& seqs, double noise = 0.0) {
  std::vector<const SequenceData*> ptr;
  for (const auto& s : seqs) ptr.push_back(&s);
  return make_batch(ptr, noise, 3);
}

ModelDims toy_dims(int feature_dim = 8) {
  ModelDims d;
  d.hidden = 8;
  d.feature = feature_dim;
  d.integrator_hidden = 6;
  d.init_hidden = 6;
  return d;
}

// Gives every parameter a random value (zero-initialized layers included).
void randomize(WhamParams& p, std::uint64_t seed, double scale = 0.3) {
  Rng rng(seed);
  for (Eigen::Index i = 0; i < p.store.size(); ++i) p.store.values()(i) = normal(rng, 0.0, scale);
}

// Fills the zero-initialized output layers with small random values so the
// paths behind them carry gradient.
void wake_zero_layers(WhamParams& p, std::uint64_t seed) {
  Rng rng(seed);
  for (const nn::LinearLayer* l : {&p.integrator.layers.back(), &p.refiner_head, &p.init_net.layers.back()}) {
    for (int id : {l->weight, l->bias}) {
      auto v = p.store.view(id);
      for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = normal(rng, 0.0, 0.1);
    }
  }
}

ForwardOptions full_options() {
  ForwardOptions o;
  o.integrator = true;
  return o;
}

bool same(const Tensor2& a, const Tensor2& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace

TEST_CASE("model dims round-trip through the checkpoint layout and reject foreign dims") {
  const ModelDims d = toy_dims();
  CHECK(ModelDims::from_vector(d.to_vector()) == d);
  CHECK_THROWS_AS(ModelDims::from_vector({1, 2, 3}), FormatError);
  ModelDims bad = d;
  bad.hidden = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("every parameter appears once and head widths match the layout") {
  const WhamParams p = WhamParams::create(toy_dims(), 1);
  Eigen::Index covered = 0;
  for (const auto& b : p.store.blocks()) covered += b.size();
  CHECK(covered == p.store.size());
  CHECK(p.motion_head.output == kPoseDim + 4 + 3 + 21 + 6);
  CHECK(p.trajectory_head.output == 9);
  CHECK(p.refiner_head.output == 9);
  CHECK(p.init_net.output() == 2 * p.dims.hidden);
  CHECK(p.cascade_head.output == 63);
}

TEST_CASE("canonicalization keeps the camera view and zeroes frame-0 yaw and position") {
  const auto cfg = small_config(20);
  const synth::FeatureEncoder enc(8, 1);
  const synth::Sample s = synth::generate_sample(cfg, 11, 0, enc);
  const SequenceData c = canonicalize(s);
  CHECK(c.motion.tau[0].norm() == 0.0);
  CHECK(std::abs(geom::heading_yaw(c.motion.gamma[0])) < 1e-12);
  for (int t = 0; t < c.length(); ++t) {
    const Points3 a = s.camera.to_camera(body::world_landmarks(s.motion, t), t);
    const Points3 b = c.camera.to_camera(body::world_landmarks(c.motion, t), t);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((s.camera.omega[t] - c.camera.omega[t]).norm() < 1e-12);
  }
}

TEST_CASE("empty batch is rejected") {
  std::vector<const SequenceData*> none;
  CHECK_THROWS_AS(make_batch(none), InvalidInput);
}

TEST_CASE("zero weights: identity orientation, zero velocity, zero initial states") {
  const auto seqs = make_sequences(2, 6);
  const Batch batch = batch_of(seqs);
  WhamParams p = WhamParams::zeros(toy_dims());
  Tape tape(&p.store);
  const BoundModel m = bind(tape, p);
  const InitialStates s = neural_init(m, tape.constant(batch.init_pose));
  CHECK(s.encoder.value().isZero(0.0));
  CHECK(s.decoder.value().isZero(0.0));
  const auto r = forward(tape, m, batch, full_options());
  for (int t = 0; t < batch.frames; ++t) {
    for (Eigen::Index i = 0; i < batch.size; ++i) {
      CHECK(row_rotation(r.initial.gamma[t].value(), i) == Rotation::Identity());
      CHECK(row_rotation(r.motion.gamma_cam[t].value(), i) == geom::level_camera());
    }
    CHECK(r.initial.velocity[t].value().isZero(0.0));
    // Zero GRU weights: h' = h / 2 from a zero state stays zero.
    CHECK(r.features.phi_m[t].value().isZero(0.0));
  }
}

TEST_CASE("identical poses give identical initial states") {
  WhamParams p = WhamParams::create(toy_dims(), 4);
  randomize(p, 5);
  Tensor2 pose = Tensor2::Random(2, kPoseDim);
  pose.row(1) = pose.row(0);
  Tape tape(&p.store);
  const auto s = neural_init(bind(tape, p), tape.constant(pose));
  CHECK(same(s.encoder.value().row(0), s.encoder.value().row(1)));
  CHECK(same(s.decoder.value().row(0), s.decoder.value().row(1)));
  CHECK(!s.encoder.value().isZero(0.0));
}

TEST_CASE("residual identities hold bit-for-bit at initialization") {
  const auto seqs = make_sequences(2, 8);
  const Batch batch = batch_of(seqs);
  WhamParams p = WhamParams::create(toy_dims(), 9);
  Tape tape(&p.store);
  const BoundModel m = bind(tape, p);
  const auto r = forward(tape, m, batch, full_options());
  for (int t = 0; t < batch.frames; ++t) {
    CHECK(same(r.features.phi_hat[t].value(), r.features.phi_m[t].value()));
    CHECK(same(r.refined.gamma[t].value(), r.initial.gamma[t].value()));
    CHECK(same(r.refined.velocity[t].value(), r.v_tilde[t].value()));
  }

  // Pretraining mode skips the integrator altogether.
  randomize(p, 10);
  Tape tape2(&p.store);
  ForwardOptions pre;
  const auto r2 = forward(tape2, bind(tape2, p), batch, pre);
  for (int t = 0; t < batch.frames; ++t) CHECK(same(r2.features.phi_hat[t].value(), r2.features.phi_m[t].value()));
}

TEST_CASE("no-refiner mode rolls out the initial trajectory without adjustment") {
  const auto seqs = make_sequences(1, 8);
  const Batch batch = batch_of(seqs);
  WhamParams p = WhamParams::create(toy_dims(), 9);
  randomize(p, 2);
  ForwardOptions o = full_options();
  o.refiner = false;
  const auto out = infer(p, seqs[0], o);
  for (int t = 0; t < out.length(); ++t) {
    CHECK(out.gamma[t] == out.gamma0[t]);
    CHECK(out.velocity[t] == out.v0[t]);
  }
  const auto tau = rollout(out.gamma0, out.v0);
  for (int t = 0; t < out.length(); ++t) CHECK((tau[t] - out.tau[t]).norm() < 1e-14);
}

TEST_CASE("outputs at frame t ignore inputs after t; adjusted velocity looks one frame ahead") {
  const auto seqs = make_sequences(1, 10);
  Batch a = batch_of(seqs);
  WhamParams p = WhamParams::create(toy_dims(), 21);
  randomize(p, 22);
  const int cut = 5;
  Batch b = a;
  for (int t = cut + 1; t < a.frames; ++t) {
    b.input[t].array() += 0.7;
    b.features[t].array() -= 0.3;
    b.omega[t].array() += 0.05;
    b.box[t].array() *= 1.1;
  }
  Tape ta(&p.store), tb(&p.store);
  const auto ra = forward(ta, bind(ta, p), a, full_options());
  const auto rb = forward(tb, bind(tb, p), b, full_options());
  for (int t = 0; t <= cut; ++t) {
    CHECK(same(ra.features.phi_m[t].value(), rb.features.phi_m[t].value()));
    CHECK(same(ra.features.phi_hat[t].value(), rb.features.phi_hat[t].value()));
    CHECK(same(ra.features.x3d[t].value(), rb.features.x3d[t].value()));
    CHECK(same(ra.motion.local[t].value(), rb.motion.local[t].value()));
    CHECK(same(ra.motion.contact[t].value(), rb.motion.contact[t].value()));
    CHECK(same(ra.motion.cam[t].value(), rb.motion.cam[t].value()));
    CHECK(same(ra.motion.gamma_cam[t].value(), rb.motion.gamma_cam[t].value()));
    CHECK(same(ra.initial.gamma[t].value(), rb.initial.gamma[t].value()));
    CHECK(same(ra.initial.velocity[t].value(), rb.initial.velocity[t].value()));
    CHECK(same(ra.tau[t].value(), rb.tau[t].value()));
  }
  for (int t = 0; t < cut; ++t) {
    CHECK(same(ra.v_tilde[t].value(), rb.v_tilde[t].value()));
    CHECK(same(ra.refined.gamma[t].value(), rb.refined.gamma[t].value()));
    CHECK(same(ra.refined.velocity[t].value(), rb.refined.velocity[t].value()));
  }
  CHECK(!same(ra.features.phi_m[cut + 1].value(), rb.features.phi_m[cut + 1].value()));
}

TEST_CASE("constant input drives the encoder state to a fixed point") {
  WhamParams p = WhamParams::create(toy_dims(), 31);
  Tape tape(&p.store);
  const BoundModel m = bind(tape, p);
  const Tensor2 x = Tensor2::Constant(1, kInputDim, 0.3);
  std::vector<nn::Var> inputs(40, tape.constant(x));
  const auto f = encode(m, inputs, tape.constant(Tensor2::Zero(1, p.dims.hidden)));
  double prev = std::numeric_limits<double>::infinity();
  for (int t = 10; t + 1 < 40; ++t) {
    const double step = (f.phi_m[t + 1].value() - f.phi_m[t].value()).norm();
    CHECK(step <= prev);
    prev = step;
  }
  CHECK(prev < 1e-3);
  CHECK_THROWS_AS(encode(m, std::span<const nn::Var>{}, tape.constant(Tensor2::Zero(1, 8))), InvalidInput);
}

TEST_CASE("saturated contact logits give p = 1") {
  const auto seqs = make_sequences(1, 4);
  WhamParams p = WhamParams::create(toy_dims(), 3);
  auto bias = p.store.view(p.motion_head.bias);
  for (int k = 0; k < 4; ++k) bias(0, kPoseDim + k) = 1e3;
  const auto out = infer(p, seqs[0], full_options());
  for (const auto& c : out.contact)
    for (double v : c) CHECK(v == 1.0);
}

TEST_CASE("6D heads decode to proper rotations for arbitrary weights") {
  const auto seqs = make_sequences(2, 6);
  const Batch batch = batch_of(seqs);
  WhamParams p = WhamParams::create(toy_dims(), 7);
  randomize(p, 8, 2.0);
  Tape tape(&p.store);
  const auto r = forward(tape, bind(tape, p), batch, full_options());
  for (int t = 0; t < batch.frames; ++t) {
    for (Eigen::Index i = 0; i < batch.size; ++i) {
      for (const Tensor2* rows : {&r.initial.gamma[t].value(), &r.refined.gamma[t].value(),
                                  &r.motion.gamma_cam[t].value()}) {
        CHECK(geom::is_rotation(row_rotation(*rows, i), 1e-9));
      }
    }
  }
}

TEST_CASE("rollout examples and velocity round trip") {
  std::vector<Rotation> g(101, Rotation::Identity());
  std::vector<Vec3> v(101, Vec3(0, 0, 0.01));
  const Vec3 tau0(1, 2, 3);
  const auto tau = model::rollout(g, v, tau0);
  CHECK((tau[100] - (tau0 + Vec3(0, 0, 1.0))).norm() < 1e-12);
  const auto still = model::rollout(g, std::vector<Vec3>(101, Vec3::Zero()), tau0);
  for (const auto& t : still) CHECK(t == tau0);

  Rng rng(4);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 50;
    std::vector<Rotation> gamma(n);
    std::vector<Vec3> pos(n);
    Vec3 x(normal(rng, 0, 1), normal(rng, 0, 1), normal(rng, 0, 1));
    for (int t = 0; t < n; ++t) {
      gamma[t] = geom::exp_so3(Vec3(normal(rng, 0, 1), normal(rng, 0, 1), normal(rng, 0, 1)));
      x += Vec3(normal(rng, 0, 0.05), normal(rng, 0, 0.05), normal(rng, 0, 0.05));
      pos[t] = x;
    }
    const auto vel = extract_velocities(gamma, pos);
    const auto back = model::rollout(gamma, vel, pos[0]);
    for (int t = 0; t < n; ++t) worst = std::max(worst, (back[t] - pos[t]).norm());
  }
  CHECK(worst < 1e-9);
  CHECK_THROWS_AS(extract_velocities(std::vector<Rotation>(1), std::vector<Vec3>(1)), InvalidInput);
}

TEST_CASE("adjust_velocity examples") {
  FootVelocities vf{};
  for (auto& v : vf) v = Vec3(0.5, 0.5, 0.5);
  const Vec3 v0(0.02, 0, 0);
  CHECK(model::adjust_velocity(Rotation::Identity(), v0, body::Contact{0, 0, 0, 0}, vf) == v0);

  // left toe and left heel in contact, moving at 1 cm/frame
  vf[0] = vf[2] = Vec3(0.01, 0, 0);
  const Vec3 out = model::adjust_velocity(Rotation::Identity(), v0, body::Contact{1, 0, 1, 0}, vf);
  CHECK((out - Vec3(0.01, 0, 0)).norm() < 1e-15);

  // the root frame matters: v_tilde is expressed in the root frame
  const Rotation g = geom::rot_y(0.5 * std::numbers::pi);
  const Vec3 rotated = model::adjust_velocity(g, Vec3::Zero(), body::Contact{1, 0, 1, 0}, vf);
  CHECK((g * rotated + Vec3(0.01, 0, 0)).norm() < 1e-15);
}

TEST_CASE("truth pose and contact make the stance foot static after rollout") {
  for (auto kind : {body::GaitKind::kWalk, body::GaitKind::kTurn, body::GaitKind::kStairs}) {
    const auto seq = body::generate_gait(kind, 90, 30, 17);
    std::vector<body::Landmarks> local;
    for (const auto& l : seq.local) local.push_back(l.positions);
    // a deliberately wrong v0: the contact frames must not depend on it
    std::vector<Vec3> v0(seq.length(), Vec3(0.03, -0.01, 0.05));
    const auto vt = model::adjust_velocity(seq.gamma, v0, local, seq.contact);
    const auto tau = model::rollout(seq.gamma, vt, seq.tau[0]);
    body::MotionSequence rolled = seq;
    rolled.tau = tau;
    double worst = 0.0;
    int stance = 0;
    for (int t = 0; t + 1 < seq.length(); ++t) {
      const auto a = body::world_landmarks(rolled, t);
      const auto b = body::world_landmarks(rolled, t + 1);
      for (int k = 0; k < body::kNumContacts; ++k) {
        if (seq.contact[t + 1][k] <= kContactThreshold) continue;
        const int j = body::kContactLandmarks[k];
        worst = std::max(worst, (b.row(j) - a.row(j)).norm());
        ++stance;
      }
    }
    CHECK(stance > 20);
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("graph adjust_velocity matches the plain version") {
  const int frames = 7, b = 3;
  Rng rng(12);
  Tape tape;
  Trajectory tr;
  std::vector<nn::Var> local, contact;
  std::vector<std::vector<Rotation>> g(b, std::vector<Rotation>(frames));
  std::vector<std::vector<Vec3>> v(b, std::vector<Vec3>(frames));
  std::vector<std::vector<body::Landmarks>> l(b, std::vector<body::Landmarks>(frames));
  std::vector<std::vector<body::Contact>> p(b, std::vector<body::Contact>(frames));
  for (int t = 0; t < frames; ++t) {
    Tensor2 gr(b, 9), vr(b, 3), lr(b, kPoseDim), pr(b, 4);
    for (int i = 0; i < b; ++i) {
      g[i][t] = geom::exp_so3(Vec3::Random());
      v[i][t] = 0.05 * Vec3::Random();
      l[i][t] = body::Landmarks::Random();
      for (int k = 0; k < 4; ++k) p[i][t][k] = uniform(rng, 0, 1);
      gr.row(i) = rotation_row(g[i][t]);
      vr.row(i) = v[i][t].transpose();
      lr.row(i) = landmarks_row(l[i][t]);
      for (int k = 0; k < 4; ++k) pr(i, k) = p[i][t][k];
    }
    if (t == 2) pr.setZero();  // no contact at all on one frame
    if (t == 2)
      for (auto& pi : p) pi[t].fill(0.0);
    tr.gamma.push_back(tape.constant(gr));
    tr.velocity.push_back(tape.constant(vr));
    local.push_back(tape.constant(lr));
    contact.push_back(tape.constant(pr));
  }
  const auto graph = model::adjust_velocity(tr, local, contact);
  for (int i = 0; i < b; ++i) {
    const auto plain = model::adjust_velocity(g[i], v[i], l[i], p[i]);
    for (int t = 0; t < frames; ++t) {
      const Vec3 gv(graph[t].value()(i, 0), graph[t].value()(i, 1), graph[t].value()(i, 2));
      CHECK((gv - plain[t]).norm() < 1e-12);
    }
  }
}

TEST_CASE("full model gradients pass grad_check at toy dims") {
  const auto seqs = make_sequences(2, 4, 4);
  const Batch batch = batch_of(seqs, 0.02);
  WhamParams p = WhamParams::create(toy_dims(4), 13);
  wake_zero_layers(p, 14);
  const losses::LossWeights w;
  for (InitMode mode : {InitMode::kTruth, InitMode::kPredicted}) {
    ForwardOptions opt = full_options();
    opt.init = mode;
    nn::ParamStore store = p.store;
    auto loss = [&](const Eigen::VectorXd& params, Eigen::VectorXd* grad) {
      store.values() = params;
      WhamParams q = p;
      q.store = store;
      Tape tape(&q.store);
      const auto r = forward(tape, bind(tape, q), batch, opt);
      const auto g = losses::total_loss(r, batch, w);
      if (grad) {
        tape.backward(g.total);
        *grad = tape.param_grad();
      }
      return g.total.value()(0, 0);
    };
    const auto report = nn::grad_check(p.store, loss);
    for (const auto& b : report.blocks) INFO(b.name << " " << b.max_rel_error);
    CHECK(report.passed);
    CHECK(report.max_rel_error < 1e-4);
  }
}

TEST_CASE("output NDJSON round trip") {
  const auto seqs = make_sequences(1, 5);
  WhamParams p = WhamParams::create(toy_dims(), 3);
  randomize(p, 4);
  const WhamOutput o = infer(p, seqs[0], full_options());
  std::stringstream ss;
  write_output(ss, o);
  const WhamOutput back = read_output(ss);
  REQUIRE(back.length() == o.length());
  for (int t = 0; t < o.length(); ++t) {
    CHECK(back.tau[t] == o.tau[t]);
    CHECK(back.gamma[t] == o.gamma[t]);
    CHECK(back.local[t].positions == o.local[t].positions);
    CHECK(back.contact[t] == o.contact[t]);
  }
  std::stringstream bad("{\"fps\": 30}\n");
  CHECK_THROWS_AS(read_output(bad), FormatError);
}
