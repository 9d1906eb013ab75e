#include "whamkit/model/network.h"

#include "whamkit/core/error.h"
#include "whamkit/model/ops.h"

#include <array>

namespace whamkit::model {

namespace {

Var konst(nn::Tape& tape, Tensor2 v) { return tape.constant(std::move(v)); }

// Right-multiplying a B x 63 pose by this matrix subtracts the pelvis (hip
// midpoint) from every landmark.
const Tensor2& centering_matrix() {
  static const Tensor2 c = [] {
    Tensor2 m = Tensor2::Identity(kPoseDim, kPoseDim);
    for (int j = 0; j < body::kNumLandmarks; ++j) {
      for (int k = 0; k < 3; ++k) {
        m(3 * body::kLeftHip + k, 3 * j + k) -= 0.5;
        m(3 * body::kRightHip + k, 3 * j + k) -= 0.5;
      }
    }
    return m;
  }();
  return c;
}

Var center_pose(Var raw) { return nn::matmul(raw, konst(*raw.tape, centering_matrix())); }

Tensor2 six_row(double a0, double a1, double a2, double b0, double b1, double b2) {
  Tensor2 r(1, 6);
  r << a0, a1, a2, b0, b1, b2;
  return r;
}

// Rotation6D of the identity and of the level camera.
const Tensor2& identity_6d() {
  static const Tensor2 r = six_row(1, 0, 0, 0, 1, 0);
  return r;
}
const Tensor2& level_camera_6d() {
  static const Tensor2 r = six_row(-1, 0, 0, 0, -1, 0);
  return r;
}

Var six_to_rotation(Var raw, const Tensor2& reference) {
  return nn::rot6d_to_mat(nn::add_row(raw, konst(*raw.tape, reference)));
}

// First two columns of row-major 3x3 rows.
const std::vector<Eigen::Index> kSixCols = {0, 3, 6, 1, 4, 7};

std::vector<Eigen::Index> foot_columns() {
  std::vector<Eigen::Index> cols;
  for (int j : body::kContactLandmarks)
    for (int k = 0; k < 3; ++k) cols.push_back(3 * j + k);
  return cols;
}

Tensor2 group_sum_matrix() {
  Tensor2 s = Tensor2::Zero(3 * body::kNumContacts, 3);
  for (int l = 0; l < body::kNumContacts; ++l) s.block(3 * l, 0, 3, 3).setIdentity();
  return s;
}

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw InvalidInput(std::string(what) + ": sequence lengths differ");
  if (a == 0) throw InvalidInput(std::string(what) + ": empty sequence");
}

}  // namespace

BoundModel bind(nn::Tape& tape, const WhamParams& p) {
  if (tape.params() != &p.store) throw InvalidInput("tape is not bound to these parameters");
  BoundModel m;
  m.params = &p;
  m.encoder = nn::bind(tape, p.encoder);
  m.cascade_head = nn::bind(tape, p.cascade_head);
  m.integrator = nn::bind(tape, p.integrator);
  m.motion_decoder = nn::bind(tape, p.motion_decoder);
  m.motion_head = nn::bind(tape, p.motion_head);
  m.trajectory_decoder = nn::bind(tape, p.trajectory_decoder);
  m.trajectory_head = nn::bind(tape, p.trajectory_head);
  m.refiner = nn::bind(tape, p.refiner);
  m.refiner_head = nn::bind(tape, p.refiner_head);
  m.init_net = nn::bind(tape, p.init_net);
  return m;
}

InitialStates neural_init(const BoundModel& m, Var pose0) {
  const Var out = nn::apply(m.init_net, pose0);
  const int h = m.params->dims.hidden;
  return {nn::slice_cols(out, 0, h), nn::slice_cols(out, h, h)};
}

InitialStates zero_states(nn::Tape& tape, const BoundModel& m, Eigen::Index batch) {
  const Var z = konst(tape, Tensor2::Zero(batch, m.params->dims.hidden));
  return {z, z};
}

MotionFeatures encode(const BoundModel& m, std::span<const Var> inputs, Var h0) {
  if (inputs.empty()) throw InvalidInput("encode: empty sequence");
  MotionFeatures f;
  Var h = h0;
  for (const Var& x : inputs) {
    h = nn::gru_step(m.encoder, x, h);
    f.phi_m.push_back(h);
    f.x3d.push_back(center_pose(nn::apply(m.cascade_head, h)));
  }
  f.phi_hat = f.phi_m;
  return f;
}

std::vector<Var> integrate(const BoundModel& m, std::span<const Var> phi_m, std::span<const Var> features) {
  check_lengths(phi_m.size(), features.size(), "integrate");
  std::vector<Var> out;
  out.reserve(phi_m.size());
  for (std::size_t t = 0; t < phi_m.size(); ++t) {
    const std::array<Var, 2> parts = {phi_m[t], features[t]};
    out.push_back(nn::add(phi_m[t], nn::apply(m.integrator, nn::concat_cols(parts))));
  }
  return out;
}

MotionDecoded decode_motion(const BoundModel& m, std::span<const Var> phi_hat, Var h0, std::span<const Var> box) {
  check_lengths(phi_hat.size(), box.size(), "decode_motion");
  constexpr int kContactAt = kPoseDim;
  constexpr int kCamAt = kContactAt + body::kNumContacts;
  constexpr int kBetaAt = kCamAt + 3;
  constexpr int kRotAt = kBetaAt + body::kNumBones;

  MotionDecoded d;
  Var h = h0;
  for (std::size_t t = 0; t < phi_hat.size(); ++t) {
    h = nn::gru_step(m.motion_decoder, phi_hat[t], h);
    const Var y = nn::apply(m.motion_head, h);
    d.local.push_back(center_pose(nn::slice_cols(y, 0, kPoseDim)));
    d.contact.push_back(nn::sigmoid(nn::slice_cols(y, kContactAt, body::kNumContacts)));
    d.beta.push_back(nn::exp(nn::slice_cols(y, kBetaAt, body::kNumBones)));
    d.gamma_cam.push_back(six_to_rotation(nn::slice_cols(y, kRotAt, 6), level_camera_6d()));

    // Box-relative camera translation: depth from the box size, x/y from
    // the box center plus a box-scaled offset.
    nn::Tape& tape = *y.tape;
    const Tensor2 b = box[t].value();
    const Tensor2 depth_prior = kBoxMeters / b.col(2).array();
    const Tensor2 half = 0.5 * b.col(2);
    const Var z = nn::hadamard(konst(tape, depth_prior), nn::exp(nn::slice_cols(y, kCamAt + 2, 1)));
    const Var ux = nn::add(konst(tape, b.col(0)), nn::hadamard(konst(tape, half), nn::slice_cols(y, kCamAt, 1)));
    const Var uy =
        nn::add(konst(tape, b.col(1)), nn::hadamard(konst(tape, half), nn::slice_cols(y, kCamAt + 1, 1)));
    const std::array<Var, 3> xyz = {nn::hadamard(z, ux), nn::hadamard(z, uy), z};
    d.cam.push_back(nn::concat_cols(xyz));
  }
  return d;
}

Trajectory decode_trajectory(const BoundModel& m, std::span<const Var> phi_m, std::span<const Var> omega,
                             double fps) {
  check_lengths(phi_m.size(), omega.size(), "decode_trajectory");
  if (!(fps > 0.0)) throw InvalidInput("decode_trajectory: fps must be positive");
  Trajectory tr;
  Var h = zero_states(*phi_m[0].tape, m, phi_m[0].rows()).decoder;
  for (std::size_t t = 0; t < phi_m.size(); ++t) {
    const std::array<Var, 2> parts = {phi_m[t], nn::scale(omega[t], fps)};
    h = nn::gru_step(m.trajectory_decoder, nn::concat_cols(parts), h);
    const Var y = nn::apply(m.trajectory_head, h);
    tr.gamma.push_back(six_to_rotation(nn::slice_cols(y, 0, 6), identity_6d()));
    tr.velocity.push_back(nn::scale(nn::slice_cols(y, 6, 3), 1.0 / fps));
  }
  return tr;
}

std::vector<Var> adjust_velocity(const Trajectory& initial, std::span<const Var> local,
                                 std::span<const Var> contact) {
  const std::size_t n = initial.gamma.size();
  check_lengths(n, local.size(), "adjust_velocity");
  check_lengths(n, contact.size(), "adjust_velocity");
  static const std::vector<Eigen::Index> feet = foot_columns();
  static const Tensor2 group_sum = group_sum_matrix();
  nn::Tape& tape = *local[0].tape;
  const Var sum_feet = konst(tape, group_sum);

  std::vector<Var> out(initial.velocity.begin(), initial.velocity.end());
  for (std::size_t t = 0; t + 1 < n; ++t) {
    const Tensor2 p = contact[t + 1].value();
    const Eigen::Index b = p.rows();
    Tensor2 weight = Tensor2::Zero(b, 3 * body::kNumContacts);
    Tensor2 keep = Tensor2::Ones(b, 3);
    for (Eigen::Index i = 0; i < b; ++i) {
      int count = 0;
      for (int k = 0; k < body::kNumContacts; ++k) count += p(i, k) > kContactThreshold ? 1 : 0;
      if (count == 0) continue;
      for (int k = 0; k < body::kNumContacts; ++k) {
        if (p(i, k) > kContactThreshold) weight.block(i, 3 * k, 1, 3).setConstant(1.0 / count);
      }
      keep.row(i).setZero();
    }
    const Var now = nn::rotate_points(initial.gamma[t], nn::select_cols(local[t], feet));
    const Var next = nn::rotate_points(initial.gamma[t + 1], nn::select_cols(local[t + 1], feet));
    const Var mean = nn::matmul(nn::hadamard(nn::sub(next, now), konst(tape, weight)), sum_feet);
    out[t] = nn::sub(nn::hadamard(konst(tape, keep), initial.velocity[t]),
                     nn::mat3_vec(initial.gamma[t], mean, true));
  }
  return out;
}

Trajectory refine_trajectory(const BoundModel& m, std::span<const Var> phi_m, const Trajectory& initial,
                             std::span<const Var> v_tilde, double fps) {
  check_lengths(phi_m.size(), initial.gamma.size(), "refine_trajectory");
  check_lengths(phi_m.size(), v_tilde.size(), "refine_trajectory");
  Trajectory tr;
  Var h = zero_states(*phi_m[0].tape, m, phi_m[0].rows()).decoder;
  for (std::size_t t = 0; t < phi_m.size(); ++t) {
    const std::array<Var, 3> parts = {phi_m[t], nn::select_cols(initial.gamma[t], kSixCols),
                                      nn::scale(v_tilde[t], fps)};
    h = nn::gru_step(m.refiner, nn::concat_cols(parts), h);
    const Var y = nn::apply(m.refiner_head, h);
    tr.gamma.push_back(nn::mat3_mul(initial.gamma[t], six_to_rotation(nn::slice_cols(y, 0, 6), identity_6d())));
    tr.velocity.push_back(nn::add(v_tilde[t], nn::scale(nn::slice_cols(y, 6, 3), 1.0 / fps)));
  }
  return tr;
}

std::vector<Var> rollout(const Trajectory& traj, Var tau0) {
  check_lengths(traj.gamma.size(), traj.velocity.size(), "rollout");
  std::vector<Var> tau{tau0};
  for (std::size_t t = 1; t < traj.gamma.size(); ++t) {
    tau.push_back(nn::add(tau[t - 1], nn::mat3_vec(traj.gamma[t - 1], traj.velocity[t - 1])));
  }
  return tau;
}

ForwardResult forward(nn::Tape& tape, const BoundModel& m, const Batch& batch, const ForwardOptions& opt) {
  if (batch.size < 1 || batch.frames < 1) throw InvalidInput("forward: empty batch");
  const Eigen::Index b = batch.size;
  std::vector<Var> inputs, box, omega, feats;
  for (int t = 0; t < batch.frames; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    inputs.push_back(konst(tape, batch.input[ts]));
    box.push_back(konst(tape, batch.box[ts]));
    omega.push_back(konst(tape, opt.omega ? batch.omega[ts] : Tensor2::Zero(b, 3)));
    if (opt.integrator) feats.push_back(konst(tape, batch.features[ts]));
  }

  ForwardResult r;
  const InitialStates zero = zero_states(tape, m, b);
  r.x3d_zero = center_pose(nn::apply(m.cascade_head, nn::gru_step(m.encoder, inputs[0], zero.encoder)));
  InitialStates init = zero;
  switch (opt.init) {
    case InitMode::kZero: break;
    case InitMode::kTruth: init = neural_init(m, konst(tape, batch.init_pose)); break;
    case InitMode::kPredicted: init = neural_init(m, r.x3d_zero); break;
  }

  r.features = encode(m, inputs, init.encoder);
  if (opt.integrator) r.features.phi_hat = integrate(m, r.features.phi_m, feats);
  r.motion = decode_motion(m, r.features.phi_hat, init.decoder, box);
  r.initial = decode_trajectory(m, r.features.phi_m, omega, batch.fps);
  if (opt.refiner) {
    r.v_tilde = adjust_velocity(r.initial, r.motion.local, r.motion.contact);
    r.refined = refine_trajectory(m, r.features.phi_m, r.initial, r.v_tilde, batch.fps);
  } else {
    r.v_tilde = r.initial.velocity;
    r.refined = r.initial;
  }
  r.tau = rollout(r.refined, konst(tape, Tensor2::Zero(b, 3)));
  return r;
}

}  // namespace whamkit::model
