#include "whamkit/losses/losses.h"

#include "whamkit/core/error.h"

#include <cmath>
#include <string>

namespace whamkit::losses {

using nn::Tensor2;
using nn::Var;

namespace {

constexpr std::array<std::string_view, kNumTerms> kNames = {
    "pose", "beta", "3d", "2d", "cascade", "gamma", "velocity", "contact", "omega", "cam", "fs"};

Var konst(nn::Tape& tape, Tensor2 v) { return tape.constant(std::move(v)); }

Var accumulate(Var acc, Var term) { return acc.tape ? nn::add(acc, term) : term; }

std::vector<Eigen::Index> coordinate_columns(int first, int count, int axis) {
  std::vector<Eigen::Index> cols;
  for (int j = first; j < first + count; ++j) cols.push_back(3 * j + axis);
  return cols;
}

std::vector<Eigen::Index> foot_columns() {
  std::vector<Eigen::Index> cols;
  for (int j : body::kContactLandmarks)
    for (int k = 0; k < 3; ++k) cols.push_back(3 * j + k);
  return cols;
}

// Broadcasts a B x 1 column across `cols` columns.
Tensor2 repeat_col(const Tensor2& col, Eigen::Index cols) { return col.replicate(1, cols); }

}  // namespace

std::string_view term_name(int term) {
  if (term < 0 || term >= kNumTerms) throw IndexError("loss term out of range");
  return kNames[static_cast<std::size_t>(term)];
}

void LossWeights::validate() const {
  for (int k = 0; k < kNumTerms; ++k) {
    if (!std::isfinite(lambda[k]) || lambda[k] < 0.0) {
      throw InvalidInput("loss weight " + std::string(term_name(k)) + " must be finite and >= 0");
    }
  }
}

LossBreakdown LossGraph::values() const {
  LossBreakdown b;
  for (int k = 0; k < kNumTerms; ++k) b.terms[k] = terms[k].value()(0, 0);
  b.total = total.value()(0, 0);
  b.visible_keypoints = visible_keypoints;
  return b;
}

LossGraph total_loss(const model::ForwardResult& out, const model::Batch& batch, const LossWeights& w) {
  w.validate();
  const int frames = batch.frames;
  const Eigen::Index b = batch.size;
  if (static_cast<int>(out.tau.size()) != frames) throw InvalidInput("total_loss: length mismatch");
  nn::Tape& tape = *out.tau[0].tape;
  const double n = static_cast<double>(b) * frames;
  const double n_rate = static_cast<double>(b) * std::max(1, frames - 1);
  const double fps2 = batch.fps * batch.fps;
  constexpr int kL = body::kNumLandmarks;
  constexpr int kK = body::kNumKeypoints2D;

  std::array<Var, kNumTerms> acc{};
  auto add_to = [&](int term, Var v) { acc[term] = accumulate(acc[term], v); };

  // 2D reprojection constants shared across frames.
  const auto xs = coordinate_columns(0, kK, 0), ys = coordinate_columns(0, kK, 1), zs = coordinate_columns(0, kK, 2);
  std::vector<Eigen::Index> kp_cols;
  for (int j = 0; j < 3 * kK; ++j) kp_cols.push_back(j);
  std::vector<Eigen::Index> kx, ky;
  for (int j = 0; j < kK; ++j) {
    kx.push_back(2 * j);
    ky.push_back(2 * j + 1);
  }
  const Var focal = konst(tape, repeat_col(batch.focal, kK));
  const Var px = konst(tape, repeat_col(batch.principal_x, kK));
  const Var py = konst(tape, repeat_col(batch.principal_y, kK));
  int visible = 0;
  for (const auto& m : batch.keypoint_mask) visible += static_cast<int>(m.sum());

  static const std::vector<Eigen::Index> feet = foot_columns();
  std::vector<Var> rotation(static_cast<std::size_t>(frames));
  Var feet_prev{};

  for (int t = 0; t < frames; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    const Var local = out.motion.local[ts];
    const Var x_hat = nn::rotate_points(out.motion.gamma_cam[ts], local);
    const Var pose_cam = konst(tape, batch.pose_cam[ts]);

    add_to(kPose, nn::sum_sq(nn::sub(local, konst(tape, batch.local[ts]))));
    add_to(kBeta, nn::sum_sq(nn::sub(out.motion.beta[ts], konst(tape, batch.beta[ts]))));
    add_to(k3D, nn::sum_sq(nn::sub(out.features.x3d[ts], pose_cam)));
    add_to(k3D, nn::sum_sq(nn::sub(x_hat, pose_cam)));
    add_to(kCascade, nn::sum_sq(nn::sub(out.features.x3d[ts], x_hat)));

    // Full-perspective reprojection of the 17 keypoint landmarks.
    {
      const Var pts = nn::translate_points(nn::select_cols(x_hat, kp_cols), out.motion.cam[ts]);
      const Var z = nn::select_cols(pts, zs);
      const Var zc = nn::add_scalar(nn::relu(nn::add_scalar(z, -kMinProjectionDepth)), kMinProjectionDepth);
      const Var u = nn::add(nn::hadamard(focal, nn::divide(nn::select_cols(pts, xs), zc)), px);
      const Var v = nn::add(nn::hadamard(focal, nn::divide(nn::select_cols(pts, ys), zc)), py);
      const Tensor2 kp = batch.keypoints_px[ts];
      Tensor2 weight = batch.keypoint_mask[ts];
      for (Eigen::Index i = 0; i < b; ++i) weight.row(i) /= batch.image_width(i, 0);
      const Var wv = konst(tape, weight);
      Tensor2 kpx(b, kK), kpy(b, kK);
      for (int j = 0; j < kK; ++j) {
        kpx.col(j) = kp.col(kx[static_cast<std::size_t>(j)]);
        kpy.col(j) = kp.col(ky[static_cast<std::size_t>(j)]);
      }
      const Var ex = nn::hadamard(wv, nn::sub(u, konst(tape, kpx)));
      const Var ey = nn::hadamard(wv, nn::sub(v, konst(tape, kpy)));
      Var err = nn::add(nn::sum_sq(ex), nn::sum_sq(ey));
      if (visible > 0) err = nn::scale(err, 1.0 / visible);
      const Var shortfall = nn::relu(nn::add_scalar(nn::scale(z, -1.0), kMinProjectionDepth));
      add_to(k2D, nn::add(err, nn::scale(nn::sum_sq(shortfall), 1.0 / (n * kK))));
    }

    const Var gamma_truth = konst(tape, batch.gamma[ts]);
    add_to(kGamma, nn::sum_sq(nn::sub(out.initial.gamma[ts], gamma_truth)));
    add_to(kGamma, nn::sum_sq(nn::sub(out.refined.gamma[ts], gamma_truth)));
    const Var v_truth = konst(tape, batch.velocity[ts]);
    add_to(kVelocity, nn::sum_sq(nn::sub(out.initial.velocity[ts], v_truth)));
    add_to(kVelocity, nn::sum_sq(nn::sub(out.refined.velocity[ts], v_truth)));
    add_to(kContact, nn::sum_sq(nn::sub(out.motion.contact[ts], konst(tape, batch.contact[ts]))));

    rotation[ts] = nn::mat3_mul(out.motion.gamma_cam[ts], out.refined.gamma[ts], false, true);
    add_to(kCam, nn::sum_sq(nn::sub(rotation[ts], konst(tape, batch.cam_rotation[ts]))));

    const Var feet_now = nn::translate_points(
        nn::rotate_points(out.refined.gamma[ts], nn::select_cols(local, feet)), out.tau[ts]);
    if (t > 0) {
      const Var rel = nn::mat3_mul(rotation[ts - 1], rotation[ts], false, true);
      add_to(kOmega, nn::sum_sq(nn::sub(nn::so3_log(rel), konst(tape, batch.omega[ts]))));
      Tensor2 p = Tensor2::Zero(b, 3 * body::kNumContacts);
      for (int k = 0; k < body::kNumContacts; ++k) {
        for (int a = 0; a < 3; ++a) p.col(3 * k + a) = batch.contact[ts].col(k);
      }
      add_to(kFootSlide, nn::sum_sq(nn::hadamard(konst(tape, p), nn::sub(feet_now, feet_prev))));
    }
    feet_prev = feet_now;
  }
  add_to(k3D, nn::sum_sq(nn::sub(out.x3d_zero, konst(tape, batch.pose_cam[0]))));

  const std::array<double, kNumTerms> norm = {
      1.0 / (n * kL),     1.0 / (n * body::kNumBones), 1.0 / (n * kL), 1.0,
      1.0 / (n * kL),     1.0 / n,                     fps2 / n,       1.0 / (n * body::kNumContacts),
      1.0 / n_rate,       1.0 / n,                     fps2 / (n_rate * body::kNumContacts)};

  LossGraph g;
  g.visible_keypoints = visible;
  for (int k = 0; k < kNumTerms; ++k) {
    Var term = acc[k].tape ? nn::scale(acc[k], norm[k]) : konst(tape, Tensor2::Zero(1, 1));
    const double value = term.value()(0, 0);
    if (!std::isfinite(value)) throw NumericError("loss term " + std::string(term_name(k)) + " is not finite");
    g.terms[k] = term;
    const Var weighted = nn::scale(term, w[k]);
    g.total = k == 0 ? weighted : nn::add(g.total, weighted);
  }
  return g;
}

ReprojectionLoss reprojection_loss(const Points3& camera_points, const Points2& truth_px,
                                   const geom::Pinhole& pinhole, const synth::VisibilityMask& mask) {
  if (camera_points.rows() < body::kNumKeypoints2D || truth_px.rows() < body::kNumKeypoints2D) {
    throw InvalidInput("reprojection_loss: need 17 keypoints");
  }
  ReprojectionLoss r;
  double penalty = 0.0;
  for (int j = 0; j < body::kNumKeypoints2D; ++j) {
    const double z = camera_points(j, 2);
    const double zc = std::max(z, kMinProjectionDepth);
    if (z < kMinProjectionDepth) penalty += (kMinProjectionDepth - z) * (kMinProjectionDepth - z);
    if (!mask[j]) continue;
    const double u = pinhole.focal * camera_points(j, 0) / zc + pinhole.cx;
    const double v = pinhole.focal * camera_points(j, 1) / zc + pinhole.cy;
    const double du = (u - truth_px(j, 0)) / pinhole.width;
    const double dv = (v - truth_px(j, 1)) / pinhole.width;
    r.value += du * du + dv * dv;
    ++r.counted;
  }
  if (r.counted > 0) r.value /= r.counted;
  r.value += penalty / body::kNumKeypoints2D;
  return r;
}

double foot_sliding_loss(std::span<const model::FootVelocities> velocity, std::span<const body::Contact> contact) {
  if (velocity.size() != contact.size()) throw InvalidInput("foot_sliding_loss: length mismatch");
  if (velocity.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t t = 0; t < velocity.size(); ++t) {
    for (int k = 0; k < body::kNumContacts; ++k) s += (contact[t][k] * velocity[t][k]).squaredNorm();
  }
  return s / (static_cast<double>(velocity.size()) * body::kNumContacts);
}

}  // namespace whamkit::losses
