#include "whamkit/model/batch.h"

#include "whamkit/core/error.h"
#include "whamkit/core/random.h"
#include "whamkit/geom/so3.h"
#include "whamkit/model/ops.h"
#include "whamkit/model/wham.h"

#include <cmath>

namespace whamkit::model {

SequenceData canonicalize(const synth::Sample& sample) {
  const auto& m = sample.motion;
  m.validate();
  sample.camera.validate();
  if (sample.camera.length() != m.length() || sample.keypoints.length() != m.length() ||
      sample.features.rows() != m.length()) {
    throw InvalidInput("sample streams disagree in length");
  }
  const Rotation c = geom::rot_y(-geom::heading_yaw(m.gamma[0]));
  const Vec3 shift = -(c * m.tau[0]);

  SequenceData out;
  out.gait = sample.gait;
  out.motion = body::transform_world(m, c, shift);
  out.motion.tau[0].setZero();  // exact, not just up to rounding
  std::vector<Rotation> rot(m.length());
  std::vector<Vec3> trans(m.length());
  for (int t = 0; t < m.length(); ++t) {
    // x_cam = R x + T with x = C^T (x' - shift)
    rot[t] = sample.camera.rotation[t] * c.transpose();
    trans[t] = sample.camera.translation[t] - rot[t] * shift;
  }
  out.camera = synth::CameraTrajectory::from_extrinsics(sample.camera.fps, sample.camera.intrinsics,
                                                        std::move(rot), std::move(trans));
  out.keypoints = sample.keypoints;
  out.features = sample.features;
  return out;
}

Eigen::RowVectorXd encode_input(const synth::KeypointSequence2D& kp, const geom::Pinhole& pinhole, int t) {
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(kInputDim);
  const int n = body::kNumKeypoints2D;
  for (int j = 0; j < n; ++j) {
    if (!kp.mask[t][j]) continue;
    x(2 * j) = kp.keypoints[t](j, 0);
    x(2 * j + 1) = kp.keypoints[t](j, 1);
    x(2 * n + j) = 1.0;
  }
  const Vec2 c = kp.center_pixels(t);
  x(3 * n) = (c.x() - pinhole.cx) / pinhole.focal;
  x(3 * n + 1) = (c.y() - pinhole.cy) / pinhole.focal;
  x(3 * n + 2) = kp.scale_pixels(t) / pinhole.focal;
  return x;
}

Tensor2 rotation_row(const Rotation& r) {
  Tensor2 out(1, 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(0, 3 * i + j) = r(i, j);
  return out;
}

Rotation row_rotation(const Tensor2& rows, Eigen::Index i) {
  Rotation r;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) r(a, b) = rows(i, 3 * a + b);
  return r;
}

Tensor2 landmarks_row(const body::Landmarks& l) {
  Tensor2 out(1, kPoseDim);
  for (int j = 0; j < body::kNumLandmarks; ++j)
    for (int k = 0; k < 3; ++k) out(0, 3 * j + k) = l(j, k);
  return out;
}

body::Landmarks row_landmarks(const Tensor2& rows, Eigen::Index i) {
  body::Landmarks l;
  for (int j = 0; j < body::kNumLandmarks; ++j)
    for (int k = 0; k < 3; ++k) l(j, k) = rows(i, 3 * j + k);
  return l;
}

namespace {

std::vector<Tensor2> frames_of(int frames, Eigen::Index b, Eigen::Index cols) {
  return std::vector<Tensor2>(static_cast<std::size_t>(frames), Tensor2::Zero(b, cols));
}

}  // namespace

Batch make_batch(std::span<const SequenceData* const> seqs, double init_noise, std::uint64_t seed) {
  if (seqs.empty()) throw InvalidInput("empty batch");
  const int b = static_cast<int>(seqs.size());
  const int frames = seqs[0]->length();
  const double fps = seqs[0]->motion.fps;
  const Eigen::Index fdim = seqs[0]->features.cols();
  for (const SequenceData* s : seqs) {
    if (s->length() != frames || s->motion.fps != fps || s->features.cols() != fdim) {
      throw InvalidInput("batch sequences must share length, fps and feature width");
    }
  }
  if (frames < 2) throw InvalidInput("batch sequences need at least two frames");

  Batch out;
  out.size = b;
  out.frames = frames;
  out.fps = fps;
  out.input = frames_of(frames, b, kInputDim);
  out.features = frames_of(frames, b, fdim);
  out.omega = frames_of(frames, b, 3);
  out.box = frames_of(frames, b, 3);
  out.init_pose = Tensor2::Zero(b, kPoseDim);
  out.focal = out.principal_x = out.principal_y = out.image_width = Tensor2::Zero(b, 1);
  out.local = frames_of(frames, b, kPoseDim);
  out.beta = frames_of(frames, b, body::kNumBones);
  out.pose_cam = frames_of(frames, b, kPoseDim);
  out.contact = frames_of(frames, b, body::kNumContacts);
  out.gamma = frames_of(frames, b, 9);
  out.velocity = frames_of(frames, b, 3);
  out.tau = frames_of(frames, b, 3);
  out.gamma_cam = frames_of(frames, b, 9);
  out.cam_rotation = frames_of(frames, b, 9);
  out.keypoints_px = frames_of(frames, b, 2 * body::kNumKeypoints2D);
  out.keypoint_mask = frames_of(frames, b, body::kNumKeypoints2D);

  Rng rng(seed);
  for (int i = 0; i < b; ++i) {
    const SequenceData& s = *seqs[static_cast<std::size_t>(i)];
    const auto& pin = s.camera.intrinsics;
    out.focal(i, 0) = pin.focal;
    out.principal_x(i, 0) = pin.cx;
    out.principal_y(i, 0) = pin.cy;
    out.image_width(i, 0) = pin.width;
    const std::vector<Vec3> vel = extract_velocities(s.motion.gamma, s.motion.tau);
    for (int t = 0; t < frames; ++t) {
      const auto ts = static_cast<std::size_t>(t);
      out.input[ts].row(i) = encode_input(s.keypoints, pin, t);
      out.features[ts].row(i) = s.features.row(t);
      out.omega[ts].row(i) = s.camera.omega[ts].transpose();
      out.box[ts].row(i) = out.input[ts].row(i).tail(3);

      const auto& pose = s.motion.local[ts];
      out.local[ts].row(i) = landmarks_row(pose.positions);
      for (int k = 0; k < body::kNumBones; ++k) out.beta[ts](i, k) = pose.bone_scale[k];
      const Rotation gc = s.camera.rotation[ts] * s.motion.gamma[ts];
      const body::Landmarks cam = (pose.positions * gc.transpose()).eval();
      out.pose_cam[ts].row(i) = landmarks_row(cam);
      for (int k = 0; k < body::kNumContacts; ++k) out.contact[ts](i, k) = s.motion.contact[ts][k];
      out.gamma[ts].row(i) = rotation_row(s.motion.gamma[ts]);
      out.velocity[ts].row(i) = vel[ts].transpose();
      out.tau[ts].row(i) = s.motion.tau[ts].transpose();
      out.gamma_cam[ts].row(i) = rotation_row(gc);
      out.cam_rotation[ts].row(i) = rotation_row(s.camera.rotation[ts]);
      for (int j = 0; j < body::kNumKeypoints2D; ++j) {
        if (!s.keypoints.mask[ts][j]) continue;
        const Vec2 px = s.keypoints.to_pixels(t, j);
        out.keypoints_px[ts](i, 2 * j) = px.x();
        out.keypoints_px[ts](i, 2 * j + 1) = px.y();
        out.keypoint_mask[ts](i, j) = 1.0;
      }
    }
    out.init_pose.row(i) = out.pose_cam[0].row(i);
    if (init_noise > 0.0) {
      for (int k = 0; k < kPoseDim; ++k) out.init_pose(i, k) += normal(rng, 0.0, init_noise);
    }
  }
  return out;
}

}  // namespace whamkit::model
