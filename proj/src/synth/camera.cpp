#include "whamkit/synth/camera.h"

#include "whamkit/core/error.h"
#include "whamkit/core/random.h"
#include "whamkit/geom/conventions.h"
#include "whamkit/geom/so3.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace whamkit::synth {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<double> jittered_timestamps(int frames, double noise, Rng& rng) {
  std::vector<double> s(static_cast<std::size_t>(frames), 0.0);
  if (frames < 2) return s;
  double total = 0.0;
  for (int t = 1; t < frames; ++t) {
    const double step = std::max(1e-3, 1.0 + noise * normal(rng, 0.0, 1.0));
    total += step;
    s[static_cast<std::size_t>(t)] = total;
  }
  for (double& v : s) v /= total;
  s.back() = 1.0;
  return s;
}

}  // namespace

CameraTrajectory CameraTrajectory::from_extrinsics(double fps, const geom::Pinhole& intrinsics,
                                                   std::vector<Rotation> rotation,
                                                   std::vector<Vec3> translation) {
  CameraTrajectory c;
  c.fps = fps;
  c.intrinsics = intrinsics;
  c.rotation = std::move(rotation);
  c.translation = std::move(translation);
  c.omega = geom::angular_velocity(c.rotation);
  c.validate();
  return c;
}

void CameraTrajectory::validate() const {
  intrinsics.validate();
  const auto n = rotation.size();
  if (n < 2) throw InvalidInput("camera trajectory: need at least two frames");
  if (translation.size() != n || omega.size() != n) {
    throw InvalidInput("camera trajectory: per-frame arrays have different lengths");
  }
  if (!(fps > 0.0)) throw InvalidInput("camera trajectory: fps must be positive");
  for (std::size_t t = 0; t < n; ++t) {
    if (!geom::is_rotation(rotation[t], 1e-6) || !translation[t].allFinite() ||
        !omega[t].allFinite()) {
      throw InvalidInput("camera trajectory: invalid extrinsics at frame " + std::to_string(t));
    }
  }
}

Points3 CameraTrajectory::to_camera(const body::Landmarks& world, int t) const {
  const auto i = static_cast<std::size_t>(t);
  Points3 out = world * rotation.at(i).transpose();
  out.rowwise() += translation[i].transpose();
  return out;
}

Vec3 CameraTrajectory::to_camera(const Vec3& world, int t) const {
  const auto i = static_cast<std::size_t>(t);
  return rotation.at(i) * world + translation[i];
}

CameraConfig CameraConfig::fixed() {
  CameraConfig c;
  c.roll_std = 0.0;
  c.pitch_mean = 0.0;
  c.pitch_std = 0.0;
  c.depth_min = c.depth_max = 7.0;
  c.lateral_std = 0.0;
  c.end_yaw_std = c.end_roll_std = c.end_pitch_std = 0.0;
  c.end_translation_std = 0.0;
  c.timestamp_noise = 0.0;
  return c;
}

void CameraConfig::validate() const {
  const double stds[] = {roll_std,     pitch_std,     lateral_std,         end_yaw_std,
                         end_roll_std, end_pitch_std, end_translation_std, timestamp_noise};
  for (double s : stds) {
    if (!(s >= 0.0)) throw InvalidInput("camera config: standard deviations must be non-negative");
  }
  if (!(depth_min > 0.0) || !(depth_max >= depth_min)) {
    throw InvalidInput("camera config: need 0 < depth_min <= depth_max");
  }
  if (max_attempts < 1) throw InvalidInput("camera config: max_attempts must be >= 1");
}

double max_displacement(const geom::Pinhole& pinhole, double depth) {
  return pinhole.width * depth / (2.0 * pinhole.focal);
}

Rotation tilted_camera(double roll, double pitch) {
  return geom::rot_z(roll) * geom::rot_x(pitch) * geom::level_camera();
}

CameraTrajectory synth_camera(const body::MotionSequence& seq, const geom::Pinhole& pinhole,
                              std::uint64_t seed, const CameraConfig& cfg) {
  seq.validate();
  pinhole.validate();
  cfg.validate();
  const int frames = seq.length();
  std::vector<body::Landmarks> world;
  world.reserve(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) world.push_back(body::world_landmarks(seq, t));
  const Vec3 root0 = seq.tau.front();

  Rng rng(seed);
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const double roll = normal(rng, cfg.roll_mean, cfg.roll_std) * kDeg;
    const double pitch = normal(rng, cfg.pitch_mean, cfg.pitch_std) * kDeg;
    const Rotation r0 = tilted_camera(roll, pitch);

    const double depth = uniform(rng, cfg.depth_min, cfg.depth_max);
    const double d = max_displacement(pinhole, depth);
    const Vec3 placed(normal(rng, 0.0, cfg.lateral_std) * d, normal(rng, 0.0, cfg.lateral_std) * d,
                      depth);
    const Vec3 t0 = placed - r0 * root0;

    const double d_yaw = normal(rng, 0.0, cfg.end_yaw_std) * kDeg;
    const double d_roll = normal(rng, 0.0, cfg.end_roll_std) * kDeg;
    const double d_pitch = normal(rng, 0.0, cfg.end_pitch_std) * kDeg;
    const Rotation r1 = tilted_camera(roll + d_roll, pitch + d_pitch) * geom::rot_y(d_yaw);
    const Vec3 t1 = t0 + Vec3(normal(rng, 0.0, cfg.end_translation_std),
                              normal(rng, 0.0, cfg.end_translation_std),
                              normal(rng, 0.0, cfg.end_translation_std));

    const auto stamps = jittered_timestamps(frames, cfg.timestamp_noise, rng);
    std::vector<Rotation> rot(static_cast<std::size_t>(frames));
    std::vector<Vec3> trans(static_cast<std::size_t>(frames));
    for (std::size_t t = 0; t < rot.size(); ++t) {
      rot[t] = geom::slerp(r0, r1, stamps[t]);
      trans[t] = t0 + stamps[t] * (t1 - t0);
    }

    const Vec3 root_cam = r0 * root0 + t0;
    if (!(root_cam.z() > geom::kMinDepth)) continue;
    const Vec2 px = geom::project(pinhole, root_cam);
    if (px.x() < 0.0 || px.x() > pinhole.width || px.y() < 0.0 || px.y() > pinhole.height) continue;

    bool in_front = true;
    for (std::size_t t = 0; t < rot.size() && in_front; ++t) {
      const Eigen::VectorXd z = world[t] * rot[t].row(2).transpose();
      in_front = (z.array() + trans[t].z()).minCoeff() >= cfg.min_landmark_depth;
    }
    if (!in_front) continue;

    return CameraTrajectory::from_extrinsics(seq.fps, pinhole, std::move(rot), std::move(trans));
  }
  throw NumericError("synth_camera: no valid camera after " + std::to_string(cfg.max_attempts) +
                     " attempts");
}

body::MotionSequence apply_root_yaw(const body::MotionSequence& seq, double yaw) {
  return body::transform_world(seq, geom::rot_y(yaw), Vec3::Zero());
}

}  // namespace whamkit::synth
