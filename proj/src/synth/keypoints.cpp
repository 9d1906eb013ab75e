#include "whamkit/synth/keypoints.h"

#include "whamkit/core/error.h"
#include "whamkit/core/random.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace whamkit::synth {

using body::kNumKeypoints2D;

void KeypointSequence2D::validate() const {
  const auto n = keypoints.size();
  if (mask.size() != n || center.size() != n || scale.size() != n || carried.size() != n) {
    throw InvalidInput("keypoint sequence: per-frame arrays have different lengths");
  }
  if (!(image_width > 0.0) || !(image_height > 0.0)) {
    throw InvalidInput("keypoint sequence: image size must be positive");
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (!(scale[t] > 0.0) || !center[t].allFinite() || !keypoints[t].allFinite()) {
      throw InvalidInput("keypoint sequence: invalid box or keypoint at frame " + std::to_string(t));
    }
    for (int j = 0; j < kNumKeypoints2D; ++j) {
      const auto v = mask[t][static_cast<std::size_t>(j)];
      if (v > 1) throw InvalidInput("keypoint sequence: mask bits must be 0 or 1");
      if (v == 0 && keypoints[t].row(j).squaredNorm() != 0.0) {
        throw InvalidInput("keypoint sequence: masked keypoint is not zero-filled");
      }
      if (v == 1 && keypoints[t].row(j).cwiseAbs().maxCoeff() > 1.0) {
        throw InvalidInput("keypoint sequence: visible keypoint outside [-1, 1]");
      }
    }
  }
}

Vec2 KeypointSequence2D::center_pixels(int t) const {
  const Vec2& c = center.at(static_cast<std::size_t>(t));
  return {c.x() * image_width, c.y() * image_height};
}

double KeypointSequence2D::scale_pixels(int t) const {
  return scale.at(static_cast<std::size_t>(t)) * image_width;
}

Vec2 KeypointSequence2D::to_pixels(int t, int joint) const {
  const Vec2 kp = keypoints.at(static_cast<std::size_t>(t)).row(joint).transpose();
  return kp * (0.5 * scale_pixels(t)) + center_pixels(t);
}

void SynthConfig::validate() const {
  if (sequence_length < 2) throw InvalidInput("synth config: sequence_length must be >= 2");
  if (!(fps > 0.0)) throw InvalidInput("synth config: fps must be positive");
  if (!(mask_prob >= 0.0 && mask_prob <= 1.0)) {
    throw InvalidInput("synth config: mask_prob must lie in [0, 1]");
  }
  if (!(pixel_noise >= 0.0) || !(feature_noise >= 0.0) || !(bone_scale_std >= 0.0)) {
    throw InvalidInput("synth config: noise levels must be non-negative");
  }
  if (!(bbox_margin >= 1.0)) throw InvalidInput("synth config: bbox_margin must be >= 1");
  if (!(speed_min >= 0.5 && speed_min <= speed_max && speed_max <= 1.5)) {
    throw InvalidInput("synth config: speed range must lie within [0.5, 1.5]");
  }
  if (feature_dim < 1) throw InvalidInput("synth config: feature_dim must be >= 1");
  double mix = 0.0;
  for (double m : gait_mix) {
    if (!(m >= 0.0)) throw InvalidInput("synth config: gait_mix entries must be non-negative");
    mix += m;
  }
  if (!(mix > 0.0)) throw InvalidInput("synth config: gait_mix must have positive total");
  pinhole().validate();
  camera.validate();
}

geom::Pinhole SynthConfig::pinhole() const {
  return geom::Pinhole::centered(focal, image_width, image_height);
}

KeypointSequence2D synth_keypoints(const body::MotionSequence& seq, const CameraTrajectory& cams,
                                   const SynthConfig& cfg, std::uint64_t seed) {
  if (seq.length() != cams.length()) {
    throw InvalidInput("synth_keypoints: motion and camera lengths differ");
  }
  const geom::Pinhole& pin = cams.intrinsics;
  Rng noise_rng(derive_seed(seed, 0));
  Rng mask_rng(derive_seed(seed, 1));

  KeypointSequence2D out;
  out.image_width = pin.width;
  out.image_height = pin.height;
  const int frames = seq.length();

  Vec2 prev_center(pin.width / 2.0, pin.height / 2.0);
  double prev_side = std::max(pin.width, pin.height);

  for (int t = 0; t < frames; ++t) {
    const Points3 cam_pts = cams.to_camera(body::world_landmarks(seq, t), t);
    Keypoints2D px = Keypoints2D::Zero();
    VisibilityMask vis{};
    for (int j = 0; j < kNumKeypoints2D; ++j) {
      // Draw noise and mask for every keypoint so the streams stay aligned
      // regardless of which keypoints end up visible.
      const Vec2 noise(normal(noise_rng, 0.0, cfg.pixel_noise), normal(noise_rng, 0.0, cfg.pixel_noise));
      const bool masked = bernoulli(mask_rng, cfg.mask_prob);
      const Vec3 p = cam_pts.row(j).transpose();
      if (masked || !(p.z() > geom::kMinDepth)) continue;
      px.row(j) = (geom::project(pin, p) + noise).transpose();
      vis[static_cast<std::size_t>(j)] = 1;
    }

    int visible = 0;
    Vec2 lo = Vec2::Constant(1e300), hi = Vec2::Constant(-1e300);
    for (int j = 0; j < kNumKeypoints2D; ++j) {
      if (!vis[static_cast<std::size_t>(j)]) continue;
      ++visible;
      lo = lo.cwiseMin(px.row(j).transpose());
      hi = hi.cwiseMax(px.row(j).transpose());
    }

    Vec2 center = prev_center;
    double side = prev_side;
    const bool carry = visible < 2;
    if (!carry) {
      center = 0.5 * (lo + hi);
      side = std::max(1.0, cfg.bbox_margin * (hi - lo).maxCoeff());
    }

    Keypoints2D kp = Keypoints2D::Zero();
    for (int j = 0; j < kNumKeypoints2D; ++j) {
      auto& v = vis[static_cast<std::size_t>(j)];
      if (!v) continue;
      const Vec2 n = (px.row(j).transpose() - center) / (0.5 * side);
      if (n.cwiseAbs().maxCoeff() > 1.0) {
        v = 0;
        continue;
      }
      kp.row(j) = n.transpose();
    }

    out.keypoints.push_back(kp);
    out.mask.push_back(vis);
    out.center.emplace_back(center.x() / pin.width, center.y() / pin.height);
    out.scale.push_back(side / pin.width);
    out.carried.push_back(carry ? 1 : 0);
    prev_center = center;
    prev_side = side;
  }
  return out;
}

}  // namespace whamkit::synth
