#pragma once

#include "whamkit/body/skeleton.h"
#include "whamkit/synth/camera.h"

#include <array>
#include <cstdint>
#include <vector>

namespace whamkit::synth {

using Keypoints2D = Eigen::Matrix<double, body::kNumKeypoints2D, 2, Eigen::RowMajor>;
using VisibilityMask = std::array<std::uint8_t, body::kNumKeypoints2D>;

// Bounding-box-normalized 2D keypoints. For a frame with box center c (px)
// and side s (px): kp = (pixel - c) / (s / 2). The box is stored normalized
// by image size: center = (c_x / w, c_y / h), scale = s / w.
struct KeypointSequence2D {
  double image_width = 0.0;
  double image_height = 0.0;
  std::vector<Keypoints2D> keypoints;
  std::vector<VisibilityMask> mask;
  std::vector<Vec2> center;
  std::vector<double> scale;
  std::vector<std::uint8_t> carried;  // box copied from the previous frame

  int length() const { return static_cast<int>(keypoints.size()); }
  void validate() const;

  Vec2 to_pixels(int t, int joint) const;
  Vec2 center_pixels(int t) const;
  double scale_pixels(int t) const;
};

struct SynthConfig {
  int sequence_length = 81;
  double fps = 30.0;
  double pixel_noise = 2.0;   // std of isotropic Gaussian noise, px
  double mask_prob = 0.15;
  double bbox_margin = 1.2;   // box side = margin * max side of the tight box
  double speed_min = 0.5;
  double speed_max = 1.5;
  double bone_scale_std = 0.1;  // log-normal bone scale noise
  int feature_dim = 32;
  double feature_noise = 0.02;  // about a quarter of the per-dim pose signal std
  double focal = 1000.0;
  double image_width = 1000.0;
  double image_height = 1000.0;
  std::array<double, 4> gait_mix = {0.4, 0.25, 0.2, 0.15};  // walk, turn, stairs, stand
  CameraConfig camera;

  void validate() const;
  geom::Pinhole pinhole() const;
};

// Projects the first 17 landmarks, adds pixel noise, masks each keypoint
// independently and normalizes by a margin-padded box around the visible
// keypoints. Landmarks behind the camera are masked. A frame with fewer than
// two visible keypoints reuses the previous box (the full image on frame 0);
// visible keypoints that fall outside that box are masked too.
KeypointSequence2D synth_keypoints(const body::MotionSequence& seq, const CameraTrajectory& cams,
                                   const SynthConfig& cfg, std::uint64_t seed);

}  // namespace whamkit::synth
