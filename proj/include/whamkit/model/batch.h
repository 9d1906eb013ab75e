#pragma once

#include "whamkit/body/motion.h"
#include "whamkit/nn/tensor.h"
#include "whamkit/synth/dataset.h"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace whamkit::model {

using nn::Tensor2;

// One sequence moved into its canonical world: the root starts at the
// origin facing +z (zero yaw of Gamma^(0)). Extrinsics are rewritten so the
// camera-frame view is unchanged.
struct SequenceData {
  std::string gait;
  body::MotionSequence motion;
  synth::CameraTrajectory camera;
  synth::KeypointSequence2D keypoints;
  synth::FeatureRows features;

  int length() const { return motion.length(); }
};

SequenceData canonicalize(const synth::Sample& sample);

// Network input of one frame (kInputDim values). Masked keypoints are
// zeroed; the mask bits are 1 for visible keypoints.
Eigen::RowVectorXd encode_input(const synth::KeypointSequence2D& kp, const geom::Pinhole& pinhole, int t);

// Batch-major tensors, one entry per frame, rows = sequences. Rotations are
// rows of 9 (row-major 3x3), landmark sets rows of 3N.
struct Batch {
  int size = 0;
  int frames = 0;
  double fps = 30.0;

  // inputs
  std::vector<Tensor2> input;     // B x kInputDim
  std::vector<Tensor2> features;  // B x feature_dim
  std::vector<Tensor2> omega;     // B x 3, rad/frame
  std::vector<Tensor2> box;       // B x 3: (c_x - p_x)/f, (c_y - p_y)/f, side/f
  Tensor2 init_pose;              // B x 63, truth frame-0 camera-frame pose (+ noise)

  // camera
  Tensor2 focal, principal_x, principal_y, image_width;  // B x 1

  // truth
  std::vector<Tensor2> local;        // B x 63, root frame
  std::vector<Tensor2> beta;         // B x 21, bone scales
  std::vector<Tensor2> pose_cam;     // B x 63, Gamma_c * local
  std::vector<Tensor2> contact;      // B x 4
  std::vector<Tensor2> gamma;        // B x 9
  std::vector<Tensor2> velocity;     // B x 3, root frame, m/frame
  std::vector<Tensor2> tau;          // B x 3
  std::vector<Tensor2> gamma_cam;    // B x 9
  std::vector<Tensor2> cam_rotation; // B x 9, world -> camera
  std::vector<Tensor2> keypoints_px; // B x 34
  std::vector<Tensor2> keypoint_mask;// B x 17
};

// All sequences must share length and fps. `init_noise` is the std (m) of
// the Gaussian added to the frame-0 pose handed to the neural init.
Batch make_batch(std::span<const SequenceData* const> seqs, double init_noise = 0.0,
                 std::uint64_t seed = 0);

Tensor2 rotation_row(const Rotation& r);
Rotation row_rotation(const Tensor2& rows, Eigen::Index i);
Tensor2 landmarks_row(const body::Landmarks& l);
body::Landmarks row_landmarks(const Tensor2& rows, Eigen::Index i);

}  // namespace whamkit::model
