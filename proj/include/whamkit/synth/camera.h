#pragma once

#include "whamkit/body/motion.h"
#include "whamkit/geom/camera.h"

#include <cstdint>
#include <vector>

namespace whamkit::synth {

// Pinhole intrinsics plus per-frame world-to-camera extrinsics. omega is
// derived from the rotations with geom::angular_velocity.
struct CameraTrajectory {
  double fps = 30.0;
  geom::Pinhole intrinsics;
  std::vector<Rotation> rotation;
  std::vector<Vec3> translation;
  std::vector<Vec3> omega;

  static CameraTrajectory from_extrinsics(double fps, const geom::Pinhole& intrinsics,
                                          std::vector<Rotation> rotation,
                                          std::vector<Vec3> translation);

  int length() const { return static_cast<int>(rotation.size()); }
  void validate() const;

  // World landmarks of one frame expressed in this camera's frame.
  Points3 to_camera(const body::Landmarks& world, int t) const;
  Vec3 to_camera(const Vec3& world, int t) const;
};

// Distribution parameters for the virtual camera. Angles in degrees,
// distances in meters. A zero standard deviation (or equal depth bounds)
// makes the corresponding draw deterministic.
struct CameraConfig {
  double roll_mean = 0.0;
  double roll_std = 5.0;
  double pitch_mean = 5.0;  // positive tilts the optical axis toward the ground
  double pitch_std = 22.5;
  double depth_min = 2.0;
  double depth_max = 12.0;
  double lateral_std = 0.25;  // multiples of d = w * T_z / (2 f)
  double end_yaw_std = 45.0;
  double end_roll_std = 22.5;
  double end_pitch_std = 22.5;
  double end_translation_std = 1.0;
  double timestamp_noise = 0.2;  // relative jitter on the interpolation steps
  double min_landmark_depth = 0.5;
  int max_attempts = 100;

  // Every width zero and the pitch mean zero: a level camera at the middle
  // depth looking straight at the subject.
  static CameraConfig fixed();
  void validate() const;
};

// Half-width of the field of view at depth `depth`, in meters.
double max_displacement(const geom::Pinhole& pinhole, double depth);

// Rotation of a level camera after applying roll and pitch (radians) about
// its own axes.
Rotation tilted_camera(double roll, double pitch);

// Samples initial and final extrinsics, interpolates them at jittered
// timestamps (slerp for rotation, linear for translation) and keeps the
// first draw whose frame-0 root projects inside the image and whose
// landmarks stay at least min_landmark_depth in front of the camera on every
// frame. Throws NumericError after max_attempts rejected draws.
CameraTrajectory synth_camera(const body::MotionSequence& seq, const geom::Pinhole& pinhole,
                              std::uint64_t seed, const CameraConfig& cfg = {});

// Rotates the whole sequence about the vertical axis through the world
// origin.
body::MotionSequence apply_root_yaw(const body::MotionSequence& seq, double yaw);

}  // namespace whamkit::synth
