#pragma once

#include "whamkit/core/types.h"

#include <span>
#include <vector>

namespace whamkit::geom {

struct Pinhole {
  double focal = 500.0;  // pixels
  double width = 1000.0;
  double height = 1000.0;
  double cx = 500.0;
  double cy = 500.0;

  // Principal point defaults to the image center.
  static Pinhole centered(double focal, double width, double height);
  void validate() const;
};

// Points closer than this along the optical axis are treated as behind the
// camera.
inline constexpr double kMinDepth = 1e-6;

Vec2 project(const Pinhole& cam, const Vec3& p);

// Projects N camera-frame points. Throws BehindCamera naming `frame` and the
// offending landmark index when any z <= kMinDepth.
Points2 project(const Pinhole& cam, const Points3& cam_points, int frame = 0);

// Per-frame camera angular velocity (radians/frame) expressed in the camera
// frame of t-1. Input rotations are world-to-camera extrinsics R^(t); the
// camera orientation is Q = R^T and omega^(t) = log(Q^(t-1)^T Q^(t)).
// omega^(0) copies omega^(1). Throws InvalidInput for fewer than two frames.
std::vector<Vec3> angular_velocity(std::span<const Rotation> extrinsic_rotations);

}  // namespace whamkit::geom
