#pragma once

#include "whamkit/core/types.h"

// Coordinate conventions shared by every module.
//
// World: right-handed, +y up, gravity along -y, ground plane is x-z.
// Root (body) frame: +x left, +y up, +z forward; heading is the yaw of +z.
// Camera: +x right, +y down, +z along the optical axis. Extrinsics map world
// to camera: x_cam = R * x_world + T.
namespace whamkit::geom {

inline const Vec3 kWorldUp{0.0, 1.0, 0.0};
inline const Vec3 kGravity{0.0, -9.81, 0.0};
inline const Vec3 kBodyForward{0.0, 0.0, 1.0};
inline const Vec3 kCameraForward{0.0, 0.0, 1.0};

// Camera looking along world +z with image-up equal to world-up.
inline Rotation level_camera() {
  Rotation r;
  r << -1, 0, 0,  //
      0, -1, 0,   //
      0, 0, 1;
  return r;
}

}  // namespace whamkit::geom
