#pragma once

#include "whamkit/core/types.h"

#include <array>

namespace whamkit::geom {

// First two columns of a rotation matrix, column-major: (c0, c1).
using Rotation6D = std::array<double, 6>;

bool is_rotation(const Mat3& r, double tol = 1e-9);

// Rodrigues exponential of an axis-angle vector (radians).
Rotation exp_so3(const Vec3& axis_angle);

// Principal logarithm, ||result|| in [0, pi]. Uses the symmetric-part
// branch close to pi where the skew part vanishes.
Vec3 log_so3(const Rotation& r);

// Geodesic interpolation a -> b, alpha in [0, 1].
Rotation slerp(const Rotation& a, const Rotation& b, double alpha);

Rotation rot_x(double radians);
Rotation rot_y(double radians);
Rotation rot_z(double radians);

// Heading of the body forward axis (+z) projected to the ground plane,
// measured about world +y; 0 means facing world +z.
double heading_yaw(const Rotation& r);

Rotation6D to_6d(const Rotation& r);

// Gram-Schmidt on the two stored columns; the third is their cross product.
// Throws NumericError if either column degenerates.
Rotation from_6d(const Rotation6D& v);

}  // namespace whamkit::geom
