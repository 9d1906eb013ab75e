#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <vector>

namespace whamkit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// A 3x3 proper rotation. Kept as a plain Eigen matrix so it composes with the
// rest of the Eigen expression machinery; validity is checked by is_rotation().
using Rotation = Eigen::Matrix3d;

// N x 3 point set, one point per row.
using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

}  // namespace whamkit
