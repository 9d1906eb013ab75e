#include "whamkit/geom/camera.h"

#include "whamkit/core/error.h"
#include "whamkit/geom/so3.h"

#include <string>

namespace whamkit::geom {

Pinhole Pinhole::centered(double focal, double width, double height) {
  Pinhole p{focal, width, height, width / 2.0, height / 2.0};
  p.validate();
  return p;
}

void Pinhole::validate() const {
  if (!(focal > 0.0)) throw InvalidInput("pinhole: focal length must be positive");
  if (!(width > 0.0) || !(height > 0.0)) throw InvalidInput("pinhole: image size must be positive");
}

Vec2 project(const Pinhole& cam, const Vec3& p) {
  if (!(p.z() > kMinDepth)) {
    throw BehindCamera("project: point behind camera", 0, 0);
  }
  return {cam.focal * p.x() / p.z() + cam.cx, cam.focal * p.y() / p.z() + cam.cy};
}

Points2 project(const Pinhole& cam, const Points3& pts, int frame) {
  Points2 out(pts.rows(), 2);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const double z = pts(i, 2);
    if (!(z > kMinDepth)) {
      throw BehindCamera("project: landmark " + std::to_string(i) + " of frame " +
                             std::to_string(frame) + " is behind the camera",
                         frame, static_cast<int>(i));
    }
    out(i, 0) = cam.focal * pts(i, 0) / z + cam.cx;
    out(i, 1) = cam.focal * pts(i, 1) / z + cam.cy;
  }
  return out;
}

std::vector<Vec3> angular_velocity(std::span<const Rotation> r) {
  if (r.size() < 2) throw InvalidInput("angular_velocity: need at least two frames");
  std::vector<Vec3> omega(r.size());
  for (std::size_t t = 1; t < r.size(); ++t) {
    omega[t] = log_so3(r[t - 1] * r[t].transpose());
  }
  omega[0] = omega[1];
  return omega;
}

}  // namespace whamkit::geom
