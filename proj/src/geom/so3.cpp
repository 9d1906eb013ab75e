#include "whamkit/geom/so3.h"

#include "whamkit/core/error.h"

#include <algorithm>
#include <cmath>

namespace whamkit::geom {

namespace {

Mat3 hat(const Vec3& v) {
  Mat3 k;
  k << 0, -v.z(), v.y(),  //
      v.z(), 0, -v.x(),   //
      -v.y(), v.x(), 0;
  return k;
}

Vec3 vee_skew(const Mat3& r) {
  return Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
}

}  // namespace

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const Mat3 rtr = r.transpose() * r;
  if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

Rotation exp_so3(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  const Mat3 k = hat(w);
  if (theta2 < 1e-16) {
    // second-order Taylor expansion; exact identity at w = 0
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  const double theta = std::sqrt(theta2);
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / theta2;
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 log_so3(const Rotation& r) {
  const Vec3 s = vee_skew(r);  // 2 sin(theta) * axis
  const double sin2 = s.norm();
  const double cos2 = r.trace() - 1.0;  // 2 cos(theta)
  const double theta = std::atan2(sin2, cos2);
  if (theta < 1e-8) {
    return 0.5 * s;
  }
  if (theta < M_PI - 1e-3) {
    return (theta / sin2) * s;
  }
  // Near pi the skew part carries no usable direction; recover the axis from
  // the symmetric part aa^T = (sym(R) - cos I) / (1 - cos).
  const double c = 0.5 * cos2;
  const Mat3 sym = 0.5 * (r + r.transpose());
  const Mat3 aat = (sym - c * Mat3::Identity()) / (1.0 - c);
  int k = 0;
  aat.diagonal().maxCoeff(&k);
  Vec3 axis = aat.col(k) / std::sqrt(std::max(aat(k, k), 1e-300));
  axis.normalize();
  if (axis.dot(s) < 0.0) axis = -axis;
  return theta * axis;
}

Rotation slerp(const Rotation& a, const Rotation& b, double alpha) {
  return a * exp_so3(alpha * log_so3(a.transpose() * b));
}

Rotation rot_x(double t) {
  Rotation r;
  const double c = std::cos(t), s = std::sin(t);
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Rotation rot_y(double t) {
  Rotation r;
  const double c = std::cos(t), s = std::sin(t);
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Rotation rot_z(double t) {
  Rotation r;
  const double c = std::cos(t), s = std::sin(t);
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

double heading_yaw(const Rotation& r) {
  const Vec3 fwd = r.col(2);
  return std::atan2(fwd.x(), fwd.z());
}

Rotation6D to_6d(const Rotation& r) {
  return {r(0, 0), r(1, 0), r(2, 0), r(0, 1), r(1, 1), r(2, 1)};
}

Rotation from_6d(const Rotation6D& v) {
  const Vec3 a1(v[0], v[1], v[2]);
  const Vec3 a2(v[3], v[4], v[5]);
  const double n1 = a1.norm();
  if (!(n1 > 1e-12)) throw NumericError("from_6d: first column degenerate");
  const Vec3 b1 = a1 / n1;
  const Vec3 u = a2 - b1.dot(a2) * b1;
  const double n2 = u.norm();
  if (!(n2 > 1e-12)) throw NumericError("from_6d: columns are parallel");
  const Vec3 b2 = u / n2;
  Rotation r;
  r.col(0) = b1;
  r.col(1) = b2;
  r.col(2) = b1.cross(b2);
  return r;
}

}  // namespace whamkit::geom
