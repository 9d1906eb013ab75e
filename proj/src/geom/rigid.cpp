#include "whamkit/geom/rigid.h"

#include "whamkit/core/error.h"

#include <Eigen/SVD>

namespace whamkit::geom {

Points3 RigidTransform::apply(const Points3& p) const {
  Points3 out = p * rotation.transpose();
  out.rowwise() += translation.transpose();
  return out;
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  return {rotation * other.rotation, rotation * other.translation + translation};
}

RigidTransform RigidTransform::inverse() const {
  const Rotation rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

Points3 Alignment::apply(const Points3& p) const {
  Points3 out = scale * (p * transform.rotation.transpose());
  out.rowwise() += transform.translation.transpose();
  return out;
}

Alignment kabsch_align(const Points3& source, const Points3& target, AlignMode mode) {
  if (source.rows() < 1) throw InvalidInput("kabsch_align: need at least one point");
  if (source.rows() != target.rows()) {
    throw InvalidInput("kabsch_align: source and target sizes differ");
  }
  const double n = static_cast<double>(source.rows());
  const Vec3 mu_s = source.colwise().sum().transpose() / n;
  const Vec3 mu_t = target.colwise().sum().transpose() / n;
  const Points3 ps = source.rowwise() - mu_s.transpose();
  const Points3 pt = target.rowwise() - mu_t.transpose();

  // Cross-covariance H = sum (q_i - mu_t)(p_i - mu_s)^T, so R = U D V^T.
  const Mat3 h = pt.transpose() * ps;
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 d = Vec3::Ones();
  if ((u * v.transpose()).determinant() < 0.0) d.z() = -1.0;

  Alignment out;
  out.transform.rotation = u * d.asDiagonal() * v.transpose();
  if (mode == AlignMode::kSimilarity) {
    const double var_s = ps.squaredNorm();
    out.scale = var_s > 0.0 ? svd.singularValues().dot(d) / var_s : 1.0;
  }
  out.transform.translation = mu_t - out.scale * (out.transform.rotation * mu_s);
  return out;
}

double alignment_sse(const Alignment& a, const Points3& source, const Points3& target) {
  return (a.apply(source) - target).squaredNorm();
}

}  // namespace whamkit::geom
