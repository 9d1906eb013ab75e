#pragma once

#include "whamkit/core/types.h"

namespace whamkit::geom {

struct RigidTransform {
  Rotation rotation = Rotation::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Points3 apply(const Points3& p) const;

  // (a * b).apply(p) == a.apply(b.apply(p))
  RigidTransform operator*(const RigidTransform& other) const;
  RigidTransform inverse() const;
};

enum class AlignMode { kRigid, kSimilarity };

struct Alignment {
  RigidTransform transform;
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return scale * (transform.rotation * p) + transform.translation; }
  Points3 apply(const Points3& p) const;
};

// Least-squares fit of s*R*p_i + t to q_i (Kabsch / Umeyama). Reflections
// are excluded by flipping the sign of the smallest singular direction.
//
// Degenerate inputs (coincident or collinear points) still return a proper
// rotation: the one produced by Eigen's JacobiSVD ordering, which is
// deterministic for a given input. Throws InvalidInput for empty or
// mismatched point sets.
Alignment kabsch_align(const Points3& source, const Points3& target, AlignMode mode);

// Sum of squared distances between aligned source and target.
double alignment_sse(const Alignment& a, const Points3& source, const Points3& target);

}  // namespace whamkit::geom
