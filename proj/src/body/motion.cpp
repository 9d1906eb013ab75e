#include "whamkit/body/motion.h"

#include "whamkit/core/error.h"
#include "whamkit/geom/so3.h"

#include <string>

namespace whamkit::body {

LocalPose LocalPose::from_positions(const Landmarks& positions) {
  return {positions, measure_bone_scales(positions)};
}

void MotionSequence::validate() const {
  const auto n = local.size();
  if (n < 2) throw InvalidInput("motion sequence: need at least two frames");
  if (gamma.size() != n || tau.size() != n || contact.size() != n) {
    throw InvalidInput("motion sequence: per-frame arrays have different lengths");
  }
  if (!(fps > 0.0)) throw InvalidInput("motion sequence: fps must be positive");
  for (std::size_t t = 0; t < n; ++t) {
    if (!geom::is_rotation(gamma[t], 1e-6)) {
      throw InvalidInput("motion sequence: invalid root orientation at frame " + std::to_string(t));
    }
    if (!tau[t].allFinite() || !local[t].positions.allFinite()) {
      throw InvalidInput("motion sequence: non-finite value at frame " + std::to_string(t));
    }
    for (double c : contact[t]) {
      if (!(c >= 0.0 && c <= 1.0)) {
        throw InvalidInput("motion sequence: contact outside [0,1] at frame " + std::to_string(t));
      }
    }
  }
}

Landmarks world_landmarks(const MotionSequence& seq, int t) {
  if (t < 0 || t >= seq.length()) {
    throw IndexError("world_landmarks: frame " + std::to_string(t) + " out of range [0, " +
                     std::to_string(seq.length()) + ")");
  }
  const auto& r = seq.gamma[static_cast<std::size_t>(t)];
  Landmarks out = seq.local[static_cast<std::size_t>(t)].positions * r.transpose();
  out.rowwise() += seq.tau[static_cast<std::size_t>(t)].transpose();
  return out;
}

MotionSequence slice_frames(const MotionSequence& seq, int begin, int count) {
  if (begin < 0 || count < 0 || begin + count > seq.length()) {
    throw IndexError("slice_frames: range out of bounds");
  }
  MotionSequence out;
  out.fps = seq.fps;
  const auto b = static_cast<std::ptrdiff_t>(begin);
  const auto e = b + count;
  out.local.assign(seq.local.begin() + b, seq.local.begin() + e);
  out.gamma.assign(seq.gamma.begin() + b, seq.gamma.begin() + e);
  out.tau.assign(seq.tau.begin() + b, seq.tau.begin() + e);
  out.contact.assign(seq.contact.begin() + b, seq.contact.begin() + e);
  return out;
}

MotionSequence transform_world(const MotionSequence& seq, const Rotation& rotation,
                               const Vec3& translation) {
  MotionSequence out = seq;
  for (std::size_t t = 0; t < seq.gamma.size(); ++t) {
    out.gamma[t] = rotation * seq.gamma[t];
    out.tau[t] = rotation * seq.tau[t] + translation;
  }
  return out;
}

}  // namespace whamkit::body
