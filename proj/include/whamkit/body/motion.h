#pragma once

#include "whamkit/body/skeleton.h"
#include "whamkit/core/types.h"

#include <array>
#include <vector>

namespace whamkit::body {

using Contact = std::array<double, kNumContacts>;

// Landmarks in the root frame (pelvis at the origin) plus the per-bone
// scale factors that stand in for body shape.
struct LocalPose {
  Landmarks positions = Landmarks::Zero();
  BoneScales bone_scale{};

  static LocalPose from_positions(const Landmarks& positions);
};

struct MotionSequence {
  double fps = 30.0;
  std::vector<LocalPose> local;
  std::vector<Rotation> gamma;  // root orientation, root -> world
  std::vector<Vec3> tau;        // root translation, meters
  std::vector<Contact> contact; // ground-truth contact, [0, 1]

  int length() const { return static_cast<int>(local.size()); }

  // Throws InvalidInput when lengths disagree, T < 2, rotations are invalid,
  // values are non-finite or contacts fall outside [0, 1].
  void validate() const;
};

// x_world = gamma^(t) * x_local + tau^(t). Throws IndexError when t is out
// of range.
Landmarks world_landmarks(const MotionSequence& seq, int t);

// Frames [begin, begin + count). Throws IndexError when out of range.
MotionSequence slice_frames(const MotionSequence& seq, int begin, int count);

// Applies x -> g * x to the whole sequence (orientations and translations).
MotionSequence transform_world(const MotionSequence& seq, const Rotation& rotation,
                               const Vec3& translation);

}  // namespace whamkit::body
