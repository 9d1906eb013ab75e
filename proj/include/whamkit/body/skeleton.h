#pragma once

#include "whamkit/core/types.h"

#include <array>
#include <string_view>

namespace whamkit::body {

inline constexpr int kNumLandmarks = 21;
inline constexpr int kNumKeypoints2D = 17;  // COCO subset, indices 0..16
inline constexpr int kNumContacts = 4;
inline constexpr int kNumBones = 21;
inline constexpr std::string_view kSkeletonVersion = "wk21-v1";

// Landmark indices. 0..16 follow COCO ordering; 17..20 are contact points.
enum Landmark : int {
  kNose = 0,
  kLeftEye,
  kRightEye,
  kLeftEar,
  kRightEar,
  kLeftShoulder,
  kRightShoulder,
  kLeftElbow,
  kRightElbow,
  kLeftWrist,
  kRightWrist,
  kLeftHip,
  kRightHip,
  kLeftKnee,
  kRightKnee,
  kLeftAnkle,
  kRightAnkle,
  kLeftToe,
  kRightToe,
  kLeftHeel,
  kRightHeel,
};

// Order of the four contact channels (p, p*).
inline constexpr std::array<int, kNumContacts> kContactLandmarks = {kLeftToe, kRightToe, kLeftHeel,
                                                                    kRightHeel};

// Parent index -1 denotes the virtual pelvis root (midpoint of the hips).
struct Bone {
  int parent;
  int child;
  double rest_length;  // meters
};

using Landmarks = Eigen::Matrix<double, kNumLandmarks, 3, Eigen::RowMajor>;
using BoneScales = std::array<double, kNumBones>;

std::string_view landmark_name(int index);

// Bone table; bone i has child landmark i, so every landmark has exactly one
// incoming bone and the graph is a tree rooted at the pelvis.
const std::array<Bone, kNumBones>& bones();

// Rest pose in the root frame (+x left, +y up, +z forward), pelvis at origin.
const Landmarks& rest_pose();

// Rest-pose offset of a bone's child from its parent.
Vec3 rest_offset(int bone);

inline Vec3 landmark(const Landmarks& l, int i) { return l.row(i).transpose(); }

// Pelvis = midpoint of the two hip landmarks.
inline Vec3 pelvis(const Landmarks& l) { return 0.5 * (landmark(l, kLeftHip) + landmark(l, kRightHip)); }

// Measured bone length / rest length for every bone.
BoneScales measure_bone_scales(const Landmarks& local);

}  // namespace whamkit::body
