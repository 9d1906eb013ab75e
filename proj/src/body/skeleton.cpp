#include "whamkit/body/skeleton.h"

#include <array>

namespace whamkit::body {

namespace {

struct BoneSpec {
  int parent;
  Vec3 offset;
};

// Indexed by child landmark.
const std::array<BoneSpec, kNumBones>& bone_specs() {
  static const std::array<BoneSpec, kNumBones> specs = {{
      {-1, {0.0, 0.66, 0.09}},              // nose
      {kNose, {0.032, 0.035, -0.02}},       // left eye
      {kNose, {-0.032, 0.035, -0.02}},      // right eye
      {kLeftEye, {0.045, -0.01, -0.075}},   // left ear
      {kRightEye, {-0.045, -0.01, -0.075}}, // right ear
      {-1, {0.17, 0.50, 0.0}},              // left shoulder
      {-1, {-0.17, 0.50, 0.0}},             // right shoulder
      {kLeftShoulder, {0.0, -0.28, 0.0}},   // left elbow
      {kRightShoulder, {0.0, -0.28, 0.0}},  // right elbow
      {kLeftElbow, {0.0, -0.25, 0.0}},      // left wrist
      {kRightElbow, {0.0, -0.25, 0.0}},     // right wrist
      {-1, {0.09, 0.0, 0.0}},               // left hip
      {-1, {-0.09, 0.0, 0.0}},              // right hip
      {kLeftHip, {0.0, -0.44, 0.0}},        // left knee
      {kRightHip, {0.0, -0.44, 0.0}},       // right knee
      {kLeftKnee, {0.0, -0.42, 0.0}},       // left ankle
      {kRightKnee, {0.0, -0.42, 0.0}},      // right ankle
      {kLeftAnkle, {0.0, -0.07, 0.14}},     // left toe
      {kRightAnkle, {0.0, -0.07, 0.14}},    // right toe
      {kLeftAnkle, {0.0, -0.07, -0.05}},    // left heel
      {kRightAnkle, {0.0, -0.07, -0.05}},   // right heel
  }};
  return specs;
}

constexpr std::array<std::string_view, kNumLandmarks> kNames = {
    "nose",       "left_eye",    "right_eye",  "left_ear",    "right_ear",      "left_shoulder",
    "right_shoulder", "left_elbow", "right_elbow", "left_wrist", "right_wrist",  "left_hip",
    "right_hip",  "left_knee",   "right_knee", "left_ankle",  "right_ankle",    "left_toe",
    "right_toe",  "left_heel",   "right_heel"};

}  // namespace

std::string_view landmark_name(int index) { return kNames.at(static_cast<std::size_t>(index)); }

const std::array<Bone, kNumBones>& bones() {
  static const std::array<Bone, kNumBones> table = [] {
    std::array<Bone, kNumBones> b{};
    for (int i = 0; i < kNumBones; ++i) {
      const auto& s = bone_specs()[static_cast<std::size_t>(i)];
      b[static_cast<std::size_t>(i)] = {s.parent, i, s.offset.norm()};
    }
    return b;
  }();
  return table;
}

Vec3 rest_offset(int bone) { return bone_specs().at(static_cast<std::size_t>(bone)).offset; }

const Landmarks& rest_pose() {
  static const Landmarks pose = [] {
    Landmarks l;
    // parents always precede children in the table
    for (int i = 0; i < kNumLandmarks; ++i) {
      const auto& s = bone_specs()[static_cast<std::size_t>(i)];
      Vec3 base = s.parent < 0 ? Vec3::Zero() : Vec3(l.row(s.parent).transpose());
      l.row(i) = (base + s.offset).transpose();
    }
    return l;
  }();
  return pose;
}

BoneScales measure_bone_scales(const Landmarks& local) {
  BoneScales out{};
  const Vec3 root = pelvis(local);
  for (const auto& b : bones()) {
    const Vec3 parent = b.parent < 0 ? root : landmark(local, b.parent);
    out[static_cast<std::size_t>(b.child)] = (landmark(local, b.child) - parent).norm() / b.rest_length;
  }
  return out;
}

}  // namespace whamkit::body
