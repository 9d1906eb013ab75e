#include "whamkit/body/contact.h"
#include "whamkit/body/gait.h"
#include "whamkit/body/io.h"
#include "whamkit/body/motion.h"
#include "whamkit/body/resample.h"
#include "whamkit/body/skeleton.h"
#include "whamkit/core/error.h"
#include "whamkit/geom/so3.h"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

using namespace whamkit;
using namespace whamkit::body;

namespace {

bool foot_of(int contact_channel, bool left) {
  const int lm = kContactLandmarks[static_cast<std::size_t>(contact_channel)];
  return left == (lm == kLeftToe || lm == kLeftHeel);
}

double mean_root_speed(const MotionSequence& s) {
  double total = 0.0;
  for (int t = 1; t < s.length(); ++t) {
    total += (s.tau[static_cast<std::size_t>(t)] - s.tau[static_cast<std::size_t>(t - 1)]).norm();
  }
  return total / (s.length() - 1);
}

}  // namespace

TEST_CASE("skeleton is a tree with positive rest lengths") {
  std::set<int> children;
  for (int i = 0; i < kNumBones; ++i) {
    const Bone& b = bones()[static_cast<std::size_t>(i)];
    CHECK(b.child == i);
    CHECK(b.rest_length > 0.0);
    CHECK(b.parent < b.child);  // parents come first, so no cycles
    children.insert(b.child);
  }
  CHECK(children.size() == static_cast<std::size_t>(kNumLandmarks));
  CHECK(pelvis(rest_pose()).norm() < 1e-12);
  for (double s : measure_bone_scales(rest_pose())) CHECK(std::abs(s - 1.0) < 1e-12);
  CHECK(landmark_name(kLeftHeel) == "left_heel");
}

TEST_CASE("world_landmarks examples") {
  MotionSequence s;
  s.local.assign(2, LocalPose::from_positions(rest_pose()));
  s.gamma.assign(2, Rotation::Identity());
  s.tau.assign(2, Vec3::Zero());
  s.contact.assign(2, Contact{});
  CHECK((world_landmarks(s, 0) - rest_pose()).norm() == 0.0);

  s.tau[1] = Vec3(0, 0, 5);
  const Landmarks shifted = world_landmarks(s, 1);
  for (int i = 0; i < kNumLandmarks; ++i) {
    CHECK((shifted.row(i) - rest_pose().row(i) - Eigen::RowVector3d(0, 0, 5)).norm() == 0.0);
  }

  // Rotation of 90 degrees that maps root +x to world +y.
  Landmarks x_axis = Landmarks::Zero();
  x_axis.row(0) << 1, 0, 0;
  s.local[0].positions = x_axis;
  s.gamma[0] = geom::rot_z(std::numbers::pi / 2);
  CHECK((world_landmarks(s, 0).row(0) - Eigen::RowVector3d(0, 1, 0)).norm() < 1e-9);

  CHECK_THROWS_AS(world_landmarks(s, 2), IndexError);
  CHECK_THROWS_AS(world_landmarks(s, -1), IndexError);
}

TEST_CASE("stand is static with full contact") {
  const MotionSequence s = generate_gait(GaitKind::kStand, 60, 30, 4);
  for (int t = 1; t < s.length(); ++t) {
    const auto i = static_cast<std::size_t>(t);
    CHECK(s.tau[i] == s.tau[0]);
    const Landmarks d = world_landmarks(s, t) - world_landmarks(s, t - 1);
    CHECK(d.rowwise().norm().maxCoeff() < 1e-6);
  }
  for (const Contact& c : s.contact) {
    for (double v : c) CHECK(v == 1.0);
  }
}

TEST_CASE("walk covers ground with locked stance feet") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const MotionSequence s = generate_gait(GaitKind::kWalk, 81, 30, seed);
    CHECK((s.tau[80] - s.tau[0]).norm() > 0.5);
  }
}

TEST_CASE("contact truth implies a quasi-static foot for every gait") {
  for (GaitKind kind : {GaitKind::kWalk, GaitKind::kTurn, GaitKind::kStairs, GaitKind::kStand}) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const MotionSequence s = generate_gait(kind, 120, 30, seed);
      int contact_frames = 0;
      for (int t = 1; t < s.length(); ++t) {
        const Landmarks now = world_landmarks(s, t);
        const Landmarks prev = world_landmarks(s, t - 1);
        for (int c = 0; c < kNumContacts; ++c) {
          if (s.contact[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] < 1.0) continue;
          ++contact_frames;
          const int lm = kContactLandmarks[static_cast<std::size_t>(c)];
          CHECK((now.row(lm) - prev.row(lm)).norm() < 0.002);
        }
      }
      CHECK(contact_frames > 0);
    }
  }
}

TEST_CASE("gait alternates feet and keeps bone lengths") {
  GaitConfig cfg;
  for (std::size_t b = 0; b < cfg.bone_scale.size(); ++b) cfg.bone_scale[b] = 0.9 + 0.01 * static_cast<double>(b);
  cfg.bone_scale[kLeftHip] = cfg.bone_scale[kRightHip] = 1.05;
  const MotionSequence s = generate_gait(GaitKind::kWalk, 90, 30, 9, cfg);
  bool left_only = false, right_only = false;
  for (int t = 0; t < s.length(); ++t) {
    const auto& c = s.contact[static_cast<std::size_t>(t)];
    bool l = false, r = false;
    for (int k = 0; k < kNumContacts; ++k) {
      if (c[static_cast<std::size_t>(k)] == 1.0) (foot_of(k, true) ? l : r) = true;
    }
    left_only |= l && !r;
    right_only |= r && !l;
    const BoneScales scales = measure_bone_scales(s.local[static_cast<std::size_t>(t)].positions);
    for (int b = 0; b < kNumBones; ++b) {
      CHECK(std::abs(scales[static_cast<std::size_t>(b)] - cfg.bone_scale[static_cast<std::size_t>(b)]) < 1e-6);
    }
    CHECK(pelvis(s.local[static_cast<std::size_t>(t)].positions).norm() < 1e-9);
  }
  CHECK(left_only);
  CHECK(right_only);
}

TEST_CASE("stairs climb monotonically") {
  const MotionSequence s = generate_gait(GaitKind::kStairs, 120, 30, 3);
  for (int t = 1; t < s.length(); ++t) {
    CHECK(s.tau[static_cast<std::size_t>(t)].y() >= s.tau[static_cast<std::size_t>(t - 1)].y() - 1e-12);
  }
  CHECK(s.tau.back().y() - s.tau.front().y() > 0.3);
}

TEST_CASE("turn changes heading") {
  const MotionSequence s = generate_gait(GaitKind::kTurn, 120, 30, 3);
  const double d = std::remainder(geom::heading_yaw(s.gamma.back()) - geom::heading_yaw(s.gamma.front()),
                                  2 * std::numbers::pi);
  CHECK(std::abs(d) > 0.5);
}

TEST_CASE("gait is deterministic per seed") {
  const MotionSequence a = generate_gait(GaitKind::kWalk, 81, 30, 42);
  const MotionSequence b = generate_gait(GaitKind::kWalk, 81, 30, 42);
  const MotionSequence c = generate_gait(GaitKind::kWalk, 81, 30, 43);
  std::ostringstream sa, sb, sc;
  write_motion(sa, a);
  write_motion(sb, b);
  write_motion(sc, c);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str() != sc.str());
  CHECK_THROWS_AS(generate_gait(GaitKind::kWalk, 1, 30, 0), InvalidInput);
  CHECK_THROWS_AS(generate_gait(GaitKind::kWalk, 10, 0, 0), InvalidInput);
  CHECK(parse_gait(gait_name(GaitKind::kStairs)) == GaitKind::kStairs);
  CHECK_THROWS_AS(parse_gait("jog"), InvalidInput);
}

TEST_CASE("contact probability closed form") {
  CHECK(contact_probability(0.01) == 0.5);
  CHECK(std::abs(contact_probability(0.0) - 1.0 / (1.0 + std::exp(-5.0))) < 1e-15);
  CHECK(std::abs(contact_probability(0.0) - 0.993307) < 1e-6);
  CHECK(std::abs(contact_probability(0.02) - 0.006693) < 1e-6);
  double prev = 2.0;
  for (int i = 0; i < 1000; ++i) {
    const double p = contact_probability(i * 0.05 / 999.0);
    CHECK(p < prev);
    CHECK(p > 0.0);
    prev = p;
  }
}

TEST_CASE("generated labels agree with the generator schedule") {
  const MotionSequence s = generate_gait(GaitKind::kWalk, 90, 30, 1);
  const auto labels = generate_contact_labels(s);
  const auto speeds = contact_speeds(s);
  REQUIRE(labels.size() == s.contact.size());
  CHECK(speeds[0] == speeds[1]);
  int agree = 0, total = 0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    for (std::size_t c = 0; c < labels[t].size(); ++c) {
      CHECK(labels[t][c] == contact_probability(speeds[t][c]));
      agree += (labels[t][c] > 0.5) == (s.contact[t][c] > 0.5);
      ++total;
    }
  }
  CHECK(static_cast<double>(agree) / total > 0.8);
}

TEST_CASE("resample_speed") {
  const MotionSequence walk = generate_gait(GaitKind::kWalk, 90, 30, 2);
  const MotionSequence same = resample_speed(walk, 1.0);
  REQUIRE(same.length() == walk.length());
  for (int t = 0; t < walk.length(); ++t) CHECK(world_landmarks(same, t) == world_landmarks(walk, t));

  const MotionSequence slow = resample_speed(walk, 0.5);
  CHECK(slow.length() == 180);
  CHECK(std::abs(mean_root_speed(slow) / mean_root_speed(walk) - 0.5) < 0.02 * 0.5);

  const MotionSequence fast = resample_speed(walk, 1.5);
  CHECK(fast.length() == static_cast<int>(std::lround(90 / 1.5)));
  for (const Rotation& g : fast.gamma) CHECK(geom::is_rotation(g));

  CHECK_THROWS_AS(resample_speed(walk, 0.4), InvalidInput);
  CHECK_THROWS_AS(resample_speed(walk, 1.6), InvalidInput);
}

TEST_CASE("motion NDJSON round trip") {
  const MotionSequence s = generate_gait(GaitKind::kTurn, 20, 25, 6);
  std::stringstream ss;
  write_motion(ss, s);
  const MotionSequence r = read_motion(ss);
  CHECK(r.fps == s.fps);
  REQUIRE(r.length() == s.length());
  for (int t = 0; t < s.length(); ++t) {
    const auto i = static_cast<std::size_t>(t);
    CHECK(r.gamma[i] == s.gamma[i]);
    CHECK(r.tau[i] == s.tau[i]);
    CHECK(r.local[i].positions == s.local[i].positions);
    CHECK(r.contact[i] == s.contact[i]);
  }
  std::stringstream bad("{\"fps\":30,\"skeleton_version\":\"other\"}\n");
  CHECK_THROWS_AS(read_motion(bad), FormatError);
  std::stringstream broken("{\"fps\":30,\"skeleton_version\":\"wk21-v1\"}\n{oops\n");
  CHECK_THROWS_AS(read_motion(broken), FormatError);
}

TEST_CASE("validate rejects malformed sequences") {
  MotionSequence s = generate_gait(GaitKind::kWalk, 10, 30, 1);
  s.contact[3][0] = 1.5;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  s = generate_gait(GaitKind::kWalk, 10, 30, 1);
  s.tau.pop_back();
  CHECK_THROWS_AS(s.validate(), InvalidInput);
}
