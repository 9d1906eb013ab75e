#include "whamkit/body/gait.h"
#include "whamkit/body/io.h"
#include "whamkit/core/error.h"
#include "whamkit/geom/conventions.h"
#include "whamkit/geom/so3.h"
#include "whamkit/synth/camera.h"
#include "whamkit/synth/dataset.h"
#include "whamkit/synth/features.h"
#include "whamkit/synth/keypoints.h"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace whamkit;
using namespace whamkit::synth;
namespace fs = std::filesystem;

namespace {

constexpr double kRad2Deg = 180.0 / std::numbers::pi;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("whamkit_test_" + name);
  fs::remove_all(p);
  return p;
}

// Pitch of the initial camera recovered from its rotation: R * level^T is
// rot_z(roll) * rot_x(pitch), whose last row is (0, sin pitch, cos pitch).
double initial_pitch(const Rotation& r) {
  const Rotation m = r * geom::level_camera().transpose();
  return std::atan2(m(2, 1), m(2, 2));
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  return (da * db).sum() / std::sqrt((da * da).sum() * (db * db).sum());
}

}  // namespace

TEST_CASE("fixed camera config is static, centered and at the middle depth") {
  const auto seq = body::generate_gait(body::GaitKind::kWalk, 30, 30, 1);
  const auto pin = geom::Pinhole::centered(1000, 1000, 1000);
  const CameraTrajectory cam = synth_camera(seq, pin, 3, CameraConfig::fixed());
  const Vec3 root = cam.to_camera(seq.tau[0], 0);
  CHECK((root - Vec3(0, 0, 7)).norm() < 1e-12);
  CHECK((geom::project(pin, root) - Vec2(500, 500)).norm() < 1e-9);
  for (int t = 0; t < cam.length(); ++t) {
    CHECK(cam.omega[static_cast<std::size_t>(t)].norm() == 0.0);
    CHECK(cam.rotation[static_cast<std::size_t>(t)] == cam.rotation[0]);
    CHECK(cam.translation[static_cast<std::size_t>(t)] == cam.translation[0]);
  }
  CHECK((cam.rotation[0] - geom::level_camera()).norm() == 0.0);
}

TEST_CASE("maximum displacement formula") {
  CHECK(max_displacement(geom::Pinhole::centered(500, 1000, 1000), 5.0) == 5.0);
}

TEST_CASE("positive pitch tilts the optical axis toward the ground") {
  const Rotation r = tilted_camera(0.0, 0.3);
  const Vec3 axis_world = r.transpose() * geom::kCameraForward;
  CHECK(axis_world.y() < 0.0);
  CHECK(std::abs(std::asin(-axis_world.y()) - 0.3) < 1e-12);
}

TEST_CASE("initial pitch statistics and frame-0 visibility") {
  const auto seq = body::generate_gait(body::GaitKind::kStand, 2, 30, 1);
  const auto pin = geom::Pinhole::centered(1000, 1000, 1000);
  const int n = 10000;
  double sum = 0.0, sum2 = 0.0;
  int outside = 0;
  for (int i = 0; i < n; ++i) {
    const CameraTrajectory cam = synth_camera(seq, pin, static_cast<std::uint64_t>(i));
    const double p = initial_pitch(cam.rotation[0]) * kRad2Deg;
    sum += p;
    sum2 += p * p;
    const Vec2 px = geom::project(pin, cam.to_camera(seq.tau[0], 0));
    outside += px.x() < 0 || px.x() > pin.width || px.y() < 0 || px.y() > pin.height;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  CHECK(std::abs(mean - 5.0) < 0.7);
  CHECK(std::abs(sd - 22.5) < 1.0);
  CHECK(outside == 0);
}

TEST_CASE("camera trajectory is deterministic and consistent") {
  const auto seq = body::generate_gait(body::GaitKind::kWalk, 81, 30, 2);
  const auto pin = geom::Pinhole::centered(1000, 1000, 1000);
  const CameraTrajectory a = synth_camera(seq, pin, 99);
  const CameraTrajectory b = synth_camera(seq, pin, 99);
  CHECK(a.rotation == b.rotation);
  CHECK(a.translation == b.translation);
  const auto omega = geom::angular_velocity(a.rotation);
  for (std::size_t t = 0; t < omega.size(); ++t) CHECK((omega[t] - a.omega[t]).norm() < 1e-9);
  for (int t = 0; t < a.length(); ++t) {
    CHECK(a.to_camera(body::world_landmarks(seq, t), t).col(2).minCoeff() >= 0.5);
  }
}

TEST_CASE("unreachable camera constraints raise") {
  const auto seq = body::generate_gait(body::GaitKind::kStand, 5, 30, 1);
  CameraConfig cfg = CameraConfig::fixed();
  cfg.depth_min = cfg.depth_max = 0.2;  // every landmark closer than min_landmark_depth
  cfg.max_attempts = 5;
  CHECK_THROWS_AS(synth_camera(seq, geom::Pinhole::centered(500, 1000, 1000), 1, cfg), NumericError);
}

TEST_CASE("clean keypoints invert back to projections") {
  const auto seq = body::generate_gait(body::GaitKind::kWalk, 40, 30, 5);
  SynthConfig cfg;
  cfg.pixel_noise = 0.0;
  cfg.mask_prob = 0.0;
  const auto pin = cfg.pinhole();
  const CameraTrajectory cam = synth_camera(seq, pin, 1, CameraConfig::fixed());
  const KeypointSequence2D kp = synth_keypoints(seq, cam, cfg, 7);
  kp.validate();
  for (int t = 0; t < kp.length(); ++t) {
    const Points2 px = geom::project(pin, cam.to_camera(body::world_landmarks(seq, t), t), t);
    for (int j = 0; j < body::kNumKeypoints2D; ++j) {
      CHECK(kp.mask[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] == 1);
      CHECK((kp.to_pixels(t, j) - px.row(j).transpose()).norm() < 1e-9);
      CHECK(kp.keypoints[static_cast<std::size_t>(t)].row(j).cwiseAbs().maxCoeff() <= 1.0 / 1.2 + 1e-12);
    }
    CHECK(kp.carried[static_cast<std::size_t>(t)] == 0);
  }
}

TEST_CASE("mask probability one hides everything") {
  const auto seq = body::generate_gait(body::GaitKind::kWalk, 10, 30, 5);
  SynthConfig cfg;
  cfg.mask_prob = 1.0;
  const CameraTrajectory cam = synth_camera(seq, cfg.pinhole(), 1);
  const KeypointSequence2D kp = synth_keypoints(seq, cam, cfg, 7);
  for (int t = 0; t < kp.length(); ++t) {
    const auto i = static_cast<std::size_t>(t);
    CHECK(kp.keypoints[i].norm() == 0.0);
    for (auto m : kp.mask[i]) CHECK(m == 0);
    CHECK(kp.carried[i] == 1);
  }
  // Frame 0 has no previous box and falls back to the whole image.
  CHECK((kp.center_pixels(0) - Vec2(500, 500)).norm() == 0.0);
  CHECK(kp.scale_pixels(0) == 1000.0);
}

TEST_CASE("mask rate matches the configured probability") {
  const auto seq = body::generate_gait(body::GaitKind::kWalk, 600, 30, 8);
  SynthConfig cfg;
  const CameraTrajectory cam = synth_camera(seq, cfg.pinhole(), 2);
  const KeypointSequence2D kp = synth_keypoints(seq, cam, cfg, 3);
  long masked = 0, total = 0;
  for (const auto& m : kp.mask) {
    for (auto v : m) {
      masked += v == 0;
      ++total;
    }
  }
  REQUIRE(total >= 10000);
  const double rate = static_cast<double>(masked) / static_cast<double>(total);
  CHECK(std::abs(rate - 0.15) < 0.01);
  kp.validate();
}

TEST_CASE("proxy features") {
  const auto seq = body::generate_gait(body::GaitKind::kWalk, 1000, 30, 4);
  const FeatureEncoder enc(16, 5);
  const FeatureEncoder same(16, 5);
  CHECK(enc.matrix() == same.matrix());

  const FeatureRows clean = enc.encode(seq, 0.0, 1);
  for (int t = 0; t < 5; ++t) {
    CHECK((clean.row(t).transpose() - enc.matrix() * Eigen::Map<const Eigen::VectorXd>(
                                                          seq.local[static_cast<std::size_t>(t)].positions.data(), 63))
              .norm() == 0.0);
  }
  body::LocalPose pose = seq.local[3];
  CHECK(enc.encode(pose) == enc.encode(seq.local[3]));

  const FeatureRows noisy = enc.encode(seq, 1e3, 1);
  const double informative = pearson(enc.encode(seq, 0.1, 1).col(0), clean.col(0));
  const double drowned = pearson(noisy.col(0), clean.col(0));
  CHECK(informative > 0.5);
  CHECK(std::abs(drowned) < 0.1);

  const FeatureRows a = synth_visual_features(seq, 8, 0.1, 3);
  const FeatureRows b = synth_visual_features(seq, 8, 0.1, 3);
  CHECK(a == b);
}

TEST_CASE("camera and keypoint files round trip") {
  const auto seq = body::generate_gait(body::GaitKind::kTurn, 20, 30, 1);
  SynthConfig cfg;
  const CameraTrajectory cam = synth_camera(seq, cfg.pinhole(), 4);
  const KeypointSequence2D kp = synth_keypoints(seq, cam, cfg, 4);
  std::stringstream cs, ks;
  write_camera(cs, cam);
  write_keypoints(ks, kp);
  const CameraTrajectory cam2 = read_camera(cs);
  const KeypointSequence2D kp2 = read_keypoints(ks);
  CHECK(cam2.rotation == cam.rotation);
  CHECK(cam2.translation == cam.translation);
  CHECK(cam2.intrinsics.focal == cam.intrinsics.focal);
  CHECK(kp2.keypoints == kp.keypoints);
  CHECK(kp2.mask == kp.mask);
  CHECK(kp2.scale == kp.scale);
  CHECK(kp2.center == kp.center);
}

TEST_CASE("dataset generation is deterministic and self-consistent") {
  SynthConfig cfg;
  cfg.sequence_length = 30;
  const fs::path a = temp_dir("ds_a"), b = temp_dir("ds_b");
  const Manifest ma = write_dataset(a, cfg, 6, 7);
  write_dataset(b, cfg, 6, 7);
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
  const Manifest back = read_manifest(a);
  CHECK(back.count == 6);
  CHECK(back.config_hash == ma.config_hash);
  CHECK(back.train.size() + back.val.size() + back.test.size() == 6);
  const SynthConfig cfg2 = config_from_json(back.config);
  CHECK(config_to_json(cfg2) == back.config);
  for (int k = 0; k < 6; ++k) {
    const Sample s = load_sample(a, k, back);
    CHECK(s.motion.length() == 30);
    CHECK(s.features.cols() == cfg.feature_dim);
    s.keypoints.validate();
  }

  const fs::path empty = temp_dir("ds_empty");
  const Manifest me = write_dataset(empty, cfg, 0, 7);
  CHECK(me.count == 0);
  CHECK(read_manifest(empty).train.empty());
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(empty);
}

TEST_CASE("split fractions") {
  Manifest m;
  m.count = 200;
  m.seed = 3;
  assign_splits(m);
  CHECK(m.train.size() == 140);
  CHECK(m.val.size() == 30);
  CHECK(m.test.size() == 30);
  CHECK_THROWS_AS(m.split("holdout"), InvalidInput);
}

TEST_CASE("tampered manifest is rejected") {
  SynthConfig cfg;
  Manifest m;
  m.config = config_to_json(cfg);
  m.config_hash = config_hash(m.config);
  Json j = m.to_json();
  j["config"]["mask_prob"] = 0.5;
  CHECK_THROWS_AS(Manifest::from_json(j), FormatError);
}
