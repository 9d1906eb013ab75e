#include "whamkit/body/gait.h"

#include "whamkit/core/error.h"
#include "whamkit/core/random.h"
#include "whamkit/geom/so3.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace whamkit::body {

namespace {

constexpr double kDeg = M_PI / 180.0;
constexpr double kReachMargin = 0.97;

Vec3 scaled_offset(const BoneScales& s, int bone) {
  return rest_offset(bone) * s[static_cast<std::size_t>(bone)];
}

Vec3 left_of(double yaw) { return {std::cos(yaw), 0.0, -std::sin(yaw)}; }

// Planar path through arc length s with constant curvature.
struct Path {
  double curvature = 0.0;  // rad per meter

  double heading(double s) const { return curvature * s; }
  Vec3 point(double s) const {
    if (std::abs(curvature) < 1e-12) return {0.0, 0.0, s};
    const double k = curvature;
    return {(1.0 - std::cos(k * s)) / k, 0.0, std::sin(k * s) / k};
  }
};

struct LegGeometry {
  double thigh = 0.0;
  double shin = 0.0;
  double hip_half_width = 0.0;
  double ankle_height = 0.0;
  Vec3 heel;  // foot frame
  Vec3 toe;
};

Vec3 solve_knee(const Vec3& hip, const Vec3& ankle, const Vec3& forward, double a, double b) {
  const Vec3 diff = ankle - hip;
  const double d = diff.norm();
  const Vec3 u = diff / d;
  Vec3 n = forward - forward.dot(u) * u;
  n.normalize();
  double c = (a * a + d * d - b * b) / (2.0 * a * d);
  c = std::clamp(c, -1.0, 1.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  return hip + a * (c * u + s * n);
}

struct FootState {
  Vec3 ankle;
  double yaw = 0.0;
  bool planted = false;
};

class Gait {
 public:
  Gait(GaitKind kind, double fps, std::uint64_t seed, const GaitConfig& cfg)
      : kind_(kind), fps_(fps), cfg_(cfg) {
    Rng rng(derive_seed(seed, 0x6a17));
    const double jitter = cfg.variation;
    const double step_jitter = uniform(rng, 1.0 - jitter, 1.0 + jitter);
    // stairs take exactly one tread per step
    step_ = kind == GaitKind::kStairs ? cfg.stair_tread : cfg.step_length * step_jitter;
    cadence_ = cfg.cadence * uniform(rng, 1.0 - jitter, 1.0 + jitter);
    period_ = 1.0 / cadence_;
    time0_ = uniform(rng, 0.0, 2.0 * period_);
    arm_amp_ = uniform(rng, 12.0, 25.0) * kDeg;
    if (kind == GaitKind::kTurn) {
      const double rate = uniform(rng, cfg.turn_rate_min_deg, cfg.turn_rate_max_deg) * kDeg;
      const double sign = bernoulli(rng, 0.5) ? 1.0 : -1.0;
      path_.curvature = sign * rate / (step_ * cadence_);
    }
    rise_ = kind == GaitKind::kStairs ? cfg.stair_rise : 0.0;

    const auto& s = cfg.bone_scale;
    for (int side = 0; side < 2; ++side) {
      LegGeometry& g = leg_[side];
      const int knee = side == 0 ? kLeftKnee : kRightKnee;
      const int ankle = side == 0 ? kLeftAnkle : kRightAnkle;
      const int toe = side == 0 ? kLeftToe : kRightToe;
      const int heel = side == 0 ? kLeftHeel : kRightHeel;
      g.thigh = scaled_offset(s, knee).norm();
      g.shin = scaled_offset(s, ankle).norm();
      g.hip_half_width =
          0.5 * (scaled_offset(s, kLeftHip).norm() + scaled_offset(s, kRightHip).norm());
      g.heel = scaled_offset(s, heel);
      g.toe = scaled_offset(s, toe);
      g.ankle_height = -std::min(g.heel.y(), g.toe.y());
    }
    // Pelvis height chosen so every stance configuration is reachable.
    double reach = 1e9;
    for (const auto& g : leg_) reach = std::min(reach, kReachMargin * (g.thigh + g.shin));
    const double excursion = cfg.duty * step_ + kSway;
    double leg_min_ankle = std::min(leg_[0].ankle_height, leg_[1].ankle_height);
    if (kind == GaitKind::kStand) {
      hip_above_ankle_ = reach;
    } else {
      hip_above_ankle_ =
          std::sqrt(reach * reach - excursion * excursion) - kBob - (2.0 * cfg.duty - 0.5) * rise_;
    }
    pelvis_height_ = hip_above_ankle_ + leg_min_ankle;
  }

  double time(int frame) const { return time0_ + frame / fps_; }

  double pelvis_arc(double u) const {
    return kind_ == GaitKind::kStand ? 0.0 : step_ * cadence_ * u;
  }

  double ground(double s) const {
    if (rise_ == 0.0) return 0.0;
    return rise_ * std::floor(s / step_);
  }

  Vec3 foothold(long k, int side) const {
    const double s = (static_cast<double>(k) + cfg_.duty) * step_;
    const double yaw = path_.heading(s);
    const double lateral = side == 0 ? 1.0 : -1.0;
    Vec3 p = path_.point(s) + lateral * leg_[side].hip_half_width * left_of(yaw);
    p.y() = ground(s) + leg_[side].ankle_height;
    return p;
  }

  FootState foot(int side, double u) const {
    FootState f;
    if (kind_ == GaitKind::kStand) {
      const double lateral = side == 0 ? 1.0 : -1.0;
      f.ankle = lateral * leg_[side].hip_half_width * left_of(0.0);
      f.ankle.y() = leg_[side].ankle_height;
      f.planted = true;
      return f;
    }
    // Steps alternate left (even k) and right (odd k); step k lands at k*P.
    long k = static_cast<long>(std::floor(u / period_));
    if (((k % 2) + 2) % 2 != side) k -= 1;
    const double land = static_cast<double>(k) * period_;
    const double lift = land + 2.0 * cfg_.duty * period_;
    const Vec3 from = foothold(k, side);
    const double yaw_from = path_.heading((static_cast<double>(k) + cfg_.duty) * step_);
    if (u < lift) {
      f.ankle = from;
      f.yaw = yaw_from;
      f.planted = true;
      return f;
    }
    const double x = (u - lift) / ((1.0 - cfg_.duty) * 2.0 * period_);
    const double ease = 0.5 * (1.0 - std::cos(M_PI * x));
    const Vec3 to = foothold(k + 2, side);
    const double yaw_to = path_.heading((static_cast<double>(k + 2) + cfg_.duty) * step_);
    f.ankle = from + ease * (to - from);
    f.ankle.y() += (cfg_.swing_height + 0.5 * std::abs(to.y() - from.y())) * std::sin(M_PI * x);
    f.yaw = yaw_from + ease * (yaw_to - yaw_from);
    f.planted = false;
    return f;
  }

  void frame(double u, Landmarks& world, Rotation& gamma, Vec3& tau) const {
    const double s = pelvis_arc(u);
    const double heading = path_.heading(s);
    const bool moving = kind_ != GaitKind::kStand;
    const double cycle = M_PI * cadence_ * u;  // one full foot cycle per 2 steps
    const double yaw_osc = moving ? 3.0 * kDeg * std::sin(cycle) : 0.0;
    const double roll_osc = moving ? 2.0 * kDeg * std::sin(cycle) : 0.0;
    gamma = geom::rot_y(heading + yaw_osc) * geom::rot_z(roll_osc);

    tau = path_.point(s);
    if (moving) tau += kSway * std::sin(cycle) * left_of(heading);
    const double stair_lift = rise_ > 0.0 ? rise_ * (s / step_ - 0.5) : 0.0;
    tau.y() = pelvis_height_ + stair_lift + (moving ? kBob * std::cos(2.0 * cycle) : 0.0);

    const auto& sc = cfg_.bone_scale;
    auto attach = [&](int lm, const Vec3& p) { world.row(lm) = p.transpose(); };
    auto rigid = [&](int lm) {
      const auto& b = bones()[static_cast<std::size_t>(lm)];
      const Vec3 base = b.parent < 0 ? tau : Vec3(world.row(b.parent).transpose());
      attach(lm, base + gamma * scaled_offset(sc, lm));
    };

    // head and shoulders ride rigidly on the root
    for (int lm : {kNose, kLeftEye, kRightEye, kLeftEar, kRightEar, kLeftShoulder, kRightShoulder}) {
      rigid(lm);
    }
    const double w = leg_[0].hip_half_width;
    attach(kLeftHip, tau + gamma * Vec3(w, 0.0, 0.0));
    attach(kRightHip, tau + gamma * Vec3(-w, 0.0, 0.0));

    // arms swing opposite to the legs
    for (int side = 0; side < 2; ++side) {
      const int sh = side == 0 ? kLeftShoulder : kRightShoulder;
      const int el = side == 0 ? kLeftElbow : kRightElbow;
      const int wr = side == 0 ? kLeftWrist : kRightWrist;
      const double sign = side == 0 ? 1.0 : -1.0;
      const double swing = moving ? sign * arm_amp_ * std::sin(cycle) : 0.0;
      const double flex = (moving ? 20.0 : 10.0) * kDeg;
      const Vec3 shoulder = world.row(sh).transpose();
      const Vec3 elbow = shoulder + gamma * geom::rot_x(swing) * scaled_offset(sc, el);
      attach(el, elbow);
      attach(wr, elbow + gamma * geom::rot_x(swing - flex) * scaled_offset(sc, wr));
    }

    const Vec3 forward = gamma * Vec3(0.0, 0.0, 1.0);
    for (int side = 0; side < 2; ++side) {
      const LegGeometry& g = leg_[side];
      const int hip = side == 0 ? kLeftHip : kRightHip;
      const FootState f = foot(side, u);
      const Vec3 hip_pos = world.row(hip).transpose();
      const Rotation foot_rot = geom::rot_y(f.yaw);
      attach(side == 0 ? kLeftAnkle : kRightAnkle, f.ankle);
      attach(side == 0 ? kLeftKnee : kRightKnee,
             solve_knee(hip_pos, f.ankle, forward, g.thigh, g.shin));
      attach(side == 0 ? kLeftToe : kRightToe, f.ankle + foot_rot * g.toe);
      attach(side == 0 ? kLeftHeel : kRightHeel, f.ankle + foot_rot * g.heel);
    }
  }

  bool planted(int side, double u) const { return foot(side, u).planted; }

 private:
  static constexpr double kSway = 0.015;
  static constexpr double kBob = 0.01;

  GaitKind kind_;
  double fps_;
  GaitConfig cfg_;
  Path path_;
  LegGeometry leg_[2];
  double step_ = 0.0;
  double cadence_ = 0.0;
  double period_ = 0.0;
  double time0_ = 0.0;
  double arm_amp_ = 0.0;
  double rise_ = 0.0;
  double hip_above_ankle_ = 0.0;
  double pelvis_height_ = 0.0;
};

}  // namespace

std::string_view gait_name(GaitKind kind) {
  switch (kind) {
    case GaitKind::kWalk: return "walk";
    case GaitKind::kTurn: return "turn";
    case GaitKind::kStairs: return "stairs";
    case GaitKind::kStand: return "stand";
  }
  return "walk";
}

GaitKind parse_gait(std::string_view name) {
  if (name == "walk") return GaitKind::kWalk;
  if (name == "turn") return GaitKind::kTurn;
  if (name == "stairs") return GaitKind::kStairs;
  if (name == "stand") return GaitKind::kStand;
  throw InvalidInput("unknown gait kind '" + std::string(name) + "'");
}

MotionSequence generate_gait(GaitKind kind, int frames, double fps, std::uint64_t seed,
                             const GaitConfig& cfg) {
  if (frames < 2) throw InvalidInput("generate_gait: need at least two frames");
  if (!(fps > 0.0)) throw InvalidInput("generate_gait: fps must be positive");
  const Gait gait(kind, fps, seed, cfg);

  MotionSequence seq;
  seq.fps = fps;
  const auto n = static_cast<std::size_t>(frames);
  seq.local.resize(n);
  seq.gamma.resize(n);
  seq.tau.resize(n);
  seq.contact.resize(n);
  Landmarks world;
  for (int t = 0; t < frames; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const double u = gait.time(t);
    gait.frame(u, world, seq.gamma[i], seq.tau[i]);
    Landmarks local = world;
    local.rowwise() -= seq.tau[i].transpose();
    local = (local * seq.gamma[i]).eval();  // rows: gamma^T * (x - tau)
    seq.local[i] = LocalPose::from_positions(local);

    const double u_prev = gait.time(t - 1);
    for (int side = 0; side < 2; ++side) {
      const bool stance = gait.planted(side, u) && gait.planted(side, u_prev);
      const double p = stance ? 1.0 : 0.0;
      // contact channel order: left toe, right toe, left heel, right heel
      seq.contact[i][static_cast<std::size_t>(side)] = p;
      seq.contact[i][static_cast<std::size_t>(side + 2)] = p;
    }
  }
  return seq;
}

}  // namespace whamkit::body
