#pragma once

#include "whamkit/body/motion.h"

#include <cstdint>
#include <string_view>

namespace whamkit::body {

enum class GaitKind { kWalk, kTurn, kStairs, kStand };

std::string_view gait_name(GaitKind kind);
GaitKind parse_gait(std::string_view name);

// Procedural gait parameters. These are tuning values for the stand-in
// motion source, not measurements.
struct GaitConfig {
  double step_length = 0.6;   // m, walk and turn
  double stair_tread = 0.3;   // m, step length on stairs
  double stair_rise = 0.17;   // m
  double cadence = 1.8;       // steps per second
  double duty = 0.6;          // stance fraction of one foot cycle
  double swing_height = 0.07; // m, apex of the swing arc
  double turn_rate_min_deg = 25.0;
  double turn_rate_max_deg = 60.0;
  double variation = 0.1;     // +-relative jitter on step length and cadence
  // Both hips hang off the pelvis midpoint, so only their mean scale is
  // representable; the generator uses the average of the two hip entries.
  BoneScales bone_scale = uniform_scales();

  static BoneScales uniform_scales() {
    BoneScales s{};
    s.fill(1.0);
    return s;
  }
};

// Deterministic function of (kind, frames, fps, seed, cfg). Feet are planned
// as footholds on a path and the legs solved with two-bone IK, so a planted
// foot is exactly static. Contact truth follows the stance schedule: 1 when
// the landmark's foot is planted at both t-1 and t. Throws InvalidInput for
// frames < 2 or non-positive fps.
MotionSequence generate_gait(GaitKind kind, int frames, double fps, std::uint64_t seed,
                             const GaitConfig& cfg = {});

}  // namespace whamkit::body
