#pragma once

#include "whamkit/body/motion.h"

namespace whamkit::body {

inline constexpr double kMinSpeedFactor = 0.5;
inline constexpr double kMaxSpeedFactor = 1.5;

// Plays the motion `factor` times faster: output frame i samples source time
// i * factor, so the length becomes round(T / factor). Translations and
// landmarks are interpolated linearly, orientations by slerp, and contact
// truth is relabeled from the resampled foot speeds. factor == 1 returns an
// exact copy. Throws InvalidInput outside [0.5, 1.5].
MotionSequence resample_speed(const MotionSequence& seq, double factor);

}  // namespace whamkit::body
