#pragma once

#include "whamkit/body/motion.h"
#include "whamkit/core/types.h"

#include <array>
#include <span>
#include <vector>

namespace whamkit::model {

// Contact probability above which a toe/heel joins the foot-velocity
// average.
inline constexpr double kContactThreshold = 0.5;

// v^(t) = Gamma^(t)^T (tau^(t+1) - tau^(t)); the last frame repeats the
// previous velocity. Throws InvalidInput for mismatched or < 2 frames.
std::vector<Vec3> extract_velocities(std::span<const Rotation> gamma, std::span<const Vec3> tau);

// tau^(0) = tau0, tau^(t) = tau^(t-1) + Gamma^(t-1) v^(t-1).
std::vector<Vec3> rollout(std::span<const Rotation> gamma, std::span<const Vec3> velocity,
                          const Vec3& tau0 = Vec3::Zero());

using FootVelocities = std::array<Vec3, body::kNumContacts>;

// v_tilde = v0 - gamma0^T * mean(v_f over channels with p > threshold).
// With no channel above threshold v0 is returned unchanged.
Vec3 adjust_velocity(const Rotation& gamma0, const Vec3& v0, const body::Contact& p,
                     const FootVelocities& foot_velocity);

// World displacement of each contact landmark from frame t to t+1 when the
// root moves by gamma^(t) v^(t):
//   d_l = gamma^(t+1) l^(t+1) - gamma^(t) l^(t) + gamma^(t) v^(t).
// Returns T-1 entries.
std::vector<FootVelocities> foot_velocities(std::span<const Rotation> gamma,
                                            std::span<const Vec3> velocity,
                                            std::span<const body::Landmarks> local);

// Whole-sequence adjustment as the model applies it: frame t uses the foot
// displacement t -> t+1 and the contact probability of frame t+1; the last
// frame keeps v0.
std::vector<Vec3> adjust_velocity(std::span<const Rotation> gamma0, std::span<const Vec3> v0,
                                  std::span<const body::Landmarks> local,
                                  std::span<const body::Contact> contact);

}  // namespace whamkit::model
