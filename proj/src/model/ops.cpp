#include "whamkit/model/ops.h"

#include "whamkit/core/error.h"

namespace whamkit::model {

std::vector<Vec3> extract_velocities(std::span<const Rotation> gamma, std::span<const Vec3> tau) {
  if (gamma.size() != tau.size()) throw InvalidInput("extract_velocities: length mismatch");
  if (gamma.size() < 2) throw InvalidInput("extract_velocities: need at least two frames");
  std::vector<Vec3> v(gamma.size());
  for (std::size_t t = 0; t + 1 < gamma.size(); ++t) v[t] = gamma[t].transpose() * (tau[t + 1] - tau[t]);
  v.back() = v[v.size() - 2];
  return v;
}

std::vector<Vec3> rollout(std::span<const Rotation> gamma, std::span<const Vec3> velocity, const Vec3& tau0) {
  if (gamma.size() != velocity.size()) throw InvalidInput("rollout: length mismatch");
  std::vector<Vec3> tau(gamma.size());
  if (tau.empty()) return tau;
  tau[0] = tau0;
  for (std::size_t t = 1; t < tau.size(); ++t) tau[t] = tau[t - 1] + gamma[t - 1] * velocity[t - 1];
  return tau;
}

Vec3 adjust_velocity(const Rotation& gamma0, const Vec3& v0, const body::Contact& p,
                     const FootVelocities& foot_velocity) {
  Vec3 mean = Vec3::Zero();
  int n = 0;
  for (int k = 0; k < body::kNumContacts; ++k) {
    if (p[k] > kContactThreshold) {
      mean += foot_velocity[k];
      ++n;
    }
  }
  if (n == 0) return v0;
  return v0 - gamma0.transpose() * (mean / n);
}

std::vector<FootVelocities> foot_velocities(std::span<const Rotation> gamma, std::span<const Vec3> velocity,
                                            std::span<const body::Landmarks> local) {
  if (gamma.size() != velocity.size() || gamma.size() != local.size()) {
    throw InvalidInput("foot_velocities: length mismatch");
  }
  std::vector<FootVelocities> out(gamma.empty() ? 0 : gamma.size() - 1);
  for (std::size_t t = 0; t < out.size(); ++t) {
    for (int k = 0; k < body::kNumContacts; ++k) {
      const int j = body::kContactLandmarks[k];
      out[t][k] = gamma[t + 1] * body::landmark(local[t + 1], j) - gamma[t] * body::landmark(local[t], j) +
                  gamma[t] * velocity[t];
    }
  }
  return out;
}

std::vector<Vec3> adjust_velocity(std::span<const Rotation> gamma0, std::span<const Vec3> v0,
                                  std::span<const body::Landmarks> local,
                                  std::span<const body::Contact> contact) {
  if (contact.size() != gamma0.size()) throw InvalidInput("adjust_velocity: length mismatch");
  const auto fv = foot_velocities(gamma0, v0, local);
  std::vector<Vec3> out(v0.begin(), v0.end());
  for (std::size_t t = 0; t < fv.size(); ++t) out[t] = adjust_velocity(gamma0[t], v0[t], contact[t + 1], fv[t]);
  return out;
}

}  // namespace whamkit::model
