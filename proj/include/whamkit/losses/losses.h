#pragma once

#include "whamkit/geom/camera.h"
#include "whamkit/model/batch.h"
#include "whamkit/model/network.h"
#include "whamkit/model/ops.h"
#include "whamkit/synth/keypoints.h"

#include <array>
#include <span>
#include <string_view>

namespace whamkit::losses {

enum Term : int {
  kPose = 0,
  kBeta,
  k3D,
  k2D,
  kCascade,
  kGamma,
  kVelocity,
  kContact,
  kOmega,
  kCam,
  kFootSlide,
  kNumTerms,
};

std::string_view term_name(int term);

struct LossWeights {
  std::array<double, kNumTerms> lambda = {1.0, 0.1, 1.0, 1.0, 0.5, 1.0, 1.0, 1.0, 0.5, 0.5, 0.1};

  double& operator[](int term) { return lambda.at(static_cast<std::size_t>(term)); }
  double operator[](int term) const { return lambda.at(static_cast<std::size_t>(term)); }
  // Throws InvalidInput for a negative or non-finite weight.
  void validate() const;
};

// Depth below which reprojection clamps and penalizes (meters).
inline constexpr double kMinProjectionDepth = 1e-3;

struct LossBreakdown {
  std::array<double, kNumTerms> terms{};
  double total = 0.0;
  int visible_keypoints = 0;
};

struct LossGraph {
  std::array<nn::Var, kNumTerms> terms;
  nn::Var total;
  int visible_keypoints = 0;

  LossBreakdown values() const;
};

// Each term is a mean over frames and batch rows; landmark-wise terms also
// average over landmarks. Rates (velocity, omega, foot speed) are compared
// in per-second units. Throws NumericError naming the first non-finite term.
//
//   pose     |local - local*|^2
//   beta     (beta - beta*)^2
//   3d       |x3d - x*|^2 + |x_hat - x*|^2, x_hat = Gamma_c local, plus the
//            zero-state frame-0 cascade output
//   2d       |pi(x_hat + c) - x2d*|^2 / w^2 over visible keypoints, plus a
//            squared penalty on depths below kMinProjectionDepth
//   cascade  |x3d - x_hat|^2
//   gamma    |Gamma0 - Gamma*|_F^2 + |Gamma - Gamma*|_F^2
//   velocity |v0 - v*|^2 + |v - v*|^2
//   contact  (p - p*)^2
//   omega    |log(R^(t-1) R^(t)T) - omega*|^2, R = Gamma_c Gamma^T, t >= 1
//   cam      |R - R*|_F^2
//   fs       |p* . v_f|^2, world foot velocity of the rolled-out motion
LossGraph total_loss(const model::ForwardResult& out, const model::Batch& batch, const LossWeights& w);

struct ReprojectionLoss {
  double value = 0.0;
  int counted = 0;  // visible keypoints that entered the mean
};

// Mean squared pixel error over visible keypoints, pixels divided by image
// width. Depths are clamped at kMinProjectionDepth and the squared shortfall
// added as a penalty (averaged over all keypoints).
ReprojectionLoss reprojection_loss(const Points3& camera_points, const Points2& truth_px,
                                   const geom::Pinhole& pinhole, const synth::VisibilityMask& mask);

// Mean over frames and contact landmarks of |p* v_f|^2, in the units of the
// velocities given. Throws InvalidInput on a length mismatch.
double foot_sliding_loss(std::span<const model::FootVelocities> velocity,
                         std::span<const body::Contact> contact);

}  // namespace whamkit::losses
