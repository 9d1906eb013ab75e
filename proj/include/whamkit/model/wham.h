#pragma once

#include "whamkit/body/skeleton.h"
#include "whamkit/nn/layers.h"
#include "whamkit/nn/params.h"

#include <cstdint>
#include <string>
#include <vector>

namespace whamkit::model {

// Per-frame network input: 17 normalized keypoints (34), 17 mask bits and
// the box ((c_x - p_x) / f, (c_y - p_y) / f, side / f).
inline constexpr int kInputDim = 2 * body::kNumKeypoints2D + body::kNumKeypoints2D + 3;
inline constexpr int kPoseDim = 3 * body::kNumLandmarks;  // 63
// Motion decoder head: local pose, contact logits, camera translation,
// log bone scales, camera-frame root orientation (6D).
inline constexpr int kMotionHeadDim = kPoseDim + body::kNumContacts + 3 + body::kNumBones + 6;
inline constexpr int kTrajHeadDim = 9;  // 6D orientation + 3 velocity

// Depth prior for the camera head: a box of side s pixels is taken to span
// this many meters, so the root depth is f * kBoxMeters / s before the
// learned log-correction.
inline constexpr double kBoxMeters = 2.0;

struct ModelDims {
  int hidden = 128;
  int feature = 32;
  int integrator_hidden = 128;
  int init_hidden = 128;

  void validate() const;
  std::vector<std::uint32_t> to_vector() const;
  static ModelDims from_vector(const std::vector<std::uint32_t>& v);
  bool operator==(const ModelDims&) const = default;
};

// Parameter group names, used for per-stage learning rates.
inline const std::string kGroupEncoder = "encoder";
inline const std::string kGroupIntegrator = "integrator";
inline const std::string kGroupMotion = "motion_decoder";
inline const std::string kGroupTrajectory = "trajectory_decoder";
inline const std::string kGroupRefiner = "refiner";
inline const std::string kGroupInit = "neural_init";

// All learnable weights: encoder E_M (+ cascade 3D head), integrator F_I,
// motion decoder D_M (+ head), trajectory decoder D_T (+ head), refiner R_T
// (+ head) and the neural-initialization MLP producing (h_E0, h_D0).
struct WhamParams {
  ModelDims dims;
  nn::ParamStore store;
  nn::GruLayer encoder;
  nn::LinearLayer cascade_head;
  nn::DenseStack integrator;
  nn::GruLayer motion_decoder;
  nn::LinearLayer motion_head;
  nn::GruLayer trajectory_decoder;
  nn::LinearLayer trajectory_head;
  nn::GruLayer refiner;
  nn::LinearLayer refiner_head;
  nn::DenseStack init_net;

  // Seeded initialization. The last layers of the integrator, the refiner
  // head and the init MLP start at zero so that a fresh model has the
  // residual identities (phi_hat = phi_m, refiner pass-through, zero
  // initial states) until training moves them.
  static WhamParams create(const ModelDims& dims, std::uint64_t seed);

  // Layout only, all zeros.
  static WhamParams zeros(const ModelDims& dims);

  void zero_group(const std::string& group);
};

}  // namespace whamkit::model
