#pragma once

#include "whamkit/model/batch.h"
#include "whamkit/model/wham.h"
#include "whamkit/nn/layers.h"
#include "whamkit/nn/tape.h"

#include <span>
#include <vector>

namespace whamkit::model {

using nn::Var;

// Every layer of WhamParams bound to one tape.
struct BoundModel {
  const WhamParams* params = nullptr;
  nn::GruVars encoder;
  nn::LinearVars cascade_head;
  std::vector<nn::LinearVars> integrator;
  nn::GruVars motion_decoder;
  nn::LinearVars motion_head;
  nn::GruVars trajectory_decoder;
  nn::LinearVars trajectory_head;
  nn::GruVars refiner;
  nn::LinearVars refiner_head;
  std::vector<nn::LinearVars> init_net;
};

BoundModel bind(nn::Tape& tape, const WhamParams& params);

struct InitialStates {
  Var encoder;  // B x H
  Var decoder;  // B x H
};

// MLP on a camera-frame root-relative frame-0 pose (B x 63).
InitialStates neural_init(const BoundModel& m, Var pose0);
InitialStates zero_states(nn::Tape& tape, const BoundModel& m, Eigen::Index batch);

struct MotionFeatures {
  std::vector<Var> phi_m;    // B x H
  std::vector<Var> phi_hat;  // B x H
  std::vector<Var> x3d;      // B x 63, camera-frame, pelvis-centered
};

// Causal encoder over per-frame inputs (B x kInputDim). phi_hat is left
// equal to phi_m; see integrate().
MotionFeatures encode(const BoundModel& m, std::span<const Var> inputs, Var h0);

// phi_hat = phi_m + F_I(concat(phi_m, phi_i)).
std::vector<Var> integrate(const BoundModel& m, std::span<const Var> phi_m, std::span<const Var> features);

struct MotionDecoded {
  std::vector<Var> local;      // B x 63, root frame, pelvis-centered
  std::vector<Var> contact;    // B x 4 in (0, 1)
  std::vector<Var> cam;        // B x 3, camera-frame pelvis position
  std::vector<Var> beta;       // B x 21, bone scales (exp of the head)
  std::vector<Var> gamma_cam;  // B x 9
};

// `box` rows are (c_x - p_x)/f, (c_y - p_y)/f, side/f of each frame.
MotionDecoded decode_motion(const BoundModel& m, std::span<const Var> phi_hat, Var h0,
                            std::span<const Var> box);

struct Trajectory {
  std::vector<Var> gamma;     // B x 9
  std::vector<Var> velocity;  // B x 3, root frame, m/frame
};

// Velocity heads work in m/s and omega enters in rad/s; both are converted
// with `fps` so the outputs stay in m/frame.
Trajectory decode_trajectory(const BoundModel& m, std::span<const Var> phi_m, std::span<const Var> omega,
                             double fps);

// Graph form of the whole-sequence adjust_velocity in ops.h. The contact
// threshold is a hard selection, so no gradient flows into p.
std::vector<Var> adjust_velocity(const Trajectory& initial, std::span<const Var> local,
                                 std::span<const Var> contact);

// Residual refinement: Gamma = Gamma0 * R(delta), v = v_tilde + dv.
Trajectory refine_trajectory(const BoundModel& m, std::span<const Var> phi_m, const Trajectory& initial,
                             std::span<const Var> v_tilde, double fps);

std::vector<Var> rollout(const Trajectory& traj, Var tau0);

enum class InitMode {
  kZero,       // conventional zero hidden states
  kTruth,      // batch.init_pose (training)
  kPredicted,  // the model's own zero-state frame-0 cascade output
};

struct ForwardOptions {
  bool integrator = false;  // false: phi_hat = phi_m (pretraining)
  bool omega = true;        // false: omega fed as zeros
  bool refiner = true;      // false: (Gamma, v) = (Gamma0, v0), no adjustment
  InitMode init = InitMode::kPredicted;
};

struct ForwardResult {
  Var x3d_zero;  // frame-0 cascade output from zero encoder state
  MotionFeatures features;
  MotionDecoded motion;
  Trajectory initial;
  std::vector<Var> v_tilde;
  Trajectory refined;
  std::vector<Var> tau;
};

ForwardResult forward(nn::Tape& tape, const BoundModel& m, const Batch& batch, const ForwardOptions& opt);

}  // namespace whamkit::model
