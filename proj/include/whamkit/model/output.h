#pragma once

#include "whamkit/body/motion.h"
#include "whamkit/core/ndjson.h"
#include "whamkit/model/network.h"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace whamkit::model {

// Plain per-frame model outputs for one sequence.
struct WhamOutput {
  double fps = 30.0;
  std::vector<body::LocalPose> local;
  std::vector<body::Contact> contact;
  std::vector<Vec3> cam;             // camera-frame pelvis position
  std::vector<Rotation> gamma_cam;   // root -> camera
  std::vector<Rotation> gamma0;
  std::vector<Vec3> v0;
  std::vector<Vec3> v_tilde;
  std::vector<Rotation> gamma;       // refined, root -> world
  std::vector<Vec3> velocity;        // refined, m/frame
  std::vector<Vec3> tau;
  std::vector<body::Landmarks> x3d;  // cascade output, camera frame

  int length() const { return static_cast<int>(local.size()); }

  // Landmarks in the camera frame, gamma_cam * local + cam.
  Points3 camera_landmarks(int t) const;
  // Refined world trajectory as a motion sequence (contact = predicted p).
  body::MotionSequence world_motion() const;
};

// Row `row` of a forward pass.
WhamOutput extract(const ForwardResult& r, Eigen::Index row, double fps);

// Runs one sequence through the model without recording gradients for
// later use; the tape is local to the call.
WhamOutput infer(const WhamParams& params, const SequenceData& seq, const ForwardOptions& opt);

void write_output(std::ostream& out, const WhamOutput& o);
WhamOutput read_output(std::istream& in, const std::string& source = "<stream>");
void save_output(const std::filesystem::path& path, const WhamOutput& o);

}  // namespace whamkit::model
