#pragma once

#include "whamkit/body/motion.h"
#include "whamkit/core/types.h"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace whamkit::metrics {

// Per-frame landmark sets, one row per landmark.
using LandmarkFrames = std::span<const Points3>;

// Pelvis-centered (hip midpoint) mean per-joint error in mm. Every frame
// needs the full 21-landmark skeleton. Throws InvalidInput on shape
// mismatch or empty input.
double mpjpe(LandmarkFrames pred, LandmarkFrames truth);

// Per-frame similarity Procrustes alignment, then mean joint error in mm.
double pa_mpjpe(LandmarkFrames pred, LandmarkFrames truth);

// Mean |a_pred - a_truth| with a = second difference * fps^2, in m/s^2.
// Throws InvalidInput when T < 3.
double accel_error(LandmarkFrames pred, LandmarkFrames truth, double fps);

enum class WorldAlign { kFirstTwo, kFull };  // W and WA

struct SegmentDetail {
  int begin = 0;
  int length = 0;
  double error_mm = 0.0;
  double root_sse = 0.0;  // sum of squared root errors after alignment, m^2
  bool heading_fallback = false;
};

struct WorldError {
  double value_mm = 0.0;
  std::vector<SegmentDetail> segments;
};

inline constexpr int kWorldSegment = 100;

// Splits the sequence into 100-frame segments (a trailing single frame is
// merged into the previous segment), aligns each predicted segment to the
// truth and averages the world landmark error over segments.
//   kFirstTwo: translation from root frame 0, yaw from the ground-plane
//              heading of root_1 - root_0 (falls back to the frame-0 root
//              orientation when either heading is shorter than 1 mm).
//   kFull:     rigid Procrustes on the segment's roots.
WorldError world_mpjpe_100(const body::MotionSequence& pred, const body::MotionSequence& truth,
                           WorldAlign mode);

// Rigidly aligns the whole predicted root path to the truth and returns the
// mean position error as a percentage of the truth path length. Throws
// UndefinedMetric when the path is shorter than 0.1 m.
double rte(std::span<const Vec3> pred, std::span<const Vec3> truth);

// Mean norm of the third difference * fps^3, in units of 10 m/s^3. Throws
// InvalidInput when T < 4.
double jitter(LandmarkFrames pred, double fps);

using FootPositions = std::array<Vec3, body::kNumContacts>;
std::vector<FootPositions> foot_positions(const body::MotionSequence& seq);

// Mean per-frame displacement (mm) of contact landmarks over frames whose
// truth contact exceeds 0.5. Throws UndefinedMetric when there is none.
double foot_slide(std::span<const FootPositions> pred, std::span<const body::Contact> truth_contact);

// Per-sequence report. Undefined metrics are NaN.
struct MetricReport {
  double mpjpe = 0.0;          // mm
  double pa_mpjpe = 0.0;       // mm
  double accel_err = 0.0;      // m/s^2
  double w_mpjpe_100 = 0.0;    // mm
  double wa_mpjpe_100 = 0.0;   // mm
  double rte = 0.0;            // percent
  double jitter = 0.0;         // 10 m/s^3
  double fs = 0.0;             // mm
  double mpjpe_first10 = 0.0;  // mm, frames 0..9
  std::vector<SegmentDetail> segments;

  static const std::vector<std::string>& columns();
  std::vector<double> values() const;
};

// Camera-frame landmarks drive mpjpe / pa / accel (accel on pelvis-centered
// points, like mpjpe); world motion drives the rest. Lengths must match.
MetricReport evaluate(LandmarkFrames pred_camera, LandmarkFrames truth_camera,
                      const body::MotionSequence& pred_world, const body::MotionSequence& truth_world);

// Column-wise mean over finite values (NaN when none).
MetricReport aggregate(std::span<const MetricReport> reports);

}  // namespace whamkit::metrics
