#include "whamkit/metrics/metrics.h"

#include "whamkit/core/error.h"
#include "whamkit/geom/rigid.h"
#include "whamkit/geom/so3.h"

#include <cmath>
#include <limits>

namespace whamkit::metrics {

namespace {

constexpr double kMm = 1000.0;

void check_pair(LandmarkFrames pred, LandmarkFrames truth, const char* what) {
  if (pred.size() != truth.size()) throw InvalidInput(std::string(what) + ": frame count mismatch");
  if (pred.empty()) throw InvalidInput(std::string(what) + ": empty input");
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (pred[t].rows() != truth[t].rows() || pred[t].rows() == 0) {
      throw InvalidInput(std::string(what) + ": landmark count mismatch");
    }
  }
}

Vec3 pelvis_of(const Points3& p) {
  if (p.rows() != body::kNumLandmarks) throw InvalidInput("mpjpe: expects the 21-landmark skeleton");
  return 0.5 * (p.row(body::kLeftHip) + p.row(body::kRightHip)).transpose();
}

double mean_distance(const Points3& a, const Points3& b) { return (a - b).rowwise().norm().mean(); }

double ground_yaw(const Vec3& v) { return std::atan2(v.x(), v.z()); }

Points3 world_points(const body::MotionSequence& seq, int t) {
  return body::world_landmarks(seq, t);
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

double mpjpe(LandmarkFrames pred, LandmarkFrames truth) {
  check_pair(pred, truth, "mpjpe");
  double s = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    Points3 p = pred[t];
    Points3 q = truth[t];
    p.rowwise() -= pelvis_of(p).transpose();
    q.rowwise() -= pelvis_of(q).transpose();
    s += mean_distance(p, q);
  }
  return kMm * s / static_cast<double>(pred.size());
}

double pa_mpjpe(LandmarkFrames pred, LandmarkFrames truth) {
  check_pair(pred, truth, "pa_mpjpe");
  double s = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const auto a = geom::kabsch_align(pred[t], truth[t], geom::AlignMode::kSimilarity);
    s += mean_distance(a.apply(pred[t]), truth[t]);
  }
  return kMm * s / static_cast<double>(pred.size());
}

double accel_error(LandmarkFrames pred, LandmarkFrames truth, double fps) {
  check_pair(pred, truth, "accel_error");
  if (pred.size() < 3) throw InvalidInput("accel_error: need at least 3 frames");
  double s = 0.0;
  for (std::size_t t = 1; t + 1 < pred.size(); ++t) {
    const Points3 ap = pred[t + 1] - 2.0 * pred[t] + pred[t - 1];
    const Points3 at = truth[t + 1] - 2.0 * truth[t] + truth[t - 1];
    s += (ap - at).rowwise().norm().mean();
  }
  return s * fps * fps / static_cast<double>(pred.size() - 2);
}

WorldError world_mpjpe_100(const body::MotionSequence& pred, const body::MotionSequence& truth, WorldAlign mode) {
  if (pred.length() != truth.length()) throw InvalidInput("world_mpjpe_100: length mismatch");
  const int n = truth.length();
  if (n < 2) throw InvalidInput("world_mpjpe_100: need at least 2 frames");

  WorldError out;
  for (int begin = 0; begin < n; begin += kWorldSegment) {
    int len = std::min(kWorldSegment, n - begin);
    if (n - (begin + len) == 1) ++len;  // merge a lone trailing frame
    SegmentDetail seg;
    seg.begin = begin;
    seg.length = len;

    geom::RigidTransform align;
    if (mode == WorldAlign::kFirstTwo) {
      const Vec3& p0 = pred.tau[begin];
      const Vec3& q0 = truth.tau[begin];
      Vec3 hp = pred.tau[begin + 1] - p0;
      Vec3 hq = truth.tau[begin + 1] - q0;
      hp.y() = 0.0;
      hq.y() = 0.0;
      double yaw;
      if (hp.norm() < 1e-3 || hq.norm() < 1e-3) {
        seg.heading_fallback = true;
        yaw = geom::heading_yaw(truth.gamma[begin]) - geom::heading_yaw(pred.gamma[begin]);
      } else {
        yaw = ground_yaw(hq) - ground_yaw(hp);
      }
      align.rotation = geom::rot_y(yaw);
      align.translation = q0 - align.rotation * p0;
    } else {
      Points3 p(len, 3), q(len, 3);
      for (int i = 0; i < len; ++i) {
        p.row(i) = pred.tau[begin + i].transpose();
        q.row(i) = truth.tau[begin + i].transpose();
      }
      align = geom::kabsch_align(p, q, geom::AlignMode::kRigid).transform;
    }

    double err = 0.0;
    for (int i = 0; i < len; ++i) {
      const int t = begin + i;
      err += mean_distance(align.apply(world_points(pred, t)), world_points(truth, t));
      seg.root_sse += (align.apply(pred.tau[t]) - truth.tau[t]).squaredNorm();
    }
    seg.error_mm = kMm * err / len;
    out.segments.push_back(seg);
    begin += len - std::min(kWorldSegment, len);  // account for a merged frame
  }
  double s = 0.0;
  for (const auto& seg : out.segments) s += seg.error_mm;
  out.value_mm = s / static_cast<double>(out.segments.size());
  return out;
}

double rte(std::span<const Vec3> pred, std::span<const Vec3> truth) {
  if (pred.size() != truth.size() || pred.empty()) throw InvalidInput("rte: length mismatch");
  double path = 0.0;
  for (std::size_t t = 1; t < truth.size(); ++t) path += (truth[t] - truth[t - 1]).norm();
  if (path < 0.1) throw UndefinedMetric("rte: truth path shorter than 0.1 m");
  const auto n = static_cast<Eigen::Index>(pred.size());
  Points3 p(n, 3), q(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.row(i) = pred[static_cast<std::size_t>(i)].transpose();
    q.row(i) = truth[static_cast<std::size_t>(i)].transpose();
  }
  const auto a = geom::kabsch_align(p, q, geom::AlignMode::kRigid);
  return 100.0 * mean_distance(a.apply(p), q) / path;
}

double jitter(LandmarkFrames pred, double fps) {
  if (pred.size() < 4) throw InvalidInput("jitter: need at least 4 frames");
  double s = 0.0;
  for (std::size_t t = 0; t + 3 < pred.size(); ++t) {
    const Points3 d = pred[t + 3] - 3.0 * pred[t + 2] + 3.0 * pred[t + 1] - pred[t];
    s += d.rowwise().norm().mean();
  }
  return s / static_cast<double>(pred.size() - 3) * fps * fps * fps / 10.0;
}

std::vector<FootPositions> foot_positions(const body::MotionSequence& seq) {
  std::vector<FootPositions> out(static_cast<std::size_t>(seq.length()));
  for (int t = 0; t < seq.length(); ++t) {
    const body::Landmarks w = body::world_landmarks(seq, t);
    for (int k = 0; k < body::kNumContacts; ++k) {
      out[static_cast<std::size_t>(t)][k] = body::landmark(w, body::kContactLandmarks[k]);
    }
  }
  return out;
}

double foot_slide(std::span<const FootPositions> pred, std::span<const body::Contact> truth_contact) {
  if (pred.size() != truth_contact.size()) throw InvalidInput("foot_slide: length mismatch");
  double s = 0.0;
  int count = 0;
  for (std::size_t t = 1; t < pred.size(); ++t) {
    for (int k = 0; k < body::kNumContacts; ++k) {
      if (truth_contact[t][k] > 0.5) {
        s += (pred[t][k] - pred[t - 1][k]).norm();
        ++count;
      }
    }
  }
  if (count == 0) throw UndefinedMetric("foot_slide: no contact frames");
  return kMm * s / count;
}

const std::vector<std::string>& MetricReport::columns() {
  static const std::vector<std::string> c = {"mpjpe",        "pa_mpjpe", "accel_err", "w_mpjpe_100", "wa_mpjpe_100",
                                             "rte",          "jitter",   "fs",        "mpjpe_first10"};
  return c;
}

std::vector<double> MetricReport::values() const {
  return {mpjpe, pa_mpjpe, accel_err, w_mpjpe_100, wa_mpjpe_100, rte, jitter, fs, mpjpe_first10};
}

MetricReport evaluate(LandmarkFrames pred_camera, LandmarkFrames truth_camera, const body::MotionSequence& pred_world,
                      const body::MotionSequence& truth_world) {
  check_pair(pred_camera, truth_camera, "evaluate");
  if (pred_world.length() != truth_world.length() ||
      pred_world.length() != static_cast<int>(pred_camera.size())) {
    throw InvalidInput("evaluate: length mismatch");
  }
  MetricReport r;
  r.mpjpe = mpjpe(pred_camera, truth_camera);
  r.pa_mpjpe = pa_mpjpe(pred_camera, truth_camera);
  const std::size_t head = std::min<std::size_t>(10, pred_camera.size());
  r.mpjpe_first10 = mpjpe(pred_camera.first(head), truth_camera.first(head));
  if (pred_camera.size() >= 3) {
    // Same pelvis-centered protocol as MPJPE.
    std::vector<Points3> pc(pred_camera.begin(), pred_camera.end());
    std::vector<Points3> tc(truth_camera.begin(), truth_camera.end());
    for (auto* frames : {&pc, &tc}) {
      for (Points3& p : *frames) p.rowwise() -= pelvis_of(p).transpose();
    }
    r.accel_err = accel_error(pc, tc, truth_world.fps);
  } else {
    r.accel_err = nan();
  }

  const auto w = world_mpjpe_100(pred_world, truth_world, WorldAlign::kFirstTwo);
  r.w_mpjpe_100 = w.value_mm;
  r.segments = w.segments;
  r.wa_mpjpe_100 = world_mpjpe_100(pred_world, truth_world, WorldAlign::kFull).value_mm;
  try {
    r.rte = rte(pred_world.tau, truth_world.tau);
  } catch (const UndefinedMetric&) {
    r.rte = nan();
  }
  std::vector<Points3> world(static_cast<std::size_t>(pred_world.length()));
  for (int t = 0; t < pred_world.length(); ++t) world[static_cast<std::size_t>(t)] = world_points(pred_world, t);
  r.jitter = world.size() >= 4 ? jitter(world, pred_world.fps) : nan();
  try {
    r.fs = foot_slide(foot_positions(pred_world), truth_world.contact);
  } catch (const UndefinedMetric&) {
    r.fs = nan();
  }
  return r;
}

MetricReport aggregate(std::span<const MetricReport> reports) {
  const std::size_t k = MetricReport::columns().size();
  std::vector<double> sum(k, 0.0);
  std::vector<int> count(k, 0);
  for (const auto& r : reports) {
    const auto v = r.values();
    for (std::size_t i = 0; i < k; ++i) {
      if (std::isfinite(v[i])) {
        sum[i] += v[i];
        ++count[i];
      }
    }
  }
  std::vector<double> m(k);
  for (std::size_t i = 0; i < k; ++i) m[i] = count[i] > 0 ? sum[i] / count[i] : nan();
  MetricReport a;
  a.mpjpe = m[0];
  a.pa_mpjpe = m[1];
  a.accel_err = m[2];
  a.w_mpjpe_100 = m[3];
  a.wa_mpjpe_100 = m[4];
  a.rte = m[5];
  a.jitter = m[6];
  a.fs = m[7];
  a.mpjpe_first10 = m[8];
  return a;
}

}  // namespace whamkit::metrics
