#include "whamkit/app/evaluate.h"

#include "whamkit/app/config.h"
#include "whamkit/app/train.h"
#include "whamkit/core/parallel.h"
#include "whamkit/nn/checkpoint.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace whamkit::app {

namespace fs = std::filesystem;

namespace {

std::string num(double v, int digits = 6) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string csv_row(const std::string& name, const std::string& gait, const metrics::MetricReport& r) {
  std::string row = name + "," + gait;
  for (double v : r.values()) row += "," + num(v);
  return row + "\n";
}

}  // namespace

model::ForwardOptions forward_options(const std::string& stage, const EvalOptions& opt) {
  model::ForwardOptions f;
  f.integrator = stage_uses_integrator(stage) && !opt.no_integrator;
  f.omega = !opt.no_omega;
  f.refiner = !opt.no_refiner;
  f.init = opt.no_neural_init ? model::InitMode::kZero : model::InitMode::kPredicted;
  return f;
}

std::vector<Points3> camera_landmarks(const model::SequenceData& seq) {
  std::vector<Points3> out;
  for (int t = 0; t < seq.length(); ++t) out.push_back(seq.camera.to_camera(body::world_landmarks(seq.motion, t), t));
  return out;
}

metrics::MetricReport score(const model::WhamOutput& out, const model::SequenceData& seq) {
  std::vector<Points3> pred;
  for (int t = 0; t < out.length(); ++t) pred.push_back(out.camera_landmarks(t));
  const auto truth = camera_landmarks(seq);
  return metrics::evaluate(pred, truth, out.world_motion(), seq.motion);
}

metrics::MetricReport score_oracle(const model::SequenceData& seq) {
  const auto truth = camera_landmarks(seq);
  return metrics::evaluate(truth, truth, seq.motion, seq.motion);
}

EvalResult evaluate(const model::WhamParams* params, const std::string& stage, const std::vector<int>& indices,
                    const std::vector<model::SequenceData>& seqs, const EvalOptions& opt) {
  if (indices.size() != seqs.size()) throw InvalidInput("evaluate: index list does not match the sequences");
  if (!opt.oracle && params == nullptr) throw InvalidInput("evaluate: model parameters required");
  const model::ForwardOptions fwd = forward_options(stage, opt);
  EvalResult r;
  r.sequences.resize(seqs.size());
  parallel_for(seqs.size(), [&](std::size_t i) {
    const auto& seq = seqs[i];
    SequenceEval& e = r.sequences[i];
    e.index = indices[i];
    e.gait = seq.gait;
    e.truth_root = seq.motion.tau;
    if (opt.oracle) {
      e.report = score_oracle(seq);
      e.pred_root = seq.motion.tau;
    } else {
      const model::WhamOutput out = model::infer(*params, seq, fwd);
      e.report = score(out, seq);
      e.pred_root = out.tau;
    }
  });
  std::vector<metrics::MetricReport> reports;
  for (const auto& s : r.sequences) reports.push_back(s.report);
  r.aggregate = metrics::aggregate(reports);
  return r;
}

std::string metrics_csv(const EvalResult& r) {
  std::string s = "sequence,gait";
  for (const auto& c : metrics::MetricReport::columns()) s += "," + c;
  s += "\n";
  for (const auto& e : r.sequences) s += csv_row(std::to_string(e.index), e.gait, e.report);
  s += csv_row("aggregate", "all", r.aggregate);
  return s;
}

EvalResult run_eval(const std::optional<fs::path>& checkpoint, const fs::path& dataset, const fs::path& out,
                    const EvalOptions& opt) {
  std::optional<model::WhamParams> params;
  std::string stage;
  if (!opt.oracle) {
    if (!checkpoint || !fs::exists(*checkpoint)) {
      throw MissingCheckpoint("eval needs a checkpoint" + (checkpoint ? ": " + checkpoint->string() : std::string()));
    }
    const nn::Checkpoint c = nn::load_checkpoint(*checkpoint);
    params = params_from_checkpoint(c);
    stage = c.stage;
  }
  const synth::Manifest m = synth::read_manifest(dataset);
  const std::vector<int>& indices = m.split(opt.split);
  if (params && m.feature_dim != params->dims.feature) throw ConfigError("checkpoint feature_dim differs from the dataset");
  std::vector<model::SequenceData> seqs;
  for (int i : indices) seqs.push_back(model::canonicalize(synth::load_sample(dataset, i, m)));

  const EvalResult r = evaluate(params ? &*params : nullptr, stage, indices, seqs, opt);
  fs::create_directories(out);
  const std::string csv = metrics_csv(r);
  write_file(out / "metrics.csv", csv);
  if (opt.plots) {
    for (const auto& e : r.sequences) {
      write_file(out / ("traj_" + std::to_string(e.index) + ".svg"),
                 trajectory_svg(e.pred_root, e.truth_root, "sequence " + std::to_string(e.index) + " (" + e.gait + ")"));
    }
  }

  std::ifstream in(out / "metrics.csv", std::ios::binary);
  std::stringstream back;
  back << in.rdbuf();
  if (back.str() != csv) throw ValidationError("metrics.csv did not read back identically");
  return r;
}

std::string trajectory_svg(const std::vector<Vec3>& pred, const std::vector<Vec3>& truth, const std::string& title) {
  double xmin = 0, xmax = 0, zmin = 0, zmax = 0;
  bool first = true;
  for (const auto* path : {&pred, &truth}) {
    for (const Vec3& p : *path) {
      if (!std::isfinite(p.x()) || !std::isfinite(p.z())) continue;
      if (first) {
        xmin = xmax = p.x();
        zmin = zmax = p.z();
        first = false;
      }
      xmin = std::min(xmin, p.x());
      xmax = std::max(xmax, p.x());
      zmin = std::min(zmin, p.z());
      zmax = std::max(zmax, p.z());
    }
  }
  // Square window in meters, at least 1 m wide, whole-meter grid.
  const double span = std::max({xmax - xmin, zmax - zmin, 1.0}) * 1.1;
  const double cx = 0.5 * (xmin + xmax), cz = 0.5 * (zmin + zmax);
  const double x0 = cx - span / 2, z0 = cz - span / 2;
  const double size = 480, margin = 60;
  auto sx = [&](double x) { return margin + (x - x0) / span * size; };
  auto sz = [&](double z) { return margin + size - (z - z0) / span * size; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n";
  s << "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n";
  s << "<text x=\"300\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" << title
    << "</text>\n";
  const double step = span > 10 ? 2.0 : (span > 4 ? 1.0 : 0.5);
  for (double g = std::ceil(x0 / step) * step; g <= x0 + span; g += step) {
    s << "<line x1=\"" << num(sx(g), 2) << "\" y1=\"" << margin << "\" x2=\"" << num(sx(g), 2) << "\" y2=\""
      << margin + size << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << num(sx(g), 2) << "\" y=\"" << margin + size + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(g, 1) << "</text>\n";
  }
  for (double g = std::ceil(z0 / step) * step; g <= z0 + span; g += step) {
    s << "<line x1=\"" << margin << "\" y1=\"" << num(sz(g), 2) << "\" x2=\"" << margin + size << "\" y2=\""
      << num(sz(g), 2) << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << margin - 8 << "\" y=\"" << num(sz(g) + 4, 2)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(g, 1) << "</text>\n";
  }
  s << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size << "\" height=\"" << size
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"300\" y=\"590\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">x (m)</text>\n";
  s << "<text x=\"16\" y=\"300\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
       "transform=\"rotate(-90 16 300)\">z (m)</text>\n";
  auto polyline = [&](const std::vector<Vec3>& path, const char* color) {
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const Vec3& p : path) {
      if (std::isfinite(p.x()) && std::isfinite(p.z())) s << num(sx(p.x()), 2) << "," << num(sz(p.z()), 2) << " ";
    }
    s << "\"/>\n";
  };
  polyline(truth, "black");
  polyline(pred, "#d62728");
  s << "<text x=\"" << margin + 10 << "\" y=\"" << margin + 20
    << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">truth</text>\n";
  s << "<text x=\"" << margin + 10 << "\" y=\"" << margin + 36
    << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\">prediction</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace whamkit::app
