#include "whamkit/model/output.h"

#include "whamkit/core/error.h"

#include <fstream>
#include <span>
#include <string>

namespace whamkit::model {

namespace {

Vec3 row_vec3(const Tensor2& m, Eigen::Index i) { return Vec3(m(i, 0), m(i, 1), m(i, 2)); }

Json numbers(const double* p, int n) {
  Json a = Json::array();
  for (int i = 0; i < n; ++i) a.push_back(p[i]);
  return a;
}

Json rotation_json(const Rotation& r) {
  Json a = Json::array();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a.push_back(r(i, j));
  return a;
}

Rotation json_rotation(const Json& obj, const char* key) {
  const auto v = json_numbers(obj, key, 9);
  Rotation r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = v[static_cast<std::size_t>(3 * i + j)];
  return r;
}

Vec3 json_vec3(const Json& obj, const char* key) {
  const auto v = json_numbers(obj, key, 3);
  return Vec3(v[0], v[1], v[2]);
}

}  // namespace

Points3 WhamOutput::camera_landmarks(int t) const {
  const auto ts = static_cast<std::size_t>(t);
  Points3 p = local.at(ts).positions * gamma_cam.at(ts).transpose();
  p.rowwise() += cam.at(ts).transpose();
  return p;
}

body::MotionSequence WhamOutput::world_motion() const {
  body::MotionSequence m;
  m.fps = fps;
  m.local = local;
  m.gamma = gamma;
  m.tau = tau;
  m.contact = contact;
  return m;
}

WhamOutput extract(const ForwardResult& r, Eigen::Index row, double fps) {
  WhamOutput o;
  o.fps = fps;
  const std::size_t n = r.tau.size();
  for (std::size_t t = 0; t < n; ++t) {
    body::LocalPose pose;
    pose.positions = row_landmarks(r.motion.local[t].value(), row);
    const Tensor2& beta = r.motion.beta[t].value();
    for (int k = 0; k < body::kNumBones; ++k) pose.bone_scale[k] = beta(row, k);
    o.local.push_back(pose);
    body::Contact p{};
    for (int k = 0; k < body::kNumContacts; ++k) p[k] = r.motion.contact[t].value()(row, k);
    o.contact.push_back(p);
    o.cam.push_back(row_vec3(r.motion.cam[t].value(), row));
    o.gamma_cam.push_back(row_rotation(r.motion.gamma_cam[t].value(), row));
    o.gamma0.push_back(row_rotation(r.initial.gamma[t].value(), row));
    o.v0.push_back(row_vec3(r.initial.velocity[t].value(), row));
    o.v_tilde.push_back(row_vec3(r.v_tilde[t].value(), row));
    o.gamma.push_back(row_rotation(r.refined.gamma[t].value(), row));
    o.velocity.push_back(row_vec3(r.refined.velocity[t].value(), row));
    o.tau.push_back(row_vec3(r.tau[t].value(), row));
    o.x3d.push_back(row_landmarks(r.features.x3d[t].value(), row));
  }
  return o;
}

WhamOutput infer(const WhamParams& params, const SequenceData& seq, const ForwardOptions& opt) {
  const SequenceData* one[] = {&seq};
  const Batch batch = make_batch(one);
  nn::Tape tape(&params.store);
  const BoundModel m = bind(tape, params);
  return extract(forward(tape, m, batch, opt), 0, batch.fps);
}

void write_output(std::ostream& out, const WhamOutput& o) {
  write_ndjson_line(out, Json{{"fps", o.fps}, {"frames", o.length()},
                              {"skeleton_version", std::string(body::kSkeletonVersion)}});
  for (int t = 0; t < o.length(); ++t) {
    const auto ts = static_cast<std::size_t>(t);
    Json f;
    f["t"] = t;
    f["local"] = numbers(o.local[ts].positions.data(), 3 * body::kNumLandmarks);
    f["bone_scale"] = numbers(o.local[ts].bone_scale.data(), body::kNumBones);
    f["contact"] = numbers(o.contact[ts].data(), body::kNumContacts);
    f["cam"] = numbers(o.cam[ts].data(), 3);
    f["gamma_cam"] = rotation_json(o.gamma_cam[ts]);
    f["gamma0"] = rotation_json(o.gamma0[ts]);
    f["v0"] = numbers(o.v0[ts].data(), 3);
    f["v_tilde"] = numbers(o.v_tilde[ts].data(), 3);
    f["gamma"] = rotation_json(o.gamma[ts]);
    f["v"] = numbers(o.velocity[ts].data(), 3);
    f["tau"] = numbers(o.tau[ts].data(), 3);
    write_ndjson_line(out, f);
  }
}

WhamOutput read_output(std::istream& in, const std::string& source) {
  const auto lines = read_ndjson(in, source);
  if (lines.empty()) throw FormatError(source + ": missing header");
  const Json& h = lines[0];
  if (!h.contains("fps") || !h.contains("frames")) throw FormatError(source + ": bad header");
  if (h.value("skeleton_version", std::string()) != body::kSkeletonVersion) {
    throw FormatError(source + ": skeleton version mismatch");
  }
  WhamOutput o;
  o.fps = h["fps"].get<double>();
  const int frames = h["frames"].get<int>();
  if (static_cast<int>(lines.size()) != frames + 1) throw FormatError(source + ": frame count mismatch");
  for (int t = 0; t < frames; ++t) {
    const Json& f = lines[static_cast<std::size_t>(t + 1)];
    if (f.value("t", -1) != t) throw FormatError(source + ": frames out of order");
    body::LocalPose pose;
    const auto l = json_numbers(f, "local", 3 * body::kNumLandmarks);
    std::copy(l.begin(), l.end(), pose.positions.data());
    const auto bs = json_numbers(f, "bone_scale", body::kNumBones);
    std::copy(bs.begin(), bs.end(), pose.bone_scale.begin());
    o.local.push_back(pose);
    const auto c = json_numbers(f, "contact", body::kNumContacts);
    body::Contact p{};
    std::copy(c.begin(), c.end(), p.begin());
    o.contact.push_back(p);
    o.cam.push_back(json_vec3(f, "cam"));
    o.gamma_cam.push_back(json_rotation(f, "gamma_cam"));
    o.gamma0.push_back(json_rotation(f, "gamma0"));
    o.v0.push_back(json_vec3(f, "v0"));
    o.v_tilde.push_back(json_vec3(f, "v_tilde"));
    o.gamma.push_back(json_rotation(f, "gamma"));
    o.velocity.push_back(json_vec3(f, "v"));
    o.tau.push_back(json_vec3(f, "tau"));
  }
  return o;
}

void save_output(const std::filesystem::path& path, const WhamOutput& o) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_output(out, o);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace whamkit::model
