#include "whamkit/body/io.h"

#include "whamkit/core/error.h"
#include "whamkit/core/ndjson.h"

#include <fstream>

namespace whamkit::body {

void write_motion(std::ostream& out, const MotionSequence& seq) {
  write_ndjson_line(out, Json{{"fps", seq.fps}, {"skeleton_version", std::string(kSkeletonVersion)}});
  for (int t = 0; t < seq.length(); ++t) {
    const auto i = static_cast<std::size_t>(t);
    Json frame;
    frame["t"] = t;
    std::vector<double> g(9), tau(3), local(3 * kNumLandmarks);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) g[static_cast<std::size_t>(3 * r + c)] = seq.gamma[i](r, c);
      tau[static_cast<std::size_t>(r)] = seq.tau[i](r);
    }
    for (int l = 0; l < kNumLandmarks; ++l) {
      for (int c = 0; c < 3; ++c) {
        local[static_cast<std::size_t>(3 * l + c)] = seq.local[i].positions(l, c);
      }
    }
    frame["gamma"] = g;
    frame["tau"] = tau;
    frame["local"] = local;
    frame["contact"] = std::vector<double>(seq.contact[i].begin(), seq.contact[i].end());
    write_ndjson_line(out, frame);
  }
}

MotionSequence read_motion(std::istream& in, const std::string& source) {
  const auto lines = read_ndjson(in, source);
  if (lines.empty()) throw FormatError(source + ": empty motion file");
  const Json& header = lines.front();
  if (!header.contains("skeleton_version") ||
      header.at("skeleton_version").get<std::string>() != kSkeletonVersion) {
    throw FormatError(source + ": unsupported skeleton_version");
  }
  MotionSequence seq;
  seq.fps = header.at("fps").get<double>();
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const Json& f = lines[k];
    if (f.at("t").get<int>() != static_cast<int>(k - 1)) {
      throw FormatError(source + ": frames out of order at line " + std::to_string(k + 1));
    }
    const auto g = json_numbers(f, "gamma", 9);
    const auto tau = json_numbers(f, "tau", 3);
    const auto local = json_numbers(f, "local", 3 * kNumLandmarks);
    const auto contact = json_numbers(f, "contact", kNumContacts);
    Rotation r;
    for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = g[static_cast<std::size_t>(i)];
    Landmarks pos;
    for (int i = 0; i < 3 * kNumLandmarks; ++i) pos(i / 3, i % 3) = local[static_cast<std::size_t>(i)];
    seq.gamma.push_back(r);
    seq.tau.emplace_back(tau[0], tau[1], tau[2]);
    seq.local.push_back(LocalPose::from_positions(pos));
    Contact c{};
    std::copy(contact.begin(), contact.end(), c.begin());
    seq.contact.push_back(c);
  }
  seq.validate();
  return seq;
}

void save_motion(const std::filesystem::path& path, const MotionSequence& seq) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_motion(out, seq);
  if (!out) throw IoError("write failed for " + path.string());
}

MotionSequence load_motion(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_motion(in, path.string());
}

}  // namespace whamkit::body
