#include "whamkit/synth/dataset.h"

#include "whamkit/body/contact.h"
#include "whamkit/body/gait.h"
#include "whamkit/body/io.h"
#include "whamkit/body/resample.h"
#include "whamkit/core/error.h"
#include "whamkit/core/parallel.h"
#include "whamkit/core/random.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace whamkit::synth {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little, "feature files assume a little-endian host");

constexpr body::GaitKind kGaitOrder[] = {body::GaitKind::kWalk, body::GaitKind::kTurn,
                                         body::GaitKind::kStairs, body::GaitKind::kStand};

fs::path seq_path(const fs::path& dir, int k, const char* suffix) {
  return dir / ("seq_" + std::to_string(k) + suffix);
}

std::ifstream open_in(const fs::path& p, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(p, mode);
  if (!in) throw IoError("cannot open " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(p, mode);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

std::vector<double> mat_row_major(const Rotation& r) {
  std::vector<double> v(9);
  for (int i = 0; i < 9; ++i) v[static_cast<std::size_t>(i)] = r(i / 3, i % 3);
  return v;
}

std::vector<double> vec3(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

body::GaitKind pick_gait(const SynthConfig& cfg, Rng& rng) {
  double total = 0.0;
  for (double m : cfg.gait_mix) total += m;
  const double u = uniform(rng, 0.0, total);
  double acc = 0.0;
  for (std::size_t i = 0; i < cfg.gait_mix.size(); ++i) {
    acc += cfg.gait_mix[i];
    if (u < acc && cfg.gait_mix[i] > 0.0) return kGaitOrder[i];
  }
  for (std::size_t i = cfg.gait_mix.size(); i-- > 0;) {
    if (cfg.gait_mix[i] > 0.0) return kGaitOrder[i];
  }
  return body::GaitKind::kWalk;
}

}  // namespace

Json Manifest::to_json() const {
  return Json{{"config", config},       {"config_hash", config_hash}, {"seed", seed},
              {"count", count},         {"feature_dim", feature_dim}, {"gaits", gaits},
              {"split", {{"train", train}, {"val", val}, {"test", test}}}};
}

Manifest Manifest::from_json(const Json& j) {
  try {
    Manifest m;
    m.config = j.at("config");
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.count = j.at("count").get<int>();
    m.feature_dim = j.at("feature_dim").get<int>();
    m.gaits = j.at("gaits").get<std::vector<std::string>>();
    m.train = j.at("split").at("train").get<std::vector<int>>();
    m.val = j.at("split").at("val").get<std::vector<int>>();
    m.test = j.at("split").at("test").get<std::vector<int>>();
    if (synth::config_hash(m.config) != m.config_hash) throw FormatError("manifest: config hash mismatch");
    if (m.train.size() + m.val.size() + m.test.size() != static_cast<std::size_t>(m.count)) {
      throw FormatError("manifest: split sizes do not add up to count");
    }
    return m;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

const std::vector<int>& Manifest::split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "val") return val;
  if (name == "test") return test;
  throw InvalidInput("unknown split '" + name + "' (expected train, val or test)");
}

Json config_to_json(const SynthConfig& c) {
  const CameraConfig& k = c.camera;
  return Json{
      {"sequence_length", c.sequence_length},
      {"fps", c.fps},
      {"pixel_noise", c.pixel_noise},
      {"mask_prob", c.mask_prob},
      {"bbox_margin", c.bbox_margin},
      {"speed_min", c.speed_min},
      {"speed_max", c.speed_max},
      {"bone_scale_std", c.bone_scale_std},
      {"feature_dim", c.feature_dim},
      {"feature_noise", c.feature_noise},
      {"focal", c.focal},
      {"image_width", c.image_width},
      {"image_height", c.image_height},
      {"gait_mix", c.gait_mix},
      {"camera",
       {{"roll_mean", k.roll_mean},
        {"roll_std", k.roll_std},
        {"pitch_mean", k.pitch_mean},
        {"pitch_std", k.pitch_std},
        {"depth_min", k.depth_min},
        {"depth_max", k.depth_max},
        {"lateral_std", k.lateral_std},
        {"end_yaw_std", k.end_yaw_std},
        {"end_roll_std", k.end_roll_std},
        {"end_pitch_std", k.end_pitch_std},
        {"end_translation_std", k.end_translation_std},
        {"timestamp_noise", k.timestamp_noise},
        {"min_landmark_depth", k.min_landmark_depth},
        {"max_attempts", k.max_attempts}}}};
}

SynthConfig config_from_json(const Json& j) {
  SynthConfig c;
  try {
    c.sequence_length = j.at("sequence_length").get<int>();
    c.fps = j.at("fps").get<double>();
    c.pixel_noise = j.at("pixel_noise").get<double>();
    c.mask_prob = j.at("mask_prob").get<double>();
    c.bbox_margin = j.at("bbox_margin").get<double>();
    c.speed_min = j.at("speed_min").get<double>();
    c.speed_max = j.at("speed_max").get<double>();
    c.bone_scale_std = j.at("bone_scale_std").get<double>();
    c.feature_dim = j.at("feature_dim").get<int>();
    c.feature_noise = j.at("feature_noise").get<double>();
    c.focal = j.at("focal").get<double>();
    c.image_width = j.at("image_width").get<double>();
    c.image_height = j.at("image_height").get<double>();
    c.gait_mix = j.at("gait_mix").get<std::array<double, 4>>();
    const Json& k = j.at("camera");
    CameraConfig& m = c.camera;
    m.roll_mean = k.at("roll_mean").get<double>();
    m.roll_std = k.at("roll_std").get<double>();
    m.pitch_mean = k.at("pitch_mean").get<double>();
    m.pitch_std = k.at("pitch_std").get<double>();
    m.depth_min = k.at("depth_min").get<double>();
    m.depth_max = k.at("depth_max").get<double>();
    m.lateral_std = k.at("lateral_std").get<double>();
    m.end_yaw_std = k.at("end_yaw_std").get<double>();
    m.end_roll_std = k.at("end_roll_std").get<double>();
    m.end_pitch_std = k.at("end_pitch_std").get<double>();
    m.end_translation_std = k.at("end_translation_std").get<double>();
    m.timestamp_noise = k.at("timestamp_noise").get<double>();
    m.min_landmark_depth = k.at("min_landmark_depth").get<double>();
    m.max_attempts = k.at("max_attempts").get<int>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("synth config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string config_hash(const Json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Sample generate_sample(const SynthConfig& cfg, std::uint64_t seed, int index,
                       const FeatureEncoder& encoder) {
  const std::uint64_t base = derive_seed(seed, static_cast<std::uint64_t>(index) + 1000);
  Rng rng(derive_seed(base, 0));

  const body::GaitKind kind = pick_gait(cfg, rng);
  const double factor = uniform(rng, cfg.speed_min, cfg.speed_max);
  body::GaitConfig gait_cfg;
  for (double& s : gait_cfg.bone_scale) s = std::exp(normal(rng, 0.0, cfg.bone_scale_std));
  const double hips = 0.5 * (gait_cfg.bone_scale[body::kLeftHip] + gait_cfg.bone_scale[body::kRightHip]);
  gait_cfg.bone_scale[body::kLeftHip] = gait_cfg.bone_scale[body::kRightHip] = hips;
  const double yaw = uniform(rng, 0.0, 2.0 * std::numbers::pi);

  const int length = cfg.sequence_length;
  const int raw_frames = static_cast<int>(std::ceil(length * factor)) + 2;
  body::MotionSequence motion =
      body::generate_gait(kind, raw_frames, cfg.fps, derive_seed(base, 1), gait_cfg);
  motion = body::resample_speed(motion, factor);
  motion = body::slice_frames(motion, 0, length);
  motion = apply_root_yaw(motion, yaw);
  motion.contact = body::generate_contact_labels(motion);

  Sample s;
  s.gait = std::string(body::gait_name(kind));
  s.camera = synth_camera(motion, cfg.pinhole(), derive_seed(base, 2), cfg.camera);
  s.keypoints = synth_keypoints(motion, s.camera, cfg, derive_seed(base, 3));
  s.features = encoder.encode(motion, cfg.feature_noise, derive_seed(base, 4));
  s.motion = std::move(motion);
  return s;
}

FeatureEncoder dataset_encoder(const Manifest& m) { return FeatureEncoder(m.feature_dim, derive_seed(m.seed, 0xfea7)); }

Sample redraw_view(const Sample& s, const SynthConfig& cfg, const FeatureEncoder& encoder, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  Sample out;
  out.gait = s.gait;
  out.motion = apply_root_yaw(s.motion, uniform(rng, 0.0, 2.0 * std::numbers::pi));
  out.motion.contact = s.motion.contact;
  out.camera = synth_camera(out.motion, cfg.pinhole(), derive_seed(seed, 2), cfg.camera);
  out.keypoints = synth_keypoints(out.motion, out.camera, cfg, derive_seed(seed, 3));
  out.features = encoder.encode(out.motion, cfg.feature_noise, derive_seed(seed, 4));
  return out;
}

void assign_splits(Manifest& m) {
  std::vector<int> order(static_cast<std::size_t>(m.count));
  for (int i = 0; i < m.count; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(derive_seed(m.seed, 0x5eed));
  // Fisher-Yates with our own index draws keeps the permutation identical
  // across standard library implementations.
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::lround(0.70 * m.count));
  const auto n_val = static_cast<std::size_t>(std::lround(0.15 * m.count));
  m.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  m.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  m.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  for (auto* v : {&m.train, &m.val, &m.test}) std::sort(v->begin(), v->end());
}

Manifest write_dataset(const fs::path& dir, const SynthConfig& cfg, int count, std::uint64_t seed) {
  cfg.validate();
  if (count < 0) throw InvalidInput("write_dataset: count must be >= 0");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create dataset directory " + dir.string());

  Manifest m;
  m.config = config_to_json(cfg);
  m.config_hash = synth::config_hash(m.config);
  m.seed = seed;
  m.count = count;
  m.feature_dim = cfg.feature_dim;
  m.gaits.resize(static_cast<std::size_t>(count));
  const FeatureEncoder encoder = dataset_encoder(m);
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t k) {
    const Sample s = generate_sample(cfg, seed, static_cast<int>(k), encoder);
    save_sample(dir, static_cast<int>(k), s);
    m.gaits[k] = s.gait;
  });
  assign_splits(m);
  auto out = open_out(dir / "manifest.json");
  out << m.to_json().dump(2) << '\n';
  if (!out) throw IoError("write failed for manifest.json");
  return m;
}

Manifest read_manifest(const fs::path& dir) {
  auto in = open_in(dir / "manifest.json");
  try {
    return Manifest::from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw FormatError((dir / "manifest.json").string() + ": " + e.what());
  }
}

void save_sample(const fs::path& dir, int k, const Sample& s) {
  body::save_motion(seq_path(dir, k, ".ndjson"), s.motion);
  {
    auto out = open_out(seq_path(dir, k, ".cam.ndjson"));
    write_camera(out, s.camera);
  }
  {
    auto out = open_out(seq_path(dir, k, ".kp2d.ndjson"));
    write_keypoints(out, s.keypoints);
  }
  write_features(seq_path(dir, k, ".feat.bin"), s.features);
}

Sample load_sample(const fs::path& dir, int k, const Manifest& m) {
  if (k < 0 || k >= m.count) throw IndexError("load_sample: index out of range");
  Sample s;
  s.gait = m.gaits.at(static_cast<std::size_t>(k));
  s.motion = body::load_motion(seq_path(dir, k, ".ndjson"));
  {
    const auto p = seq_path(dir, k, ".cam.ndjson");
    auto in = open_in(p);
    s.camera = read_camera(in, p.string());
  }
  {
    const auto p = seq_path(dir, k, ".kp2d.ndjson");
    auto in = open_in(p);
    s.keypoints = read_keypoints(in, p.string());
  }
  s.features = read_features(seq_path(dir, k, ".feat.bin"), m.feature_dim);
  const int n = s.motion.length();
  if (s.camera.length() != n || s.keypoints.length() != n || s.features.rows() != n) {
    throw FormatError("sequence " + std::to_string(k) + ": files disagree on frame count");
  }
  return s;
}

void write_camera(std::ostream& out, const CameraTrajectory& c) {
  const auto& p = c.intrinsics;
  write_ndjson_line(out, Json{{"fps", c.fps}, {"f", p.focal}, {"w", p.width}, {"h", p.height},
                              {"cx", p.cx}, {"cy", p.cy}});
  for (int t = 0; t < c.length(); ++t) {
    const auto i = static_cast<std::size_t>(t);
    write_ndjson_line(out, Json{{"t", t},
                                {"R", mat_row_major(c.rotation[i])},
                                {"T", vec3(c.translation[i])},
                                {"omega", vec3(c.omega[i])}});
  }
}

CameraTrajectory read_camera(std::istream& in, const std::string& source) {
  const auto lines = read_ndjson(in, source);
  if (lines.empty()) throw FormatError(source + ": empty camera file");
  try {
    const Json& h = lines.front();
    geom::Pinhole pin{h.at("f").get<double>(), h.at("w").get<double>(), h.at("h").get<double>(),
                      h.at("cx").get<double>(), h.at("cy").get<double>()};
    std::vector<Rotation> rot;
    std::vector<Vec3> trans;
    for (std::size_t k = 1; k < lines.size(); ++k) {
      const auto r = json_numbers(lines[k], "R", 9);
      const auto t = json_numbers(lines[k], "T", 3);
      Rotation m;
      for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = r[static_cast<std::size_t>(i)];
      rot.push_back(m);
      trans.emplace_back(t[0], t[1], t[2]);
    }
    return CameraTrajectory::from_extrinsics(h.at("fps").get<double>(), pin, std::move(rot),
                                             std::move(trans));
  } catch (const Json::exception& e) {
    throw FormatError(source + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw FormatError(source + ": " + e.what());
  }
}

void write_keypoints(std::ostream& out, const KeypointSequence2D& kp) {
  write_ndjson_line(out, Json{{"w", kp.image_width}, {"h", kp.image_height},
                              {"joints", body::kNumKeypoints2D}});
  for (int t = 0; t < kp.length(); ++t) {
    const auto i = static_cast<std::size_t>(t);
    std::vector<double> flat(2 * body::kNumKeypoints2D);
    for (int j = 0; j < body::kNumKeypoints2D; ++j) {
      flat[static_cast<std::size_t>(2 * j)] = kp.keypoints[i](j, 0);
      flat[static_cast<std::size_t>(2 * j + 1)] = kp.keypoints[i](j, 1);
    }
    std::vector<int> mask(kp.mask[i].begin(), kp.mask[i].end());
    write_ndjson_line(out, Json{{"t", t},
                                {"kp", flat},
                                {"mask", mask},
                                {"center", {kp.center[i].x(), kp.center[i].y()}},
                                {"scale", kp.scale[i]},
                                {"carried", kp.carried[i] != 0}});
  }
}

KeypointSequence2D read_keypoints(std::istream& in, const std::string& source) {
  const auto lines = read_ndjson(in, source);
  if (lines.empty()) throw FormatError(source + ": empty keypoint file");
  KeypointSequence2D kp;
  try {
    kp.image_width = lines.front().at("w").get<double>();
    kp.image_height = lines.front().at("h").get<double>();
    for (std::size_t k = 1; k < lines.size(); ++k) {
      const Json& f = lines[k];
      const auto flat = json_numbers(f, "kp", 2 * body::kNumKeypoints2D);
      const auto mask = json_numbers(f, "mask", body::kNumKeypoints2D);
      const auto center = json_numbers(f, "center", 2);
      Keypoints2D m;
      VisibilityMask v{};
      for (int j = 0; j < body::kNumKeypoints2D; ++j) {
        m(j, 0) = flat[static_cast<std::size_t>(2 * j)];
        m(j, 1) = flat[static_cast<std::size_t>(2 * j + 1)];
        v[static_cast<std::size_t>(j)] = mask[static_cast<std::size_t>(j)] != 0.0 ? 1 : 0;
      }
      kp.keypoints.push_back(m);
      kp.mask.push_back(v);
      kp.center.emplace_back(center[0], center[1]);
      kp.scale.push_back(f.at("scale").get<double>());
      kp.carried.push_back(f.at("carried").get<bool>() ? 1 : 0);
    }
    kp.validate();
  } catch (const Json::exception& e) {
    throw FormatError(source + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw FormatError(source + ": " + e.what());
  }
  return kp;
}

void write_features(const fs::path& path, const FeatureRows& rows) {
  std::vector<float> buf(static_cast<std::size_t>(rows.size()));
  for (Eigen::Index i = 0; i < rows.size(); ++i) {
    buf[static_cast<std::size_t>(i)] = static_cast<float>(rows.data()[i]);
  }
  auto out = open_out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw IoError("write failed for " + path.string());
}

FeatureRows read_features(const fs::path& path, int dim) {
  if (dim < 1) throw InvalidInput("read_features: dim must be >= 1");
  auto in = open_in(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t row_bytes = static_cast<std::size_t>(dim) * sizeof(float);
  if (bytes.size() % row_bytes != 0) {
    throw FormatError(path.string() + ": size is not a whole number of rows");
  }
  const auto n = static_cast<Eigen::Index>(bytes.size() / row_bytes);
  FeatureRows rows(n, dim);
  for (Eigen::Index i = 0; i < rows.size(); ++i) {
    float v;
    std::memcpy(&v, bytes.data() + static_cast<std::size_t>(i) * sizeof(float), sizeof v);
    rows.data()[i] = v;
  }
  return rows;
}

}  // namespace whamkit::synth
