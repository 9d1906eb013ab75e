#include "whamkit/nn/checkpoint.h"

#include "whamkit/core/error.h"

#include <bit>
#include <cstring>
#include <fstream>

namespace whamkit::nn {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_doubles(std::ostream& out, const Eigen::VectorXd& v) {
  put(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

template <typename T>
T get(std::istream& in, const std::string& src) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw FormatError(src + ": truncated checkpoint");
  return v;
}

Eigen::VectorXd get_doubles(std::istream& in, const std::string& src) {
  const auto n = get<std::uint64_t>(in, src);
  if (n > (std::uint64_t{1} << 32)) throw FormatError(src + ": implausible vector length");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw FormatError(src + ": truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    put(out, kCheckpointVersion);
    put(out, static_cast<std::uint32_t>(c.dims.size()));
    for (auto d : c.dims) put(out, d);
    put(out, c.epoch);
    put(out, static_cast<std::uint32_t>(c.stage.size()));
    out.write(c.stage.data(), static_cast<std::streamsize>(c.stage.size()));
    put_doubles(out, c.params);
    put(out, static_cast<std::uint8_t>(c.adam ? 1 : 0));
    if (c.adam) {
      put(out, c.adam->step);
      put(out, c.adam->beta1);
      put(out, c.adam->beta2);
      put(out, c.adam->eps);
      put_doubles(out, c.adam->m);
      put_doubles(out, c.adam->v);
    }
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string src = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + src);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw FormatError(src + ": not a checkpoint file");
  }
  const auto version = get<std::uint32_t>(in, src);
  if (version != kCheckpointVersion) {
    throw FormatError(src + ": checkpoint version " + std::to_string(version) +
                      " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint c;
  const auto ndims = get<std::uint32_t>(in, src);
  if (ndims > 64) throw FormatError(src + ": implausible dimension count");
  for (std::uint32_t i = 0; i < ndims; ++i) c.dims.push_back(get<std::uint32_t>(in, src));
  c.epoch = get<std::uint32_t>(in, src);
  const auto slen = get<std::uint32_t>(in, src);
  if (slen > 64) throw FormatError(src + ": implausible stage name");
  c.stage.resize(slen);
  in.read(c.stage.data(), slen);
  if (!in) throw FormatError(src + ": truncated checkpoint");
  c.params = get_doubles(in, src);
  if (get<std::uint8_t>(in, src) != 0) {
    AdamState a;
    a.step = get<std::int64_t>(in, src);
    a.beta1 = get<double>(in, src);
    a.beta2 = get<double>(in, src);
    a.eps = get<double>(in, src);
    a.m = get_doubles(in, src);
    a.v = get_doubles(in, src);
    if (a.m.size() != c.params.size() || a.v.size() != c.params.size()) {
      throw FormatError(src + ": optimizer state does not match parameter count");
    }
    c.adam = a;
  }
  return c;
}

}  // namespace whamkit::nn
