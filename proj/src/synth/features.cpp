#include "whamkit/synth/features.h"

#include "whamkit/core/error.h"
#include "whamkit/core/random.h"

#include <cmath>

namespace whamkit::synth {

namespace {

constexpr int kPoseDim = 3 * body::kNumLandmarks;

Eigen::Map<const Eigen::Matrix<double, kPoseDim, 1>> flatten(const body::Landmarks& l) {
  // Landmarks are row-major, so the raw buffer is landmark-major (x0 y0 z0 x1 ...).
  return Eigen::Map<const Eigen::Matrix<double, kPoseDim, 1>>(l.data());
}

}  // namespace

FeatureEncoder::FeatureEncoder(int dim, std::uint64_t seed) {
  if (dim < 1) throw InvalidInput("FeatureEncoder: dim must be >= 1");
  Rng rng(seed);
  matrix_.resize(dim, kPoseDim);
  const double sd = 1.0 / std::sqrt(static_cast<double>(kPoseDim));
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < kPoseDim; ++c) matrix_(r, c) = normal(rng, 0.0, sd);
  }
}

Eigen::VectorXd FeatureEncoder::encode(const body::LocalPose& pose) const {
  return matrix_ * flatten(pose.positions);
}

FeatureRows FeatureEncoder::encode(const body::MotionSequence& seq, double noise_std,
                                   std::uint64_t noise_seed) const {
  if (!(noise_std >= 0.0)) throw InvalidInput("FeatureEncoder: noise_std must be non-negative");
  Rng rng(noise_seed);
  FeatureRows out(seq.length(), dim());
  for (int t = 0; t < seq.length(); ++t) {
    out.row(t) = encode(seq.local[static_cast<std::size_t>(t)]).transpose();
    for (int k = 0; k < dim(); ++k) out(t, k) += normal(rng, 0.0, noise_std);
  }
  return out;
}

FeatureRows synth_visual_features(const body::MotionSequence& seq, int dim, double noise_std,
                                  std::uint64_t seed) {
  const FeatureEncoder enc(dim, derive_seed(seed, 0));
  return enc.encode(seq, noise_std, derive_seed(seed, 1));
}

}  // namespace whamkit::synth
