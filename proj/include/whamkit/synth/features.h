#pragma once

#include "whamkit/body/motion.h"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace whamkit::synth {

using FeatureRows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Stand-in for image features: a fixed random linear encoding of the local
// pose, phi = A * vec(local) + noise. A has i.i.d. N(0, 1/63) entries drawn
// from `seed`, so one encoder can be shared across a whole dataset.
class FeatureEncoder {
 public:
  FeatureEncoder(int dim, std::uint64_t seed);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  Eigen::VectorXd encode(const body::LocalPose& pose) const;

  // One row per frame; noise ~ N(0, noise_std^2) drawn from noise_seed.
  FeatureRows encode(const body::MotionSequence& seq, double noise_std,
                     std::uint64_t noise_seed) const;

 private:
  Eigen::MatrixXd matrix_;
};

// Encoder and noise both derived from `seed`.
FeatureRows synth_visual_features(const body::MotionSequence& seq, int dim, double noise_std,
                                  std::uint64_t seed);

}  // namespace whamkit::synth
