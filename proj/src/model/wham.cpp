#include "whamkit/model/wham.h"

#include "whamkit/core/error.h"
#include "whamkit/core/random.h"

namespace whamkit::model {

void ModelDims::validate() const {
  if (hidden < 1 || feature < 1 || integrator_hidden < 1 || init_hidden < 1) {
    throw InvalidInput("model dims must be positive");
  }
}

std::vector<std::uint32_t> ModelDims::to_vector() const {
  return {static_cast<std::uint32_t>(kInputDim), static_cast<std::uint32_t>(hidden),
          static_cast<std::uint32_t>(feature), static_cast<std::uint32_t>(integrator_hidden),
          static_cast<std::uint32_t>(init_hidden)};
}

ModelDims ModelDims::from_vector(const std::vector<std::uint32_t>& v) {
  if (v.size() != 5 || v[0] != static_cast<std::uint32_t>(kInputDim)) {
    throw FormatError("checkpoint dims do not describe this model");
  }
  ModelDims d;
  d.hidden = static_cast<int>(v[1]);
  d.feature = static_cast<int>(v[2]);
  d.integrator_hidden = static_cast<int>(v[3]);
  d.init_hidden = static_cast<int>(v[4]);
  d.validate();
  return d;
}

WhamParams WhamParams::zeros(const ModelDims& dims) {
  dims.validate();
  WhamParams p;
  p.dims = dims;
  const int h = dims.hidden;
  auto& s = p.store;
  p.encoder = nn::GruLayer::create(s, "encoder.gru", kGroupEncoder, kInputDim, h);
  p.cascade_head = nn::LinearLayer::create(s, "encoder.head", kGroupEncoder, h, kPoseDim);
  p.integrator = nn::DenseStack::create(s, "integrator", kGroupIntegrator,
                                        {h + dims.feature, dims.integrator_hidden, h});
  p.motion_decoder = nn::GruLayer::create(s, "motion.gru", kGroupMotion, h, h);
  p.motion_head = nn::LinearLayer::create(s, "motion.head", kGroupMotion, h, kMotionHeadDim);
  p.trajectory_decoder = nn::GruLayer::create(s, "trajectory.gru", kGroupTrajectory, h + 3, h);
  p.trajectory_head = nn::LinearLayer::create(s, "trajectory.head", kGroupTrajectory, h, kTrajHeadDim);
  p.refiner = nn::GruLayer::create(s, "refiner.gru", kGroupRefiner, h + 6 + 3, h);
  p.refiner_head = nn::LinearLayer::create(s, "refiner.head", kGroupRefiner, h, kTrajHeadDim);
  p.init_net = nn::DenseStack::create(s, "init", kGroupInit, {kPoseDim, dims.init_hidden, 2 * h});
  return p;
}

WhamParams WhamParams::create(const ModelDims& dims, std::uint64_t seed) {
  WhamParams p = zeros(dims);
  auto& s = p.store;
  p.encoder.init(s, derive_seed(seed, 1));
  p.cascade_head.init(s, derive_seed(seed, 2));
  p.integrator.init(s, derive_seed(seed, 3));
  p.motion_decoder.init(s, derive_seed(seed, 4));
  p.motion_head.init(s, derive_seed(seed, 5));
  p.trajectory_decoder.init(s, derive_seed(seed, 6));
  p.trajectory_head.init(s, derive_seed(seed, 7));
  p.refiner.init(s, derive_seed(seed, 8));
  p.init_net.init(s, derive_seed(seed, 9));

  for (const nn::LinearLayer* l : {&p.integrator.layers.back(), &p.refiner_head, &p.init_net.layers.back()}) {
    s.view(l->weight).setZero();
    s.view(l->bias).setZero();
  }
  return p;
}

void WhamParams::zero_group(const std::string& group) {
  for (int i = 0; i < static_cast<int>(store.blocks().size()); ++i) {
    if (store.block(i).group == group) store.view(i).setZero();
  }
}

}  // namespace whamkit::model
