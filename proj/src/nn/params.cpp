#include "whamkit/nn/params.h"

#include "whamkit/core/error.h"
#include "whamkit/core/random.h"

#include <cmath>

namespace whamkit::nn {

void check_finite(const Tensor2& t, const std::string& what) {
  if (!t.allFinite()) throw NumericError("non-finite value in " + what);
}

int ParamStore::add(const std::string& name, const std::string& group, Eigen::Index rows,
                    Eigen::Index cols) {
  if (find(name) >= 0) throw InvalidInput("duplicate parameter block '" + name + "'");
  if (rows <= 0 || cols <= 0) throw InvalidInput("parameter block '" + name + "' has no entries");
  Block b{name, group, values_.size(), rows, cols};
  const Eigen::Index old = values_.size();
  values_.conservativeResize(old + b.size());
  values_.segment(old, b.size()).setZero();
  blocks_.push_back(b);
  return static_cast<int>(blocks_.size()) - 1;
}

int ParamStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

ParamStore::MatrixMap ParamStore::view(int id) {
  const Block& b = block(id);
  return MatrixMap(values_.data() + b.offset, b.rows, b.cols);
}

ParamStore::ConstMatrixMap ParamStore::view(int id) const {
  const Block& b = block(id);
  return ConstMatrixMap(values_.data() + b.offset, b.rows, b.cols);
}

void ParamStore::init_uniform(int id, double bound, std::uint64_t seed) {
  Rng rng(seed);
  auto m = view(id);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -bound, bound);
}

}  // namespace whamkit::nn
