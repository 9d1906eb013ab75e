#pragma once

#include "whamkit/nn/tensor.h"

#include <cstdint>
#include <string>
#include <vector>

namespace whamkit::nn {

// Every learnable tensor lives in one flat vector; a block is a named
// rows x cols window (row-major) into it. `group` tags the owning network
// stage so optimizers can assign per-stage learning rates.
class ParamStore {
 public:
  struct Block {
    std::string name;
    std::string group;
    Eigen::Index offset = 0;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    Eigen::Index size() const { return rows * cols; }
  };

  using MatrixMap = Eigen::Map<Tensor2>;
  using ConstMatrixMap = Eigen::Map<const Tensor2>;

  // Adds a zero-filled block; throws InvalidInput on a duplicate name.
  int add(const std::string& name, const std::string& group, Eigen::Index rows, Eigen::Index cols);

  int find(const std::string& name) const;  // -1 when absent
  const Block& block(int id) const { return blocks_.at(static_cast<std::size_t>(id)); }
  const std::vector<Block>& blocks() const { return blocks_; }

  MatrixMap view(int id);
  ConstMatrixMap view(int id) const;

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }

  // Uniform(-bound, bound) fill of one block.
  void init_uniform(int id, double bound, std::uint64_t seed);

 private:
  std::vector<Block> blocks_;
  Eigen::VectorXd values_;
};

}  // namespace whamkit::nn
