#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace vrdre {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Named parameter tensor with its gradient accumulator.
struct Param {
  std::string name;
  Matrix v;
  Matrix g;

  Param() = default;
  Param(std::string n, int rows, int cols)
      : name(std::move(n)), v(Matrix::Zero(rows, cols)),
        g(Matrix::Zero(rows, cols)) {}

  void zero_grad() { g.setZero(); }
  Eigen::Index size() const { return v.size(); }
};

using ParamVisitor = std::function<void(Param&)>;

inline void init_uniform_fanin(Param& p, std::mt19937_64& rng, int fan_in) {
  const double bound = 1.0 / std::sqrt(double(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < p.v.size(); ++i) p.v.data()[i] = dist(rng);
}

}  // namespace vrdre
