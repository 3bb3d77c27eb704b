#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace vrdre {

// n x n binary adjacency over entities, rows index children, columns parents.
struct RelationMatrix {
  int n = 0;
  std::vector<uint8_t> cells;  // row-major, n*n

  RelationMatrix() = default;
  explicit RelationMatrix(int n_) : n(n_), cells(size_t(n_) * n_, 0) {}

  uint8_t at(int child, int parent) const {
    return cells[size_t(child) * n + parent];
  }
  void set(int child, int parent, uint8_t v) {
    cells[size_t(child) * n + parent] = v;
  }

  bool operator==(const RelationMatrix&) const = default;

  int count_ones() const {
    int c = 0;
    for (auto v : cells) c += v;
    return c;
  }

  bool symmetric() const {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (at(i, j) != at(j, i)) return false;
    return true;
  }

  bool zero_diagonal() const {
    for (int i = 0; i < n; ++i)
      if (at(i, i)) return false;
    return true;
  }

  // Cellwise subset: every 1 in *this is also 1 in other.
  bool subset_of(const RelationMatrix& other) const {
    if (n != other.n) throw std::invalid_argument("size mismatch");
    for (size_t k = 0; k < cells.size(); ++k)
      if (cells[k] && !other.cells[k]) return false;
    return true;
  }
};

// n x n probabilities P[child][parent] in (0,1); diagonal is never valid.
struct ProbMatrix {
  int n = 0;
  std::vector<double> p;      // row-major
  std::vector<uint8_t> mask;  // 1 = valid cell

  ProbMatrix() = default;
  explicit ProbMatrix(int n_)
      : n(n_), p(size_t(n_) * n_, 0.0), mask(size_t(n_) * n_, 1) {
    for (int i = 0; i < n_; ++i) mask[size_t(i) * n_ + i] = 0;
  }

  double at(int child, int parent) const {
    return p[size_t(child) * n + parent];
  }
  void set(int child, int parent, double v) {
    p[size_t(child) * n + parent] = v;
  }
  bool valid(int child, int parent) const {
    return mask[size_t(child) * n + parent] != 0;
  }
};

}  // namespace vrdre
