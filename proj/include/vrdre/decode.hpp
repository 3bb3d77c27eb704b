#pragma once

#include <algorithm>

#include "vrdre/errors.hpp"
#include "vrdre/relation_matrix.hpp"

namespace vrdre {

inline RelationMatrix threshold_decode(const ProbMatrix& p,
                                       double threshold = 0.5) {
  RelationMatrix r(p.n);
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j)
      if (p.valid(i, j) && p.at(i, j) > threshold) r.set(i, j, 1);
  return r;
}

// Restriction on the selection of fathers: keep parent j for child i iff
// P[i][j] > 0.5 and max_k P[i][k] < P[i][j] + tau. Strict inequalities, so
// tau = 0 would always produce the empty prediction and is rejected.
inline RelationMatrix rsf_decode(const ProbMatrix& p, double tau) {
  if (!(tau > 0)) throw ConfigError("rsf margin tau must be > 0");
  RelationMatrix r(p.n);
  for (int i = 0; i < p.n; ++i) {
    double row_max = -1.0;
    for (int j = 0; j < p.n; ++j)
      if (p.valid(i, j)) row_max = std::max(row_max, p.at(i, j));
    for (int j = 0; j < p.n; ++j)
      if (p.valid(i, j) && p.at(i, j) > 0.5 && row_max < p.at(i, j) + tau)
        r.set(i, j, 1);
  }
  return r;
}

// Symmetric view for GROUP-kind evaluation: both directions take the max.
inline ProbMatrix symmetrize(const ProbMatrix& p) {
  ProbMatrix out = p;
  for (int i = 0; i < p.n; ++i) {
    for (int j = i + 1; j < p.n; ++j) {
      if (!p.valid(i, j) || !p.valid(j, i)) continue;
      const double m = std::max(p.at(i, j), p.at(j, i));
      out.set(i, j, m);
      out.set(j, i, m);
    }
  }
  return out;
}

}  // namespace vrdre
