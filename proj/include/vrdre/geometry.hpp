#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace vrdre {

// Axis-aligned box in the normalized coordinate space [0, 1000].
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool operator==(const BBox&) const = default;

  bool valid() const {
    return 0 <= x0 && x0 <= x1 && x1 <= 1000 && 0 <= y0 && y0 <= y1 &&
           y1 <= 1000;
  }

  // Containment with the given slack on every side.
  bool contains(const BBox& inner, int tol = 0) const {
    return inner.x0 >= x0 - tol && inner.y0 >= y0 - tol &&
           inner.x1 <= x1 + tol && inner.y1 <= y1 + tol;
  }
};

inline int normalize_coord(double raw, double page_extent) {
  double scaled = std::round(raw * 1000.0 / page_extent);
  return static_cast<int>(std::clamp(scaled, 0.0, 1000.0));
}

inline BBox normalize_box(double x0, double y0, double x1, double y1,
                          double page_w, double page_h) {
  BBox b;
  b.x0 = normalize_coord(std::min(x0, x1), page_w);
  b.x1 = normalize_coord(std::max(x0, x1), page_w);
  b.y0 = normalize_coord(std::min(y0, y1), page_h);
  b.y1 = normalize_coord(std::max(y0, y1), page_h);
  return b;
}

}  // namespace vrdre
