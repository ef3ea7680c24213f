#pragma once
// Tabletop and the L-shaped corner obstacle. All regions are axis-aligned
// rectangles in the table plane (z = 0 is the table surface).

#include <algorithm>
#include <cmath>
#include <vector>

#include "fbench/geometry.hpp"

namespace fbench {

struct Rect {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;

  bool contains(double x, double y) const { return x >= xmin && x <= xmax && y >= ymin && y <= ymax; }

  bool contains(const Rect& r) const {
    return r.xmin >= xmin && r.xmax <= xmax && r.ymin >= ymin && r.ymax <= ymax;
  }

  /// Euclidean distance from a point to the rectangle (0 inside).
  double distance(double x, double y) const {
    const double dx = std::max({xmin - x, 0.0, x - xmax});
    const double dy = std::max({ymin - y, 0.0, y - ymax});
    return std::hypot(dx, dy);
  }

  bool operator==(const Rect&) const = default;
};

struct Workspace {
  Rect table;
  std::vector<Rect> walls;  // obstacle wall segments
  double table_height = 0.0;

  bool circle_in_table(double x, double y, double r) const {
    return x - r >= table.xmin && x + r <= table.xmax && y - r >= table.ymin && y + r <= table.ymax;
  }

  /// True when the footprint circle intersects any wall.
  bool circle_hits_wall(double x, double y, double r) const {
    return std::any_of(walls.begin(), walls.end(), [&](const Rect& w) { return w.distance(x, y) < r; });
  }

  /// Inner corner point formed by the two walls.
  Vec3 corner() const { return {walls.at(1).xmin, walls.at(0).ymin, table_height}; }

  bool operator==(const Workspace&) const = default;
};

/// 0.70 m x 0.60 m table with the corner obstacle in the +x/+y corner.
inline Workspace default_workspace() {
  Workspace ws;
  ws.table = {-0.35, 0.35, -0.30, 0.30};
  ws.walls = {
      {0.10, 0.35, 0.27, 0.30},  // along x, at the far edge
      {0.32, 0.35, 0.05, 0.30},  // along y, at the right edge
  };
  return ws;
}

}  // namespace fbench
