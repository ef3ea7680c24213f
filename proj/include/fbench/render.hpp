#pragma once
// Orthographic top-down raster of the table: footprints, walls, EE marker.
// Exists so the image pipeline runs end to end; nothing photometric here.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fbench/catalog.hpp"
#include "fbench/image.hpp"
#include "fbench/world.hpp"

namespace fbench {

using Rgb = std::array<std::uint8_t, 3>;

inline Rgb status_color(PartStatus s) {
  switch (s) {
    case PartStatus::Free: return {200, 160, 90};
    case PartStatus::Grasped: return {90, 160, 220};
    case PartStatus::Inserted: return {220, 200, 60};
    case PartStatus::Assembled: return {80, 190, 100};
  }
  return {255, 0, 255};
}

inline Image render_top_down(const WorldState& w, const AssemblyGraph& g, const Workspace& ws = default_workspace(),
                             int width = 1280, int height = 720) {
  Image img(width, height, 30);
  const double margin = 0.04;
  const double sx = width / (ws.table.xmax - ws.table.xmin + 2 * margin);
  const double sy = height / (ws.table.ymax - ws.table.ymin + 2 * margin);
  const double s = std::min(sx, sy);
  const double cx = 0.5 * (ws.table.xmin + ws.table.xmax), cy = 0.5 * (ws.table.ymin + ws.table.ymax);
  auto px = [&](double x) { return 0.5 * width + (x - cx) * s; };
  auto py = [&](double y) { return 0.5 * height - (y - cy) * s; };  // +y is up in the image
  auto fill_rect = [&](const Rect& r, Rgb c) {
    const int x0 = std::max(0, static_cast<int>(px(r.xmin))), x1 = std::min(width, static_cast<int>(px(r.xmax)));
    const int y0 = std::max(0, static_cast<int>(py(r.ymax))), y1 = std::min(height, static_cast<int>(py(r.ymin)));
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x)
        for (int k = 0; k < 3; ++k) img.at(x, y, k) = c[k];
  };
  auto fill_circle = [&](double x, double y, double r, Rgb c) {
    const double u = px(x), v = py(y), rr = r * s;
    for (int yy = std::max(0, static_cast<int>(v - rr)); yy < std::min(height, static_cast<int>(v + rr) + 1); ++yy)
      for (int xx = std::max(0, static_cast<int>(u - rr)); xx < std::min(width, static_cast<int>(u + rr) + 1); ++xx)
        if ((xx + 0.5 - u) * (xx + 0.5 - u) + (yy + 0.5 - v) * (yy + 0.5 - v) <= rr * rr)
          for (int k = 0; k < 3; ++k) img.at(xx, yy, k) = c[k];
  };
  fill_rect(ws.table, {150, 150, 150});
  for (const Rect& r : ws.walls) fill_rect(r, {60, 60, 70});
  // Lower parts first so stacked parts draw on top.
  std::vector<int> order(g.n_parts());
  for (int k = 0; k < g.n_parts(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return w.parts[a].pose.position.z() < w.parts[b].pose.position.z(); });
  for (int k : order)
    fill_circle(w.parts[k].pose.position.x(), w.parts[k].pose.position.y(), g.parts[k].footprint_radius,
                status_color(w.parts[k].status));
  const Vec3& e = w.ee.pose.position;
  fill_circle(e.x(), e.y(), 0.008 + 0.1 * w.ee.gripper_width, {230, 60, 60});
  return img;
}

}  // namespace fbench
