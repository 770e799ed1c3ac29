#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>

#include "dsk3dom/grid.hpp"
#include "dsk3dom/types.hpp"

namespace dsk3dom {

/// Clips the parametric segment p0 + t*(p1-p0), t in [0,1], against an AABB.
/// Returns the surviving [t_enter, t_exit] or nullopt when disjoint.
inline std::optional<std::pair<double, double>> clip_segment(const Vec3& p0, const Vec3& p1,
                                                             const Vec3& box_min,
                                                             const Vec3& box_max) {
  double t0 = 0.0, t1 = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double d = p1[a] - p0[a];
    if (d == 0.0) {
      if (p0[a] < box_min[a] || p0[a] > box_max[a]) return std::nullopt;
      continue;
    }
    double ta = (box_min[a] - p0[a]) / d;
    double tb = (box_max[a] - p0[a]) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

/// Amanatides-Woo voxel walk of the segment [p0, p1] over the grid lattice.
/// Visits lattice coordinates in order; indices may lie outside the grid
/// bounds (callers bounds-check). visit(i, j, k) returning false stops the
/// walk early.
template <class Visitor>
void traverse_lattice(const Vec3& p0, const Vec3& p1, const GridSpec& spec, Visitor&& visit) {
  const double edge = spec.cell_edge;
  const Vec3 rel0 = (p0 - spec.min_corner) / edge;
  const Vec3 rel1 = (p1 - spec.min_corner) / edge;
  std::array<std::int64_t, 3> idx, end_idx, step;
  Vec3 t_max, t_delta;
  const Vec3 dir = rel1 - rel0;
  for (int a = 0; a < 3; ++a) {
    idx[a] = static_cast<std::int64_t>(std::floor(rel0[a]));
    end_idx[a] = static_cast<std::int64_t>(std::floor(rel1[a]));
    if (dir[a] > 0.0) {
      step[a] = 1;
      t_delta[a] = 1.0 / dir[a];
      t_max[a] = (static_cast<double>(idx[a]) + 1.0 - rel0[a]) / dir[a];
    } else if (dir[a] < 0.0) {
      step[a] = -1;
      t_delta[a] = -1.0 / dir[a];
      t_max[a] = (static_cast<double>(idx[a]) - rel0[a]) / dir[a];
    } else {
      step[a] = 0;
      t_delta[a] = std::numeric_limits<double>::infinity();
      t_max[a] = std::numeric_limits<double>::infinity();
    }
  }
  for (;;) {
    if (!visit(idx[0], idx[1], idx[2])) return;
    if (idx == end_idx) return;
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    if (t_max[axis] > 1.0) return;  // numeric guard: walked past the segment
    idx[axis] += step[axis];
    t_max[axis] += t_delta[axis];
  }
}

}  // namespace dsk3dom
