#include "dsk3dom/grid.hpp"

#include <cmath>

namespace dsk3dom {

std::optional<CellIndex> world_to_cell(const Vec3& p, const GridSpec& spec) {
  CellIndex idx;
  const Vec3 rel = (p - spec.min_corner) / spec.cell_edge;
  const double fi = std::floor(rel.x());
  const double fj = std::floor(rel.y());
  const double fk = std::floor(rel.z());
  // written so non-finite coordinates also land here
  if (!(fi >= 0 && fj >= 0 && fk >= 0 && fi < spec.dims[0] && fj < spec.dims[1] &&
        fk < spec.dims[2]))
    return std::nullopt;
  idx.i = static_cast<int>(fi);
  idx.j = static_cast<int>(fj);
  idx.k = static_cast<int>(fk);
  idx.flat = spec.flat(idx.i, idx.j, idx.k);
  return idx;
}

CellLabel classify_cell(const CellState& state, double zeta0, double zeta1, double zeta2) {
  if (zeta0 < state.bba.mass(FocalElement::Unknown)) return CellLabel::Filtered;
  const CellProbabilities p = pignistic(state.bba);
  if (p.p_dyn + p.p_stat > zeta1) {
    if (p.p_dyn > zeta2) return CellLabel::DynamicOccupied;
    return CellLabel::Occupied;
  }
  return CellLabel::FreeOrStatic;
}

GridMap::GridMap(const GridSpec& spec) : spec_(spec), cells_(spec.cell_count()) {}

bool GridMap::should_recenter(const Vec3& sensor_position) const {
  const Vec3 half_extent = 0.5 * (spec_.max_corner() - spec_.min_corner);
  const Vec3 offset = sensor_position - spec_.center();
  for (int a = 0; a < 3; ++a)
    if (std::abs(offset[a]) > 0.5 * half_extent[a]) return true;
  return false;
}

std::array<int, 3> GridMap::recenter(const Vec3& sensor_position) {
  const Vec3 offset = (sensor_position - spec_.center()) / spec_.cell_edge;
  std::array<int, 3> shift;
  for (int a = 0; a < 3; ++a) shift[a] = static_cast<int>(std::floor(offset[a] + 0.5));
  if (shift[0] != 0 || shift[1] != 0 || shift[2] != 0) shift_cells(shift);
  return shift;
}

void GridMap::shift_cells(const std::array<int, 3>& shift) {
  scratch_.assign(cells_.size(), CellState{});
  for (int k = 0; k < spec_.dims[2]; ++k) {
    const int sk = k + shift[2];
    if (sk < 0 || sk >= spec_.dims[2]) continue;
    for (int j = 0; j < spec_.dims[1]; ++j) {
      const int sj = j + shift[1];
      if (sj < 0 || sj >= spec_.dims[1]) continue;
      for (int i = 0; i < spec_.dims[0]; ++i) {
        const int si = i + shift[0];
        if (si < 0 || si >= spec_.dims[0]) continue;
        scratch_[static_cast<std::size_t>(spec_.flat(i, j, k))] =
            cells_[static_cast<std::size_t>(spec_.flat(si, sj, sk))];
      }
    }
  }
  cells_.swap(scratch_);
  spec_.min_corner += spec_.cell_edge * Vec3(shift[0], shift[1], shift[2]);
}

}  // namespace dsk3dom
