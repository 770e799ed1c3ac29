#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "dsk3dom/bba.hpp"
#include "dsk3dom/types.hpp"

namespace dsk3dom {

/// Axis-aligned voxelization: cells are lower-inclusive, upper-exclusive.
struct GridSpec {
  Vec3 min_corner = Vec3::Zero();
  double cell_edge = 0.2;
  std::array<int, 3> dims = {1, 1, 1};

  std::int64_t cell_count() const {
    return static_cast<std::int64_t>(dims[0]) * dims[1] * dims[2];
  }
  // x-fastest flat order
  std::int64_t flat(int i, int j, int k) const {
    return i + static_cast<std::int64_t>(dims[0]) * (j + static_cast<std::int64_t>(dims[1]) * k);
  }
  Vec3 cell_center(int i, int j, int k) const {
    return min_corner + cell_edge * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
  Vec3 cell_center(std::int64_t flat_index) const {
    const int i = static_cast<int>(flat_index % dims[0]);
    const int j = static_cast<int>((flat_index / dims[0]) % dims[1]);
    const int k = static_cast<int>(flat_index / (static_cast<std::int64_t>(dims[0]) * dims[1]));
    return cell_center(i, j, k);
  }
  Vec3 max_corner() const {
    return min_corner + cell_edge * Vec3(dims[0], dims[1], dims[2]);
  }
  Vec3 center() const { return 0.5 * (min_corner + max_corner()); }
  bool valid() const {
    return cell_edge > 0.0 && dims[0] >= 1 && dims[1] >= 1 && dims[2] >= 1;
  }
};

struct CellIndex {
  int i = 0;
  int j = 0;
  int k = 0;
  std::int64_t flat = 0;
};

/// floor((p - min_corner) / cell_edge); nullopt when outside the grid.
std::optional<CellIndex> world_to_cell(const Vec3& p, const GridSpec& spec);

/// Per-voxel evidential state. rho_p/rho_b split the dynamic mass between
/// persistent and new-born objects; mean_velocity is the weighted mean of the
/// cell's particle velocities (zero when the cell holds no particles).
struct CellState {
  Bba bba;
  double rho_p = 0.0;
  double rho_b = 0.0;
  Vec3 mean_velocity = Vec3::Zero();
};

enum class CellLabel : std::uint8_t { Filtered, Occupied, DynamicOccupied, FreeOrStatic };

/// Classification of a cell: Filtered when zeta0 < m(Omega); otherwise
/// Occupied when P(D)+P(S) > zeta1, additionally DynamicOccupied when
/// P(D) > zeta2; else FreeOrStatic.
CellLabel classify_cell(const CellState& state, double zeta0, double zeta1, double zeta2);

/// Dense voxel map over a GridSpec, recenterable in whole-cell steps.
class GridMap {
 public:
  explicit GridMap(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  std::int64_t cell_count() const { return spec_.cell_count(); }

  CellState& cell(std::int64_t flat) { return cells_[static_cast<std::size_t>(flat)]; }
  const CellState& cell(std::int64_t flat) const { return cells_[static_cast<std::size_t>(flat)]; }
  std::vector<CellState>& cells() { return cells_; }
  const std::vector<CellState>& cells() const { return cells_; }

  /// True when the sensor left the central half-extent box of the grid.
  bool should_recenter(const Vec3& sensor_position) const;

  /// Shifts the grid origin by a whole number of cells so the grid center
  /// lands on the cell containing the sensor. Surviving cells keep their
  /// state; cells entering the grid are vacuous. Returns the applied shift.
  std::array<int, 3> recenter(const Vec3& sensor_position);

  /// Whole-cell relabeling: state of old cell (i,j,k) moves to
  /// (i,j,k) - shift; min_corner moves by +shift*edge.
  void shift_cells(const std::array<int, 3>& shift);

 private:
  GridSpec spec_;
  std::vector<CellState> cells_;
  std::vector<CellState> scratch_;
};

}  // namespace dsk3dom
