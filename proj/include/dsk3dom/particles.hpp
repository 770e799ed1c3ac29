#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dsk3dom/grid.hpp"
#include "dsk3dom/types.hpp"

namespace dsk3dom {

inline constexpr std::int64_t kOutOfGrid = -1;

/// 6-D sample of the dynamic-object PHD.
struct Particle {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double weight = 0.0;
  std::int64_t cell = kOutOfGrid;
};

struct MotionParams {
  double dt = 0.1;
  double sigma_p = 0.05;       // position process noise SD (m)
  double sigma_v = 0.1;        // velocity process noise SD (m/s)
  double p_S = 0.99;           // persistence probability
  double v_max_birth = 3.0;    // birth velocity bound (m/s), uniform cube
};

struct DegenerateWeightsError : std::runtime_error {
  DegenerateWeightsError() : std::runtime_error("resample: total particle weight is not positive") {}
};

struct NoParticlesError : std::runtime_error {
  NoParticlesError() : std::runtime_error("cell holds no positively weighted particles") {}
};

/// Largest-remainder allocation of `budget` birth particles proportional to
/// the per-cell birth masses. Entries with zero mass receive zero.
std::vector<int> allocate_birth_counts(std::span<const double> rho_b, int budget);

/// Weighted particle population kept sorted by flat cell index. All
/// randomized operations draw from a counter-based generator keyed on
/// (seed, step, stream, index), so a fixed seed replays bit-identically for
/// a fixed particle count, independent of thread scheduling.
class ParticleStore {
 public:
  explicit ParticleStore(std::uint64_t seed) : seed_(seed) {}

  std::vector<Particle>& particles() { return particles_; }
  const std::vector<Particle>& particles() const { return particles_; }
  std::size_t size() const { return particles_.size(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t step_counter() const { return step_; }
  void advance_step() { ++step_; }

  /// Constant-velocity prediction: position += dt*velocity + N(0, sigma_p)
  /// per axis, velocity += N(0, sigma_v), weight *= p_S. Particles landing
  /// outside the grid are dropped; the store is re-binned. Returns the
  /// weight mass carried by dropped particles.
  double predict(const MotionParams& params, const GridSpec& spec);

  /// Drops particles strictly below the given z plane (ground filter).
  /// Returns the dropped weight mass. Caller must rebin afterwards.
  double drop_below_z(double z_plane);

  /// Recomputes each particle's cell from its position, drops out-of-grid
  /// particles, and counting-sorts by flat cell index. Refreshes the
  /// per-cell offsets and weight sums.
  void rebin(const GridSpec& spec);

  /// Scales each in-cell particle weight by rho_p(c) / (predicted weight
  /// sum of c). Cells with zero predicted weight sum are left untouched.
  void normalize_posterior_weights(std::span<const double> rho_p);

  /// Appends birth particles: `budget` particles allocated to cells by
  /// largest remainder on rho_b, positions uniform inside the owning cell,
  /// velocities uniform in [-v_max_birth, v_max_birth]^3, equal weights
  /// summing to rho_b(c) per receiving cell. Returns the birth mass that
  /// could not be carried (cells with rho_b > 0 but no particle allocated).
  double spawn_birth(std::span<const double> rho_b, int budget, const MotionParams& params,
                     const GridSpec& spec);

  /// Systematic resampling down to exactly `target` particles, each with
  /// weight W/target. Throws DegenerateWeightsError when W <= 0.
  void resample(int target, const GridSpec& spec);

  /// Weight-weighted mean velocity of the cell's particles.
  /// Throws NoParticlesError when the cell is empty or zero-weighted.
  Vec3 cell_velocity(std::int64_t flat) const;

  // Per-cell views; valid after rebin().
  std::span<const Particle> cell_particles(std::int64_t flat) const;
  double cell_weight_sum(std::int64_t flat) const {
    return weight_sums_[static_cast<std::size_t>(flat)];
  }
  const std::vector<double>& weight_sums() const { return weight_sums_; }
  double total_weight() const;

 private:
  double rebin_and_report(const GridSpec& spec);

  std::vector<Particle> particles_;
  std::vector<Particle> scratch_;
  std::vector<std::uint32_t> offsets_;  // size cell_count + 1
  std::vector<double> weight_sums_;
  std::uint64_t seed_ = 0;
  std::uint64_t step_ = 0;
};

}  // namespace dsk3dom
