#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dsk3dom/bba.hpp"
#include "dsk3dom/grid.hpp"
#include "dsk3dom/measurement.hpp"
#include "dsk3dom/particles.hpp"

namespace dsk3dom {

struct FilterParams {
  double gamma = 0.99;                 // decay factor
  double alpha = 0.9;                  // occupied-mass distribution factor
  double birth_prob = 0.02;            // p_B
  double dirichlet_prior_sum = 0.001;  // R_0
  MotionParams motion;                 // dt is overwritten from frame timestamps
  KernelParams kernel;
  int nu = 100000;                     // persistent particle budget
  int nu_b = 10000;                    // birth particles per step
  std::optional<double> ground_filter; // drop particles below this z plane
};

struct NonMonotonicTimestampError : std::runtime_error {
  NonMonotonicTimestampError()
      : std::runtime_error("measurement frame timestamps must be strictly increasing") {}
};

struct StageTimings {
  double predict_ms = 0.0;
  double mass_predict_ms = 0.0;
  double evidence_ms = 0.0;
  double update_ms = 0.0;   // fuse + split
  double weights_ms = 0.0;  // posterior normalization + birth
  double resample_ms = 0.0;
  double velocity_ms = 0.0;
  double recenter_ms = 0.0;
  double total_ms = 0.0;
};

struct StepStats {
  std::uint64_t frame_index = 0;
  double dt = 0.0;
  StageTimings timings;
  // Diagnostic mass-leak counters (weight that no particle could carry).
  double leak_out_of_grid = 0.0;
  double leak_ground_filter = 0.0;
  double leak_rho_p_no_particles = 0.0;
  double leak_birth_unallocated = 0.0;
  std::array<int, 3> recenter_shift = {0, 0, 0};
  std::size_t particle_count = 0;
};

/// Mass prediction block: decays the prior, redistributes the occupied mass
/// between Dyn and Stat by the prior pignistic ratio, and folds the
/// predicted particle weight sum into the dynamic mass. The clipping chain
/// keeps the output a valid BBA.
Bba predict_masses(const Bba& prior, double predicted_weight_sum, const FilterParams& params,
                   double dt);

/// Posterior BBA: Dempster combination of prediction and observation.
Bba fuse(const Bba& predicted, const Bba& observation);

/// Splits the posterior dynamic mass into (rho_p, rho_b) by the
/// birth-to-persistent ratio of the predicted masses. Returns (0, 0) when
/// the ratio's denominator vanishes.
std::pair<double, double> split_dynamic_mass(double posterior_dyn, const Bba& predicted,
                                             double birth_prob);

/// One DS-K3DOM time step over an owned map + particle store.
class Pipeline {
 public:
  Pipeline(const GridSpec& spec, const FilterParams& params, std::uint64_t seed);

  StepStats step(const MeasurementFrame& frame);

  const GridMap& map() const { return map_; }
  GridMap& map() { return map_; }
  const ParticleStore& particles() const { return store_; }
  const FilterParams& params() const { return params_; }

 private:
  GridMap map_;
  ParticleStore store_;
  FilterParams params_;
  EvidenceAccumulator evidence_;
  std::vector<Bba> predicted_;
  std::vector<double> rho_p_;
  std::vector<double> rho_b_;
  std::optional<double> last_timestamp_;
  std::uint64_t frame_index_ = 0;
};

}  // namespace dsk3dom
