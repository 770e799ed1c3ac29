#include "dsk3dom/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "dsk3dom/parallel.hpp"

namespace dsk3dom {

namespace {
double elapsed_ms(const std::chrono::steady_clock::time_point& from) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - from)
      .count();
}
}  // namespace

Bba predict_masses(const Bba& prior, double predicted_weight_sum, const FilterParams& params,
                   double dt) {
  const CellProbabilities p = pignistic(prior);
  const double denom = p.p_dyn + p.p_stat;
  const double delta = denom > 0.0 ? p.p_dyn / denom : 0.0;
  const double g = std::pow(params.gamma, dt);
  const double a = std::pow(params.alpha, dt);
  const double occ_prior = prior.mass(FocalElement::Occ);

  const double dyn = std::min(1.0, predicted_weight_sum + g * a * delta * occ_prior);
  const double stat =
      std::min(1.0 - dyn, g * (prior.mass(FocalElement::Stat) + a * (1.0 - delta) * occ_prior));
  const double occ = std::min(1.0 - dyn - stat, g * (1.0 - a) * occ_prior);
  const double free =
      std::min(1.0 - (dyn + stat + occ), g * prior.mass(FocalElement::Free));
  // non-negative up to rounding when the clips saturate; clamp the residual
  const double unknown = std::max(0.0, 1.0 - dyn - stat - occ - free);

  std::array<double, kFocalCount> m{};
  m[static_cast<std::size_t>(FocalElement::Dyn)] = dyn;
  m[static_cast<std::size_t>(FocalElement::Stat)] = stat;
  m[static_cast<std::size_t>(FocalElement::Free)] = free;
  m[static_cast<std::size_t>(FocalElement::Occ)] = occ;
  m[static_cast<std::size_t>(FocalElement::Unknown)] = unknown;
  return Bba::unchecked(m);
}

Bba fuse(const Bba& predicted, const Bba& observation) { return combine(predicted, observation); }

std::pair<double, double> split_dynamic_mass(double posterior_dyn, const Bba& predicted,
                                             double birth_prob) {
  const double pred_dyn = predicted.mass(FocalElement::Dyn);
  const double pred_stat = predicted.mass(FocalElement::Stat);
  const double birth_term = birth_prob * (1.0 - pred_dyn - pred_stat);
  const double denom = birth_term + pred_dyn;
  if (!(denom > 0.0)) return {0.0, 0.0};
  const double rho_b = posterior_dyn * birth_term / denom;
  return {posterior_dyn - rho_b, rho_b};
}

Pipeline::Pipeline(const GridSpec& spec, const FilterParams& params, std::uint64_t seed)
    : map_(spec), store_(seed), params_(params) {
  const std::size_t n = static_cast<std::size_t>(spec.cell_count());
  predicted_.resize(n);
  rho_p_.resize(n);
  rho_b_.resize(n);
}

StepStats Pipeline::step(const MeasurementFrame& frame) {
  if (last_timestamp_ && !(frame.timestamp > *last_timestamp_))
    throw NonMonotonicTimestampError();
  const double dt = last_timestamp_ ? frame.timestamp - *last_timestamp_ : 0.0;
  last_timestamp_ = frame.timestamp;

  StepStats stats;
  stats.frame_index = frame_index_;
  stats.dt = dt;
  const auto t_start = std::chrono::steady_clock::now();
  const GridSpec& spec = map_.spec();
  const std::size_t ncells = static_cast<std::size_t>(spec.cell_count());

  // (1)-(3) particle prediction, optional ground filter, re-binning
  auto t0 = std::chrono::steady_clock::now();
  MotionParams motion = params_.motion;
  motion.dt = dt;
  stats.leak_out_of_grid = store_.predict(motion, spec);
  if (params_.ground_filter) {
    stats.leak_ground_filter = store_.drop_below_z(*params_.ground_filter);
    store_.rebin(spec);
  }
  stats.timings.predict_ms = elapsed_ms(t0);

  // (4) per-cell mass prediction
  t0 = std::chrono::steady_clock::now();
  auto& cells = map_.cells();
  parallel_for(ncells, [&](std::size_t c) {
    predicted_[c] = predict_masses(cells[c].bba, store_.cell_weight_sum(static_cast<std::int64_t>(c)),
                                   params_, dt);
  });
  stats.timings.mass_predict_ms = elapsed_ms(t0);

  // (5) kernel evidence
  t0 = std::chrono::steady_clock::now();
  evidence_.accumulate(frame, spec, params_.kernel);
  stats.timings.evidence_ms = elapsed_ms(t0);

  // (6)-(7) observation BBA, fusion, dynamic-mass split
  t0 = std::chrono::steady_clock::now();
  const auto& ev_occ = evidence_.occupied();
  const auto& ev_free = evidence_.free();
  parallel_for(ncells, [&](std::size_t c) {
    const Bba& predicted = predicted_[c];
    Bba posterior = predicted;
    if (ev_occ[c] > 0.0 || ev_free[c] > 0.0) {
      const Bba observation = dirichlet_bba(
          {ev_occ[c], ev_free[c], params_.dirichlet_prior_sum});
      posterior = fuse(predicted, observation);
    }
    const auto [rho_p, rho_b] =
        split_dynamic_mass(posterior.mass(FocalElement::Dyn), predicted, params_.birth_prob);
    cells[c].bba = posterior;
    cells[c].rho_p = rho_p;
    cells[c].rho_b = rho_b;
    rho_p_[c] = rho_p;
    rho_b_[c] = rho_b;
  });
  stats.timings.update_ms = elapsed_ms(t0);

  // (8)-(9) posterior weight normalization and birth
  t0 = std::chrono::steady_clock::now();
  for (std::size_t c = 0; c < ncells; ++c) {
    if (!(store_.cell_weight_sum(static_cast<std::int64_t>(c)) > 0.0) && rho_p_[c] > 0.0)
      stats.leak_rho_p_no_particles += rho_p_[c];
  }
  store_.normalize_posterior_weights(rho_p_);
  stats.leak_birth_unallocated = store_.spawn_birth(rho_b_, params_.nu_b, params_.motion, spec);
  stats.timings.weights_ms = elapsed_ms(t0);

  // (10) resampling (skipped when the merged population carries no mass)
  t0 = std::chrono::steady_clock::now();
  if (store_.total_weight() > 0.0) {
    store_.resample(params_.nu, spec);
  } else {
    store_.rebin(spec);
  }
  stats.timings.resample_ms = elapsed_ms(t0);

  // (11) per-cell mean velocity refresh
  t0 = std::chrono::steady_clock::now();
  parallel_for(ncells, [&](std::size_t c) {
    const auto span = store_.cell_particles(static_cast<std::int64_t>(c));
    Vec3 v = Vec3::Zero();
    double wsum = 0.0;
    for (const auto& p : span) {
      v += p.weight * p.velocity;
      wsum += p.weight;
    }
    cells[c].mean_velocity = wsum > 0.0 ? Vec3(v / wsum) : Vec3::Zero();
  });
  stats.timings.velocity_ms = elapsed_ms(t0);

  // (12) recenter the local map on the sensor
  t0 = std::chrono::steady_clock::now();
  if (map_.should_recenter(frame.sensor_pose.translation)) {
    stats.recenter_shift = map_.recenter(frame.sensor_pose.translation);
    store_.rebin(map_.spec());
  }
  stats.timings.recenter_ms = elapsed_ms(t0);

  store_.advance_step();
  ++frame_index_;
  stats.particle_count = store_.size();
  stats.timings.total_ms = elapsed_ms(t_start);
  return stats;
}

}  // namespace dsk3dom
