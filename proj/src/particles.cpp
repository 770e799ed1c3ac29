#include "dsk3dom/particles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsk3dom/parallel.hpp"
#include "dsk3dom/rng.hpp"

namespace dsk3dom {

namespace {
// RNG stream ids, one per randomized stage.
constexpr std::uint64_t kStreamPredict = 1;
constexpr std::uint64_t kStreamBirth = 2;
constexpr std::uint64_t kStreamResample = 3;

// Pairwise summation of particle weights; keeps the rounding error near one
// ulp so weight-conservation checks at 1e-12 measure the algorithm, not the
// accumulator.
double weight_sum_pairwise(const Particle* data, std::size_t count) {
  if (count <= 8) {
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) sum += data[i].weight;
    return sum;
  }
  const std::size_t half = count / 2;
  return weight_sum_pairwise(data, half) + weight_sum_pairwise(data + half, count - half);
}
}  // namespace

std::vector<int> allocate_birth_counts(std::span<const double> rho_b, int budget) {
  std::vector<int> counts(rho_b.size(), 0);
  if (budget <= 0) return counts;
  double total = 0.0;
  for (double m : rho_b) total += m;
  if (!(total > 0.0)) return counts;

  struct Remainder {
    double value;
    std::size_t cell;
  };
  std::vector<Remainder> remainders;
  long long assigned = 0;
  for (std::size_t c = 0; c < rho_b.size(); ++c) {
    if (!(rho_b[c] > 0.0)) continue;
    const double quota = budget * rho_b[c] / total;
    const double base = std::floor(quota);
    counts[c] = static_cast<int>(base);
    assigned += counts[c];
    remainders.push_back({quota - base, c});
  }
  long long leftover = budget - assigned;
  std::sort(remainders.begin(), remainders.end(), [](const Remainder& a, const Remainder& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.cell < b.cell;
  });
  for (std::size_t r = 0; leftover > 0 && !remainders.empty(); r = (r + 1) % remainders.size()) {
    ++counts[remainders[r].cell];
    --leftover;
  }
  return counts;
}

double ParticleStore::predict(const MotionParams& params, const GridSpec& spec) {
  const std::uint64_t seed = seed_;
  const std::uint64_t step = step_;
  const double dt = params.dt;
  const double sigma_p = params.sigma_p;
  const double sigma_v = params.sigma_v;
  const double p_S = params.p_S;
  auto* data = particles_.data();
  parallel_for(particles_.size(), [&, data](std::size_t i) {
    Particle& p = data[i];
    const Vec3 noise_p = sigma_p > 0.0
                             ? Vec3(sigma_p * rng::normal3(seed, step, kStreamPredict, i, 0))
                             : Vec3::Zero();
    const Vec3 noise_v = sigma_v > 0.0
                             ? Vec3(sigma_v * rng::normal3(seed, step, kStreamPredict, i, 4))
                             : Vec3::Zero();
    p.position += dt * p.velocity + noise_p;
    p.velocity += noise_v;
    p.weight *= p_S;
  });
  return rebin_and_report(spec);
}

double ParticleStore::drop_below_z(double z_plane) {
  double dropped = 0.0;
  auto keep = std::remove_if(particles_.begin(), particles_.end(), [&](const Particle& p) {
    if (p.position.z() < z_plane) {
      dropped += p.weight;
      return true;
    }
    return false;
  });
  particles_.erase(keep, particles_.end());
  return dropped;
}

void ParticleStore::rebin(const GridSpec& spec) { rebin_and_report(spec); }

double ParticleStore::rebin_and_report(const GridSpec& spec) {
  const std::size_t ncells = static_cast<std::size_t>(spec.cell_count());
  double dropped = 0.0;

  for (auto& p : particles_) {
    const auto idx = world_to_cell(p.position, spec);
    p.cell = idx ? idx->flat : kOutOfGrid;
  }

  offsets_.assign(ncells + 1, 0);
  std::size_t kept = 0;
  for (const auto& p : particles_) {
    if (p.cell == kOutOfGrid) {
      dropped += p.weight;
    } else {
      ++offsets_[static_cast<std::size_t>(p.cell) + 1];
      ++kept;
    }
  }
  for (std::size_t c = 1; c <= ncells; ++c) offsets_[c] += offsets_[c - 1];

  scratch_.resize(kept);
  std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& p : particles_) {
    if (p.cell == kOutOfGrid) continue;
    scratch_[cursor[static_cast<std::size_t>(p.cell)]++] = p;
  }
  particles_.swap(scratch_);

  weight_sums_.assign(ncells, 0.0);
  for (const auto& p : particles_) weight_sums_[static_cast<std::size_t>(p.cell)] += p.weight;
  return dropped;
}

void ParticleStore::normalize_posterior_weights(std::span<const double> rho_p) {
  const std::size_t ncells = weight_sums_.size();
  auto* data = particles_.data();
  parallel_for(ncells, [&, data](std::size_t c) {
    const double sum = weight_sums_[c];
    if (!(sum > 0.0)) return;
    const double scale = rho_p[c] / sum;
    double rescaled = 0.0;
    for (std::uint32_t n = offsets_[c]; n < offsets_[c + 1]; ++n) {
      data[n].weight *= scale;
      rescaled += data[n].weight;
    }
    weight_sums_[c] = rescaled;
  });
}

double ParticleStore::spawn_birth(std::span<const double> rho_b, int budget,
                                  const MotionParams& params, const GridSpec& spec) {
  const std::vector<int> counts = allocate_birth_counts(rho_b, budget);
  double leaked = 0.0;
  std::size_t total_new = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (rho_b[c] > 0.0 && counts[c] == 0) leaked += rho_b[c];
    total_new += static_cast<std::size_t>(counts[c]);
  }
  if (total_new == 0) return leaked;

  const std::size_t base = particles_.size();
  particles_.resize(base + total_new);

  // Per-cell start index into the birth block, so generation can run in
  // parallel with a stable global index per birth particle.
  std::vector<std::size_t> starts;
  std::vector<std::int64_t> birth_cells;
  starts.reserve(counts.size());
  birth_cells.reserve(counts.size());
  std::size_t running = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    starts.push_back(running);
    birth_cells.push_back(static_cast<std::int64_t>(c));
    running += static_cast<std::size_t>(counts[c]);
  }

  const std::uint64_t seed = seed_;
  const std::uint64_t step = step_;
  const double vmax = params.v_max_birth;
  auto* data = particles_.data();
  parallel_for(starts.size(), [&, data](std::size_t s) {
    const std::int64_t flat = birth_cells[s];
    const std::size_t c = static_cast<std::size_t>(flat);
    const int n = counts[c];
    const double weight = rho_b[c] / n;
    const Vec3 lo = spec.cell_center(flat) - 0.5 * spec.cell_edge * Vec3::Ones();
    for (int m = 0; m < n; ++m) {
      const std::size_t gi = starts[s] + static_cast<std::size_t>(m);
      Particle& p = data[base + gi];
      p.position = lo + spec.cell_edge * Vec3(rng::uniform01(seed, step, kStreamBirth, gi, 0),
                                              rng::uniform01(seed, step, kStreamBirth, gi, 1),
                                              rng::uniform01(seed, step, kStreamBirth, gi, 2));
      p.velocity = vmax * Vec3(2.0 * rng::uniform01(seed, step, kStreamBirth, gi, 3) - 1.0,
                               2.0 * rng::uniform01(seed, step, kStreamBirth, gi, 4) - 1.0,
                               2.0 * rng::uniform01(seed, step, kStreamBirth, gi, 5) - 1.0);
      p.weight = weight;
      p.cell = flat;
    }
  });
  return leaked;
}

void ParticleStore::resample(int target, const GridSpec& spec) {
  const double total = weight_sum_pairwise(particles_.data(), particles_.size());
  if (!(total > 0.0)) throw DegenerateWeightsError();

  const double stride = total / target;
  const double u0 = rng::uniform01(seed_, step_, kStreamResample, 0, 0) * stride;

  scratch_.clear();
  scratch_.reserve(static_cast<std::size_t>(target));
  double cumulative = 0.0;
  std::size_t src = 0;
  for (int n = 0; n < target; ++n) {
    const double pick = u0 + n * stride;
    while (src + 1 < particles_.size() && cumulative + particles_[src].weight <= pick) {
      cumulative += particles_[src].weight;
      ++src;
    }
    Particle p = particles_[src];
    p.weight = stride;
    scratch_.push_back(p);
  }
  particles_.swap(scratch_);
  rebin(spec);
}

Vec3 ParticleStore::cell_velocity(std::int64_t flat) const {
  const auto span = cell_particles(flat);
  double wsum = 0.0;
  Vec3 v = Vec3::Zero();
  for (const auto& p : span) {
    wsum += p.weight;
    v += p.weight * p.velocity;
  }
  if (span.empty() || !(wsum > 0.0)) throw NoParticlesError();
  return v / wsum;
}

std::span<const Particle> ParticleStore::cell_particles(std::int64_t flat) const {
  const std::size_t c = static_cast<std::size_t>(flat);
  return {particles_.data() + offsets_[c], particles_.data() + offsets_[c + 1]};
}

double ParticleStore::total_weight() const {
  return weight_sum_pairwise(particles_.data(), particles_.size());
}

}  // namespace dsk3dom
