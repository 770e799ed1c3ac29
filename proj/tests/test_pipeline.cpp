#include "dsk3dom/pipeline.hpp"

#include <cmath>
#include <random>

#include <doctest.h>

using namespace dsk3dom;

namespace {

FilterParams desk_params() {
  FilterParams p;
  p.nu = 2000;
  p.nu_b = 200;
  return p;
}

GridSpec room_spec() {
  GridSpec spec;
  spec.min_corner = Vec3(-1.6, -1.6, -1.6);
  spec.cell_edge = 0.2;
  spec.dims = {16, 16, 16};
  return spec;
}

Bba random_bba(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<double, kFocalCount> m;
  double sum = 0.0;
  for (auto& v : m) {
    v = u(rng);
    sum += v;
  }
  for (auto& v : m) v /= sum;
  return Bba::unchecked(m);
}

MeasurementFrame frame_with_hit(double t, const Vec3& origin, const Vec3& endpoint) {
  MeasurementFrame f;
  f.timestamp = t;
  f.sensor_pose.translation = origin;
  Ray r;
  r.origin = origin;
  r.endpoint = endpoint;
  r.hit = true;
  f.rays.push_back(r);
  return f;
}

}  // namespace

TEST_CASE("predict_masses: vacuous prior with no particles stays vacuous") {
  FilterParams params;
  const Bba out = predict_masses(Bba{}, 0.0, params, 0.1);
  CHECK(out.mass(FocalElement::Unknown) == 1.0);
  CHECK(belief_occupied(out) == 0.0);
}

TEST_CASE("predict_masses: pure free decays by gamma") {
  FilterParams params;
  params.gamma = 0.99;
  const Bba out = predict_masses(Bba::from_masses(0, 0, 1, 0, 0), 0.0, params, 1.0);
  CHECK(out.mass(FocalElement::Free) == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(out.mass(FocalElement::Unknown) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("predict_masses: frozen worked example") {
  // prior (D=0.1, S=0.2, F=0.1, Occ=0.5, U=0.1), Sw=0.099, dt=1,
  // gamma=0.99, alpha=0.9; delta = 23/52
  FilterParams params;
  params.gamma = 0.99;
  params.alpha = 0.9;
  const Bba prior = Bba::from_masses(0.1, 0.2, 0.1, 0.5, 0.1);
  const Bba out = predict_masses(prior, 0.099, params, 1.0);
  CHECK(std::abs(out.mass(FocalElement::Dyn) - 0.296048076923077) <= 1e-9);
  CHECK(std::abs(out.mass(FocalElement::Stat) - 0.446451923076923) <= 1e-9);
  CHECK(std::abs(out.mass(FocalElement::Occ) - 0.0495) <= 1e-9);
  CHECK(std::abs(out.mass(FocalElement::Free) - 0.099) <= 1e-9);
  CHECK(std::abs(out.mass(FocalElement::Unknown) - 0.109) <= 1e-9);
}

TEST_CASE("predict_masses: gamma=1, alpha=0 is the identity on (Stat, Occ, Free)") {
  FilterParams params;
  params.gamma = 1.0;
  params.alpha = 0.0;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Bba prior = random_bba(rng);
    const Bba out = predict_masses(prior, 0.0, params, 1.0);
    CHECK(out.mass(FocalElement::Dyn) == 0.0);
    CHECK(std::abs(out.mass(FocalElement::Stat) - prior.mass(FocalElement::Stat)) <= 1e-12);
    CHECK(std::abs(out.mass(FocalElement::Occ) - prior.mass(FocalElement::Occ)) <= 1e-12);
    CHECK(std::abs(out.mass(FocalElement::Free) - prior.mass(FocalElement::Free)) <= 1e-12);
  }
}

TEST_CASE("predict_masses keeps all BBA invariants on random input") {
  FilterParams params;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> w(0.0, 1.5);
  std::uniform_real_distribution<double> dt(0.01, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Bba out = predict_masses(random_bba(rng), w(rng), params, dt(rng));
    double sum = 0.0;
    for (double v : out.masses()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    CHECK(out.mass(FocalElement::Unknown) >= 0.0);
  }
}

TEST_CASE("fuse: observation with Unknown mass combines; vacuous sides are neutral") {
  const Bba predicted = Bba::from_masses(0, 0, 0, 0.5, 0.5);
  const Bba observation = Bba::from_masses(0, 0, 0.4, 0, 0.6);
  const Bba out = fuse(predicted, observation);
  CHECK(out.mass(FocalElement::Occ) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(out.mass(FocalElement::Free) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(out.mass(FocalElement::Unknown) == doctest::Approx(0.375).epsilon(1e-12));

  const Bba same = fuse(predicted, Bba{});
  for (std::size_t i = 0; i < kFocalCount; ++i)
    CHECK(same.masses()[i] == predicted.masses()[i]);
  const Bba other = fuse(Bba{}, observation);
  for (std::size_t i = 0; i < kFocalCount; ++i)
    CHECK(other.masses()[i] == observation.masses()[i]);
}

TEST_CASE("split_dynamic_mass: spec examples") {
  // zero predicted dynamic mass routes everything to birth
  {
    const Bba predicted = Bba::from_masses(0, 0.3, 0.2, 0.2, 0.3);
    const auto [rho_p, rho_b] = split_dynamic_mass(0.2, predicted, 0.02);
    CHECK(rho_b == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(rho_p == doctest::Approx(0.0));
  }
  // zero birth probability keeps everything persistent
  {
    const Bba predicted = Bba::from_masses(0.3, 0.2, 0.2, 0.1, 0.2);
    const auto [rho_p, rho_b] = split_dynamic_mass(0.25, predicted, 0.0);
    CHECK(rho_b == 0.0);
    CHECK(rho_p == doctest::Approx(0.25).epsilon(1e-12));
  }
  // frozen worked example
  {
    const Bba predicted = Bba::from_masses(0.3, 0.2, 0.2, 0.1, 0.2);
    const auto [rho_p, rho_b] = split_dynamic_mass(0.4, predicted, 0.02);
    CHECK(std::abs(rho_b - 0.012903225806451613) <= 1e-12);
    CHECK(std::abs(rho_p - 0.3870967741935484) <= 1e-12);
  }
  // vanishing denominator
  {
    const Bba predicted = Bba::from_masses(0, 0.5, 0.3, 0.1, 0.1);
    const auto [rho_p, rho_b] = split_dynamic_mass(0.0, predicted, 0.0);
    CHECK(rho_p == 0.0);
    CHECK(rho_b == 0.0);
  }
}

TEST_CASE("split_dynamic_mass: rho_p + rho_b equals the posterior dynamic mass") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const Bba predicted = random_bba(rng);
    const double posterior = u(rng);
    const double p_B = u(rng);
    const auto [rho_p, rho_b] = split_dynamic_mass(posterior, predicted, p_B);
    if (p_B * (1.0 - predicted.mass(FocalElement::Dyn) - predicted.mass(FocalElement::Stat)) +
            predicted.mass(FocalElement::Dyn) >
        0.0) {
      CHECK(std::abs(rho_p + rho_b - posterior) <= 1e-9);
      CHECK(rho_p >= 0.0);
      CHECK(rho_b >= 0.0);
    }
  }
}

TEST_CASE("step: empty frame on a vacuous map stays vacuous with no particles") {
  Pipeline pipeline(room_spec(), desk_params(), 1);
  MeasurementFrame frame;
  frame.timestamp = 0.1;
  const StepStats stats = pipeline.step(frame);
  CHECK(stats.particle_count == 0);
  for (const auto& cell : pipeline.map().cells()) {
    CHECK(cell.bba.is_vacuous());
    CHECK(cell.rho_p == 0.0);
    CHECK(cell.rho_b == 0.0);
  }
}

TEST_CASE("step: timestamps must be strictly increasing") {
  Pipeline pipeline(room_spec(), desk_params(), 1);
  MeasurementFrame frame;
  frame.timestamp = 0.1;
  pipeline.step(frame);
  CHECK_THROWS_AS(pipeline.step(frame), NonMonotonicTimestampError);
}

TEST_CASE("step: repeated stationary hit accumulates occupancy, static dominates") {
  Pipeline pipeline(room_spec(), desk_params(), 1);
  // endpoint exactly on a cell center; sensor inside the central region so
  // the map never recenters mid-test
  const Vec3 target(0.5, 0.5, 0.1);
  const Vec3 sensor(-0.5, 0.0, 0.0);
  const std::int64_t flat = world_to_cell(target, room_spec())->flat;

  double prev_bel = 0.0;
  bool saturated = false;
  for (int n = 0; n < 10; ++n) {
    pipeline.step(frame_with_hit(0.1 * (n + 1), sensor, target));
    const double bel = belief_occupied(pipeline.map().cell(flat).bba);
    // strictly increasing until saturation; after that birth-particle noise
    // jitters the top fraction of a percent
    if (!saturated) CHECK(bel > prev_bel);
    if (bel > 0.99) saturated = true;
    if (saturated) CHECK(bel > 0.98);
    prev_bel = bel;
  }
  CHECK(saturated);
  const CellProbabilities p = pignistic(pipeline.map().cell(flat).bba);
  CHECK(p.p_stat > p.p_dyn);

  // per-cell invariants hold on exit
  for (const auto& cell : pipeline.map().cells()) {
    double sum = 0.0;
    for (double v : cell.bba.masses()) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    CHECK(std::abs(cell.rho_p + cell.rho_b - cell.bba.mass(FocalElement::Dyn)) <= 1e-6);
  }
}

TEST_CASE("step: translating hit leaves a decaying trail and a dynamic frontier") {
  Pipeline pipeline(room_spec(), desk_params(), 1);
  const Vec3 sensor(-0.5, 0.0, 0.0);
  const GridSpec spec = room_spec();

  // endpoint moves +1 cell in x per frame
  std::vector<double> trail_bel;
  double frontier_rho_b = 0.0;
  double frontier_dyn = 0.0;
  const int frames = 8;
  for (int n = 0; n < frames; ++n) {
    const Vec3 endpoint(0.1 + 0.2 * n - 1.0, 0.5, 0.1);
    pipeline.step(frame_with_hit(0.1 * (n + 1), sensor, endpoint));
    const auto first = world_to_cell(Vec3(-0.9, 0.5, 0.1), spec);
    trail_bel.push_back(belief_occupied(pipeline.map().cell(first->flat).bba));
    if (n == frames - 1) {
      const auto leading = world_to_cell(endpoint, spec);
      frontier_rho_b = pipeline.map().cell(leading->flat).rho_b;
      frontier_dyn = pipeline.map().cell(leading->flat).bba.mass(FocalElement::Dyn);
    }
  }
  // the first visited cell lost occupancy after the object moved on
  CHECK(trail_bel.back() < trail_bel[1]);
  // the frontier cell carries new-born dynamic mass
  CHECK(frontier_rho_b > 0.0);
  CHECK(frontier_dyn > 0.0);
}

TEST_CASE("step: never-observed cells converge to vacuous at the gamma rate") {
  FilterParams params = desk_params();
  Pipeline pipeline(room_spec(), params, 1);
  // seed one cell with mixed mass
  const Bba seeded = Bba::from_masses(0.0, 0.3, 0.3, 0.2, 0.2);
  pipeline.map().cell(100).bba = seeded;
  const double initial_non_unknown = 1.0 - seeded.mass(FocalElement::Unknown);

  double t = 0.0;
  const double dt = 0.1;
  pipeline.step([&] {
    MeasurementFrame f;
    f.timestamp = (t += dt);
    return f;
  }());
  for (int n = 1; n < 20; ++n) {
    MeasurementFrame f;
    f.timestamp = (t += dt);
    pipeline.step(f);
    const double non_unknown = 1.0 - pipeline.map().cell(100).bba.mass(FocalElement::Unknown);
    const double bound = std::pow(params.gamma, n * dt) * initial_non_unknown + 1e-12;
    CHECK(non_unknown <= bound);
  }
}

TEST_CASE("step: identical seed and frames replay bit-identically") {
  auto run = [](std::uint64_t seed) {
    Pipeline pipeline(room_spec(), desk_params(), seed);
    for (int n = 0; n < 5; ++n)
      pipeline.step(frame_with_hit(0.1 * (n + 1), Vec3(-1.0, 0, 0), Vec3(0.5 + 0.05 * n, 0.5, 0.1)));
    return pipeline;
  };
  const Pipeline a = run(7);
  const Pipeline b = run(7);
  bool cells_equal = true;
  for (std::int64_t c = 0; c < a.map().cell_count(); ++c) {
    for (std::size_t i = 0; i < kFocalCount; ++i)
      if (a.map().cell(c).bba.masses()[i] != b.map().cell(c).bba.masses()[i]) cells_equal = false;
    if (a.map().cell(c).rho_p != b.map().cell(c).rho_p) cells_equal = false;
    if ((a.map().cell(c).mean_velocity - b.map().cell(c).mean_velocity).norm() != 0.0)
      cells_equal = false;
  }
  CHECK(cells_equal);
  REQUIRE(a.particles().size() == b.particles().size());
  bool particles_equal = true;
  for (std::size_t i = 0; i < a.particles().size(); ++i) {
    if ((a.particles().particles()[i].position - b.particles().particles()[i].position).norm() !=
        0.0)
      particles_equal = false;
    if (a.particles().particles()[i].weight != b.particles().particles()[i].weight)
      particles_equal = false;
  }
  CHECK(particles_equal);
}

TEST_CASE("step: recenters when the sensor wanders off") {
  FilterParams params = desk_params();
  Pipeline pipeline(room_spec(), params, 1);
  MeasurementFrame f;
  f.timestamp = 0.1;
  f.sensor_pose.translation = Vec3(0, 0, 0);
  pipeline.step(f);
  CHECK(pipeline.map().spec().min_corner == Vec3(-1.6, -1.6, -1.6));

  MeasurementFrame g;
  g.timestamp = 0.2;
  g.sensor_pose.translation = Vec3(1.3, 0, 0);  // beyond the central half-extent (0.8)
  const StepStats stats = pipeline.step(g);
  CHECK(stats.recenter_shift[0] > 0);
  CHECK(pipeline.map().spec().min_corner.x() > -1.6);
}

TEST_CASE("step: ground filter drops below-plane particles and logs the leak") {
  FilterParams params = desk_params();
  params.ground_filter = 0.0;
  Pipeline pipeline(room_spec(), params, 3);

  // hits below the plane keep seeding births there; the next step's ground
  // filter removes them
  double leaked = 0.0;
  for (int n = 0; n < 8; ++n) {
    const StepStats stats =
        pipeline.step(frame_with_hit(0.1 * (n + 1), Vec3(-0.5, 0, 0.3), Vec3(0.5, 0.3, -0.5)));
    leaked += stats.leak_ground_filter;
  }
  CHECK(leaked > 0.0);
}
