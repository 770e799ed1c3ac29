#include "dsk3dom/bba.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include <doctest.h>

#include "rational.hpp"

using namespace dsk3dom;
using testutil::Rational;

namespace {

// Independent enumeration oracle: focal elements as explicit subsets of
// {D, S, F}, intersections by std::set, no shared tables with the library.
const std::array<std::set<int>, kFocalCount> kSubsets = {
    std::set<int>{0}, std::set<int>{1}, std::set<int>{2}, std::set<int>{0, 1},
    std::set<int>{0, 1, 2}};

int subset_index(const std::set<int>& s) {
  for (std::size_t i = 0; i < kSubsets.size(); ++i)
    if (kSubsets[i] == s) return static_cast<int>(i);
  return -1;  // empty or not a focal element
}

template <class Scalar>
std::array<Scalar, kFocalCount> oracle_combine(const std::array<Scalar, kFocalCount>& a,
                                               const std::array<Scalar, kFocalCount>& b) {
  std::array<Scalar, kFocalCount> out{};
  Scalar conflict{};
  for (std::size_t i = 0; i < kFocalCount; ++i) {
    for (std::size_t j = 0; j < kFocalCount; ++j) {
      std::set<int> inter;
      for (int e : kSubsets[i])
        if (kSubsets[j].count(e)) inter.insert(e);
      const int target = subset_index(inter);
      if (target < 0)
        conflict = conflict + a[i] * b[j];
      else
        out[static_cast<std::size_t>(target)] = out[static_cast<std::size_t>(target)] + a[i] * b[j];
    }
  }
  const Scalar norm = Scalar{1} - conflict;
  for (auto& m : out) m = m / norm;
  return out;
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

// Random masses that are exact dyadic rationals summing to exactly 1.
std::array<double, kFocalCount> random_dyadic_masses(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> cut(0, 1024);
  std::array<int, kFocalCount + 1> cuts = {0, cut(rng), cut(rng), cut(rng), cut(rng), 1024};
  std::sort(cuts.begin(), cuts.end());
  std::array<double, kFocalCount> m;
  for (std::size_t i = 0; i < kFocalCount; ++i) m[i] = (cuts[i + 1] - cuts[i]) / 1024.0;
  return m;
}

}  // namespace

TEST_CASE("combine: vacuous BBA is a two-sided identity (exact)") {
  std::mt19937_64 rng(7);
  const Bba vacuous;
  for (int trial = 0; trial < 200; ++trial) {
    const Bba a = Bba::unchecked(random_dyadic_masses(rng));
    const Bba left = combine(vacuous, a);
    const Bba right = combine(a, vacuous);
    for (std::size_t i = 0; i < kFocalCount; ++i) {
      CHECK(left.masses()[i] == a.masses()[i]);
      CHECK(right.masses()[i] == a.masses()[i]);
    }
  }
}

TEST_CASE("combine: total conflict throws") {
  const Bba free_only = Bba::from_masses(0, 0, 1, 0, 0);
  const Bba occ_only = Bba::from_masses(0, 0, 0, 1, 0);
  CHECK_THROWS_AS(combine(free_only, occ_only), TotalConflictError);
}

TEST_CASE("combine: worked example") {
  // (Occ=0.5, U=0.5) + (Free=0.4, U=0.6): conflict 0.2, normalizer 0.8
  const Bba a = Bba::from_masses(0, 0, 0, 0.5, 0.5);
  const Bba b = Bba::from_masses(0, 0, 0.4, 0, 0.6);
  const Bba c = combine(a, b);
  CHECK(c.mass(FocalElement::Occ) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(c.mass(FocalElement::Free) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(c.mass(FocalElement::Unknown) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(c.mass(FocalElement::Dyn) == 0.0);
  CHECK(c.mass(FocalElement::Stat) == 0.0);
}

TEST_CASE("combine matches the enumeration oracle exactly on rationals") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> cut(0, 720);
  for (int trial = 0; trial < 500; ++trial) {
    std::array<int, kFocalCount + 1> ca = {0, cut(rng), cut(rng), cut(rng), cut(rng), 720};
    std::array<int, kFocalCount + 1> cb = {0, cut(rng), cut(rng), cut(rng), cut(rng), 720};
    std::sort(ca.begin(), ca.end());
    std::sort(cb.begin(), cb.end());
    std::array<Rational, kFocalCount> a, b;
    for (std::size_t i = 0; i < kFocalCount; ++i) {
      a[i] = Rational(ca[i + 1] - ca[i], 720);
      b[i] = Rational(cb[i + 1] - cb[i], 720);
    }
    try {
      const auto via_impl = combine_masses(a, b);
      const auto via_oracle = oracle_combine(a, b);
      for (std::size_t i = 0; i < kFocalCount; ++i) CHECK(via_impl[i] == via_oracle[i]);
    } catch (const TotalConflictError&) {
      // oracle must agree that the conflict is total
      Rational conflict{};
      for (std::size_t i = 0; i < kFocalCount; ++i)
        for (std::size_t j = 0; j < kFocalCount; ++j) {
          std::set<int> inter;
          for (int e : kSubsets[i])
            if (kSubsets[j].count(e)) inter.insert(e);
          if (inter.empty()) conflict = conflict + a[i] * b[j];
        }
      CHECK(conflict == Rational(1));
    }
  }
}

TEST_CASE("combine matches the double oracle to 1e-12 and commutes") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 2000; ++trial) {
    const Bba a = random_bba(rng);
    const Bba b = random_bba(rng);
    const Bba ab = combine(a, b);
    const Bba ba = combine(b, a);
    const auto oracle = oracle_combine(a.masses(), b.masses());
    for (std::size_t i = 0; i < kFocalCount; ++i) {
      CHECK(std::abs(ab.masses()[i] - oracle[i]) <= 1e-12);
      CHECK(std::abs(ab.masses()[i] - ba.masses()[i]) <= 1e-12);
    }
  }
}

TEST_CASE("combine is associative to 1e-9 on non-conflicting triples") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const Bba a = random_bba(rng);
    const Bba b = random_bba(rng);
    const Bba c = random_bba(rng);
    const Bba left = combine(combine(a, b), c);
    const Bba right = combine(a, combine(b, c));
    for (std::size_t i = 0; i < kFocalCount; ++i)
      CHECK(std::abs(left.masses()[i] - right.masses()[i]) <= 1e-9);
  }
}

TEST_CASE("pignistic: vacuous splits Omega evenly") {
  const CellProbabilities p = pignistic(Bba{});
  CHECK(p.p_dyn == doctest::Approx(1.0 / 3));
  CHECK(p.p_stat == doctest::Approx(1.0 / 3));
  CHECK(p.p_free == doctest::Approx(1.0 / 3));
}

TEST_CASE("pignistic: pure free") {
  const CellProbabilities p = pignistic(Bba::from_masses(0, 0, 1, 0, 0));
  CHECK(p.p_free == 1.0);
  CHECK(p.p_dyn == 0.0);
  CHECK(p.p_stat == 0.0);
}

TEST_CASE("pignistic: worked example") {
  const CellProbabilities p = pignistic(Bba::from_masses(0.2, 0.3, 0.1, 0.2, 0.2));
  CHECK(p.p_dyn == doctest::Approx(11.0 / 30).epsilon(1e-12));
  CHECK(p.p_stat == doctest::Approx(7.0 / 15).epsilon(1e-12));
  CHECK(p.p_free == doctest::Approx(1.0 / 6).epsilon(1e-12));
}

TEST_CASE("pignistic sums to 1 within 1e-9") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 2000; ++trial) {
    const CellProbabilities p = pignistic(random_bba(rng));
    CHECK(p.p_dyn + p.p_stat + p.p_free == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p.p_dyn >= 0.0);
    CHECK(p.p_stat >= 0.0);
    CHECK(p.p_free >= 0.0);
  }
}

TEST_CASE("dirichlet_bba: no observation evidence is vacuous") {
  const Bba m = dirichlet_bba({0.0, 0.0, 0.001});
  CHECK(m.mass(FocalElement::Unknown) == 1.0);
  CHECK(belief_occupied(m) == 0.0);
}

TEST_CASE("dirichlet_bba: worked examples") {
  const Bba occ = dirichlet_bba({0.1, 0.0, 0.001});
  CHECK(occ.mass(FocalElement::Occ) == doctest::Approx(0.1 / 0.101).epsilon(1e-12));
  CHECK(occ.mass(FocalElement::Unknown) == doctest::Approx(0.001 / 0.101).epsilon(1e-12));

  const Bba both = dirichlet_bba({0.1, 0.05, 0.001});
  CHECK(both.mass(FocalElement::Occ) == doctest::Approx(0.1 / 0.151).epsilon(1e-12));
  CHECK(both.mass(FocalElement::Free) == doctest::Approx(0.05 / 0.151).epsilon(1e-12));
  CHECK(both.mass(FocalElement::Unknown) == doctest::Approx(0.001 / 0.151).epsilon(1e-12));
}

TEST_CASE("dirichlet_bba always keeps Unknown mass positive") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Bba m = dirichlet_bba({u(rng), u(rng), 0.001});
    CHECK(m.mass(FocalElement::Unknown) > 0.0);
    CHECK(m.mass(FocalElement::Dyn) == 0.0);
    CHECK(m.mass(FocalElement::Stat) == 0.0);
  }
}

TEST_CASE("belief_occupied") {
  CHECK(belief_occupied(Bba{}) == 0.0);
  CHECK(belief_occupied(Bba::from_masses(0, 0, 0, 1, 0)) == 1.0);
  CHECK(belief_occupied(Bba::from_masses(0.3, 0.2, 0.2, 0.1, 0.2)) ==
        doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("from_masses validates the invariants") {
  CHECK_THROWS_AS(Bba::from_masses(0.5, 0.6, 0, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(Bba::from_masses(-0.1, 0.4, 0.3, 0.2, 0.2), std::invalid_argument);
}
