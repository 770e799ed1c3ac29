#include "dsk3dom/bba.hpp"

#include <cmath>
#include <stdexcept>

namespace dsk3dom {

namespace {
constexpr double kSumTolerance = 1e-9;
}

Bba Bba::from_masses(double dyn, double stat, double free, double occ, double unknown) {
  const std::array<double, kFocalCount> m = {dyn, stat, free, occ, unknown};
  double sum = 0.0;
  for (double v : m) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("Bba mass outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) throw std::invalid_argument("Bba masses do not sum to 1");
  Bba b;
  for (std::size_t i = 0; i < kFocalCount; ++i) b.masses_[i] = m[i] / sum;
  return b;
}

Bba combine(const Bba& m1, const Bba& m2) {
  auto out = combine_masses(m1.masses(), m2.masses());
  double sum = 0.0;
  for (double v : out) sum += v;
  for (auto& v : out) v /= sum;
  return Bba::unchecked(out);
}

CellProbabilities pignistic(const Bba& m) {
  CellProbabilities p;
  const double occ_half = m.mass(FocalElement::Occ) / 2.0;
  const double omega_third = m.mass(FocalElement::Unknown) / 3.0;
  p.p_dyn = m.mass(FocalElement::Dyn) + occ_half + omega_third;
  p.p_stat = m.mass(FocalElement::Stat) + occ_half + omega_third;
  p.p_free = m.mass(FocalElement::Free) + omega_third;
  return p;
}

Bba dirichlet_bba(const EvidenceVector& ev) {
  const double total = ev.r_0 + ev.r_occ + ev.r_free;
  std::array<double, kFocalCount> m{};
  m[static_cast<std::size_t>(FocalElement::Occ)] = ev.r_occ / total;
  m[static_cast<std::size_t>(FocalElement::Free)] = ev.r_free / total;
  m[static_cast<std::size_t>(FocalElement::Unknown)] = ev.r_0 / total;
  return Bba::unchecked(m);
}

double belief_occupied(const Bba& m) {
  return m.mass(FocalElement::Dyn) + m.mass(FocalElement::Stat) + m.mass(FocalElement::Occ);
}

}  // namespace dsk3dom
