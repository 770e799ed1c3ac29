#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <type_traits>

namespace dsk3dom {

// Frame of discernment {D, S, F}: dynamic-occupied, static-occupied, free.
// Mass only ever lives on these five subsets; the focal set is closed under
// intersection (up to the empty set), so combination never leaves it.
enum class FocalElement : std::uint8_t {
  Dyn = 0,      // {D}
  Stat = 1,     // {S}
  Free = 2,     // {F}
  Occ = 3,      // {D,S}
  Unknown = 4,  // {D,S,F}
};

inline constexpr std::size_t kFocalCount = 5;

// Subset bitmask per focal element (D=1, S=2, F=4).
inline constexpr std::array<unsigned, kFocalCount> kFocalBits = {1u, 2u, 4u, 3u, 7u};

// Cardinality per focal element, used by the pignistic transform.
inline constexpr std::array<int, kFocalCount> kFocalCardinality = {1, 1, 1, 2, 3};

inline constexpr int kEmptySet = -1;

constexpr int focal_index_of_bits(unsigned bits) {
  switch (bits) {
    case 1u: return 0;
    case 2u: return 1;
    case 4u: return 2;
    case 3u: return 3;
    case 7u: return 4;
    default: return kEmptySet;
  }
}

// 5x5 intersection table over the focal set; kEmptySet marks a vanishing
// intersection (e.g. Occ n Free).
inline constexpr auto kIntersection = [] {
  std::array<std::array<int, kFocalCount>, kFocalCount> table{};
  for (std::size_t a = 0; a < kFocalCount; ++a)
    for (std::size_t b = 0; b < kFocalCount; ++b)
      table[a][b] = focal_index_of_bits(kFocalBits[a] & kFocalBits[b]);
  return table;
}();

struct TotalConflictError : std::runtime_error {
  TotalConflictError() : std::runtime_error("Dempster combination: total conflict") {}
};

/// Dempster's rule over the fixed focal set, generic in the scalar so the
/// test suite can instantiate it with exact rationals. Throws
/// TotalConflictError when the conflict normalizer vanishes
/// (K >= 1 - 1e-12 with floating point; K >= 1 exactly otherwise).
template <class Scalar>
std::array<Scalar, kFocalCount> combine_masses(const std::array<Scalar, kFocalCount>& a,
                                               const std::array<Scalar, kFocalCount>& b) {
  std::array<Scalar, kFocalCount> out{};
  Scalar conflict{};
  for (std::size_t i = 0; i < kFocalCount; ++i) {
    for (std::size_t j = 0; j < kFocalCount; ++j) {
      const Scalar product = a[i] * b[j];
      const int target = kIntersection[i][j];
      if (target == kEmptySet)
        conflict = conflict + product;
      else
        out[static_cast<std::size_t>(target)] = out[static_cast<std::size_t>(target)] + product;
    }
  }
  const Scalar norm = Scalar{1} - conflict;
  if constexpr (std::is_floating_point_v<Scalar>) {
    if (!(norm > 1e-12)) throw TotalConflictError();
  } else {
    if (!(Scalar{0} < norm)) throw TotalConflictError();
  }
  for (auto& m : out) m = m / norm;
  return out;
}

/// Normalized basic belief assignment over the five focal elements.
class Bba {
 public:
  /// Vacuous BBA: all mass on Omega.
  Bba() { masses_[static_cast<std::size_t>(FocalElement::Unknown)] = 1.0; }

  /// Validates the invariants (each mass in [0,1], sum 1 within 1e-9) and
  /// renormalizes exactly. Throws std::invalid_argument otherwise.
  static Bba from_masses(double dyn, double stat, double free, double occ, double unknown);

  /// Skips validation; for callers that construct masses already normalized.
  static Bba unchecked(const std::array<double, kFocalCount>& masses) {
    Bba b;
    b.masses_ = masses;
    return b;
  }

  double mass(FocalElement e) const { return masses_[static_cast<std::size_t>(e)]; }
  const std::array<double, kFocalCount>& masses() const { return masses_; }

  bool is_vacuous() const { return mass(FocalElement::Unknown) == 1.0; }

 private:
  std::array<double, kFocalCount> masses_{};
};

/// Pignistic probabilities of the three singleton states.
struct CellProbabilities {
  double p_dyn = 0.0;
  double p_stat = 0.0;
  double p_free = 0.0;
};

/// Unnormalized kernel evidence feeding the Dirichlet BBA. r_0 is the total
/// prior evidence (R_0) and must stay positive.
struct EvidenceVector {
  double r_occ = 0.0;
  double r_free = 0.0;
  double r_0 = 0.0;
};

/// Dempster's rule of combination; renormalizes the result to absorb
/// floating-point drift. Throws TotalConflictError when K >= 1 - 1e-12.
Bba combine(const Bba& m1, const Bba& m2);

/// Pignistic transform: each set's mass split equally among its members.
CellProbabilities pignistic(const Bba& m);

/// Observation BBA from kernel evidence: occupied/free channels plus the
/// Dirichlet prior mass on Omega. Never produces Dyn or Stat mass.
Bba dirichlet_bba(const EvidenceVector& ev);

/// bel({D,S}) = m({D}) + m({S}) + m({D,S}).
double belief_occupied(const Bba& m);

}  // namespace dsk3dom
