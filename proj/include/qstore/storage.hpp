#pragma once

// Atomic storage states |C_{k1}^{m1} ... C_{ks}^{ms}>, built two ways:
// directly from the combinatorial definition and by applying collective
// raising operators to the atomic vacuum.

#include <qstore/core_state.hpp>
#include <qstore/geometry.hpp>

#include <vector>

namespace qstore {

struct ModeOccupation {
  double wavevector = 0;  // effective atomic wavevector of the mode
  int count = 0;
};

struct StorageSpec {
  int atoms = 0;
  std::vector<ModeOccupation> modes;

  static StorageSpec single(int atoms, double wavevector, int count) {
    return {atoms, {{wavevector, count}}};
  }

  int excitations() const;
  void validate() const;
};

/// All atoms in |b>, field (if any) in vacuum.
SparseKet vacuum(const KetSpace& space);
/// Atoms-only vacuum with room for `max_excitations`.
SparseKet vacuum(int atoms, int max_excitations = 1);

/// Numerically normalized direct construction. Each choice of excited atoms
/// carries the sum over distinct assignments of modes to those atoms.
SparseKet storage_direct(const StorageSpec& spec, const Geometry& g, const KetSpace& space);
SparseKet storage_direct(const StorageSpec& spec, const Geometry& g);

struct LadderResult {
  SparseKet ket;    // normalized
  double raw_norm;  // norm of prod (sigma^dag)^{m_i} |C^0>
};
LadderResult storage_ladder(const StorageSpec& spec, const Geometry& g, const KetSpace& space);
LadderResult storage_ladder(const StorageSpec& spec, const Geometry& g);

/// sqrt(N(N-1)...(N-n+1) / N^n) * sqrt(m_1! ... m_s!)
double ladder_prefactor(int atoms, const std::vector<int>& counts);
/// sqrt(m_1! ... m_s! / (N(N-1)...(N-n+1))), exact only when cross phase sums vanish.
double asymptotic_coefficient(int atoms, const std::vector<int>& counts);

/// Squared norm of the unnormalized phase-sum superposition, split into the
/// diagonal term N(N-1)...(N-n+1)/(m_1!...m_s!) and the cross terms.
struct NormalizationAudit {
  double raw_squared_norm = 0;
  double diagonal_term = 0;
  double cross_term = 0;
  double asymptotic_coefficient = 0;
  double numeric_coefficient = 0;  // 1 / sqrt(raw_squared_norm)
  double relative_deviation = 0;   // |numeric - asymptotic| / asymptotic
  /// Norm the state would have with the asymptotic coefficient.
  double norm_with_asymptotic = 0;
};
NormalizationAudit normalization_audit(const StorageSpec& spec, const Geometry& g);

/// Same raw squared norm computed from all n! orderings of the excited
/// atoms per configuration (each distinct phase repeated m_1!...m_s! times).
double raw_squared_norm_by_permutations(const StorageSpec& spec, const Geometry& g);

/// Adding one excitation of a new mode to a single-mode storage state.
struct AddModeReport {
  double fidelity = 0;       // normalized sigma^dag_{k2}|C_{k1}^m> vs |C_{k2}^1 C_{k1}^m>
  Complex amplitude;         // <C_{k2}^1 C_{k1}^m| sigma^dag_{k2} |C_{k1}^m>
  double amplitude_deviation = 0;  // |1 - |amplitude||
};
AddModeReport add_mode_check(int atoms, double k1, int m1, double k2, const Geometry& g);

/// Increasing index sets i_1 < ... < i_n of {0..N-1}, in lexicographic order.
class Combinations {
 public:
  Combinations(int n, int k);
  bool done() const { return done_; }
  const std::vector<int>& current() const { return idx_; }
  void next();

 private:
  int n_;
  std::vector<int> idx_;
  bool done_ = false;
};

double binomial(int n, int k);
double falling_factorial(int n, int k);
double factorial(int n);

}  // namespace qstore
