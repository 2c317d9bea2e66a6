#pragma once

// Collective atomic operators applied by their defining sums over atoms.
// Nothing here materializes an operator matrix: each application walks the
// ket's entries and flips one atom at a time with its local phase factor.

#include <qstore/core_state.hpp>
#include <qstore/geometry.hpp>
#include <qstore/kernels.hpp>

#include <optional>
#include <span>
#include <string>

namespace qstore {

enum class OpKind {
  sigma,          // (1/sqrt N) sum |b><c| e^{-ikz}
  sigma_dagger,   // (1/sqrt N) sum |c><b| e^{+ikz}
  rho_ab,         // (1/N) sum |a><b| e^{+ikz}
  rho_ab_dagger,
  rho_ac,         // (1/N) sum |a><c| e^{+ikz}
  rho_ac_dagger,
  pop_b,
  pop_c,
  pop_a,
  R1,
  R2,
  R3,
  R_squared,
};

std::string to_string(OpKind kind);
bool requires_wavevector(OpKind kind);

/// For rho_ab pass k_s + q, for rho_ac pass k_c + q; sigma and the R
/// operators take the effective atomic wavevector.
struct OperatorSpec {
  OpKind kind;
  std::optional<double> wavevector;

  void validate() const;
};

inline OperatorSpec sigma(double k) { return {OpKind::sigma, k}; }
inline OperatorSpec sigma_dagger(double k) { return {OpKind::sigma_dagger, k}; }

SparseKet apply(const OperatorSpec& op, const Geometry& g, const SparseKet& x,
                kernels::Exec exec = kernels::Exec::serial);

/// prefactor * sum_j phases[j] |to_j><from_j|
SparseKet apply_transition(const SparseKet& x, Level from, Level to, std::span<const Complex> phases,
                           double prefactor, kernels::Exec exec = kernels::Exec::serial);
SparseKet apply_population(const SparseKet& x, Level level);

SparseKet field_lower(const SparseKet& x, int mode);
SparseKet field_raise(const SparseKet& x, int mode);
SparseKet field_number(const SparseKet& x, int mode);
SparseKet total_photon_number(const SparseKet& x);

/// <x| A B - B A |y>, by applying both products to y.
Complex commutator_matrix_element(const OperatorSpec& a, const OperatorSpec& b, const Geometry& g,
                                  const SparseKet& x, const SparseKet& y);

/// <x| A |y>
Complex matrix_element(const SparseKet& x, const OperatorSpec& a, const Geometry& g, const SparseKet& y);

struct EigenCheck {
  double r3 = 0;          // <x|R3|x> (real part)
  double r_squared = 0;   // <x|R^2|x>
  double r3_residual = 0;         // || R3 x - r3 x ||
  double r_squared_residual = 0;  // || R^2 x - r_squared x ||
};

/// R1 and R2 change the excitation number, so storage states can only be
/// eigenstates of R3 and R^2. Needs one unit of excitation headroom.
EigenCheck angular_momentum_eigencheck(const SparseKet& x, double k, const Geometry& g);

}  // namespace qstore
