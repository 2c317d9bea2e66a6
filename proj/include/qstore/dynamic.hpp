#pragma once

// Dynamic field-matter transfer through the coupled-oscillator interaction
// Omega (a sigma^dag + a^dag sigma), single mode. The bosonic idealization is
// solved in closed form by rotating the creation operators; the finite-N
// atomic model is integrated numerically for comparison.

#include <qstore/core_state.hpp>
#include <qstore/geometry.hpp>
#include <qstore/propagator.hpp>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qstore {

/// Amplitudes xi_{mn} on |m photons, n collective excitations>, both treated
/// as ideal bosons.
class BosonicState {
 public:
  BosonicState(int max_photons, int max_excitations);

  static BosonicState fock(int photons, int excitations, int max_photons, int max_excitations);
  /// |Phi_1> (x) |Phi_2> with Phi_1 on the field and Phi_2 on the atoms.
  static BosonicState product(std::span<const Complex> field, std::span<const Complex> atoms,
                              int max_photons, int max_excitations);

  int max_photons() const { return m_max_; }
  int max_excitations() const { return n_max_; }
  Complex& at(int m, int n);
  Complex at(int m, int n) const;
  /// Largest m + n carrying non-zero amplitude (-1 for the zero state).
  int max_quanta() const;
  double squared_norm() const;
  std::vector<Complex>& data() { return xi_; }
  const std::vector<Complex>& data() const { return xi_; }

 private:
  int m_max_;
  int n_max_;
  std::vector<Complex> xi_;  // row-major in m
};

Complex overlap(const BosonicState& x, const BosonicState& y);
double fidelity(const BosonicState& x, const BosonicState& y, double norm_tolerance = kDefaultNormTolerance);

/// Closed-form evolution to dimensionless time omega_t = Omega t.
BosonicState evolve_analytic(const BosonicState& state, double omega_t);

/// Same two-boson evolution by fixed-step RK4 on the truncated Fock grid.
BosonicState integrate_two_boson(const BosonicState& state, double omega_t, double max_step = 1e-3);

/// Tr(rho_field^2) of the reduced field state.
double field_purity(const BosonicState& state);

enum class Associate { plus_i, minus_i, minus };
std::string to_string(Associate which);

/// alpha_m -> (+i)^m alpha_m, (-i)^m alpha_m or (-1)^m alpha_m.
std::vector<Complex> associate_state(std::span<const Complex> amplitudes, Associate which);

/// <Phi|a|Phi> for single-subsystem amplitudes.
Complex amplitude_expectation(std::span<const Complex> amplitudes);

/// Truncated coherent state, renormalized after truncation.
std::vector<Complex> coherent_amplitudes(Complex alpha, int max_photons);

struct SwapCheckpoint {
  double omega_t = 0;
  std::string expected;           // description of the expected state, empty if none
  std::optional<double> fidelity;  // against the expected state
  bool pass = true;
  double field_purity = 0;
};

struct SwapReport {
  std::vector<SwapCheckpoint> checkpoints;
  bool all_pass = true;
};

/// Evolves |Phi_1, Phi_2> and compares with the swapped associate states at
/// every time that is a multiple of pi/2. Fidelity must equal 1 within
/// `tolerance`.
SwapReport swap_check(std::span<const Complex> field, std::span<const Complex> atoms,
                      std::span<const double> omega_times, double tolerance = 1e-10);

/// |m>|C_k^n> embedding into the finite-N joint space (one field mode).
KetSpace transfer_space(int atoms, int max_quanta);
SparseKet embed(const BosonicState& state, double k, const Geometry& g, const KetSpace& space);

struct ExactTransferOptions {
  double max_step_omega = 1e-3;  // step in units of 1/Omega
  double norm_drift_bound = 1e-8;
};

/// Integrates Omega (a sigma^dag + a^dag sigma) with the true collective
/// operator sigma of wavevector k.
SparseKet evolve_exact_atoms(const SparseKet& initial, double omega, double t, double k, const Geometry& g,
                             const ExactTransferOptions& options = {});

/// || exact(t) - embed(analytic(t)) || for an initial bosonic state.
double finite_n_deviation(const BosonicState& initial, const Geometry& g, double k, double omega_t,
                          const ExactTransferOptions& options = {});

/// Columns: omega_t,fidelity_initial,fidelity_swapped,field_purity
void write_transfer_csv(const BosonicState& initial, std::span<const double> omega_times, std::ostream& os);

}  // namespace qstore
