#pragma once

// Three-level EIT medium coupled to quantized signal modes: interaction
// Hamiltonian, dark-state polaritons and adiabatic control-field sweeps.
//
// Level scheme: the signal mode q drives |b>-|a> with phase e^{i(k_s+q)z},
// the classical control field drives |c>-|a> with phase e^{i k_c z}. The
// b-c storage coherence therefore carries k_s + q - k_c.

#include <qstore/core_state.hpp>
#include <qstore/geometry.hpp>
#include <qstore/propagator.hpp>

#include <iosfwd>
#include <vector>

namespace qstore {

struct EitParams {
  double g = 1.0;      // single-atom signal coupling
  double omega = 1.0;  // control Rabi frequency
  ModeSet modes;       // must use the Raman convention
  bool include_free_term = false;
  double light_speed = 1.0;  // free frequency omega_q = light_speed * q

  /// atan2(g sqrt(N), Omega) in [0, pi/2].
  double theta(int atoms) const;
  double collective_coupling(int atoms) const;  // g sqrt(N)
  double k_storage(int mode) const { return modes.k_eff(mode); }
  void validate() const;

  /// Omega = g sqrt(N) cot(theta); theta must be in (0, pi/2].
  static EitParams with_theta(double g, double theta, int atoms, ModeSet modes);
};

/// Joint space with up to `max_quanta` photons and atomic excitations and a
/// single atom in |a>.
KetSpace eit_space(int atoms, int modes, int max_quanta);

/// Full interaction Hamiltonian (hbar = 1).
SparseKet apply_H_I(const SparseKet& x, const EitParams& p, const Geometry& g);

/// g sum_q a_q N rho_ab(q) x
SparseKet apply_signal_absorption(const SparseKet& x, const EitParams& p, const Geometry& g);
/// Omega N rho_ac(0) x
SparseKet apply_control_absorption(const SparseKet& x, const EitParams& p, const Geometry& g);
/// Sum of the two absorption terms; annihilates every exact dark state.
SparseKet apply_dark_coupling(const SparseKet& x, const EitParams& p, const Geometry& g);

/// |A_q^1, C_q^n>: one atom in |a>, n atoms in |c>, normalized.
SparseKet a_excited_state(int n, int mode, const EitParams& p, const Geometry& g, const KetSpace& space);
/// |C_q^n> of the storage wavevector of `mode`, in `space`.
SparseKet eit_storage_state(int n, int mode, const EitParams& p, const Geometry& g, const KetSpace& space);

/// psi_q^dag = cos(theta) a_q^dag - sin(theta) sigma_q^dag
SparseKet apply_polariton_dagger(const SparseKet& x, int mode, double theta, const EitParams& p,
                                 const Geometry& g);
/// psi_q = cos(theta) a_q - sin(theta) sigma_q
SparseKet apply_polariton(const SparseKet& x, int mode, double theta, const EitParams& p,
                          const Geometry& g);

/// (1/sqrt(n!)) (psi_q^dag)^n |0>|C^0>, not normalized.
SparseKet polariton_ladder_state(int n, int mode, double theta, const EitParams& p, const Geometry& g,
                                 const KetSpace& space);

enum class DarkForm { exact, approx };

/// exact: ladder state, numerically normalized. approx: the large-N
/// expansion sum_m (-1)^m sqrt(C(n,m)) cos^{n-m} sin^m |n-m>|C_q^m>.
SparseKet dark_state(int n, int mode, double theta, const EitParams& p, const Geometry& g,
                     DarkForm form, const KetSpace& space);

/// ||H_I D|| / ||D|| at theta = p.theta(N). Requires q = 0 or no free term.
double null_eigenvalue_residual(int n, int mode, const EitParams& p, const Geometry& g, DarkForm form);

/// Per photon-number sector, || (signal + control absorption) D || for the
/// exact ladder state: the two terms cancel component by component.
std::vector<double> dark_interference_residuals(int n, int mode, const EitParams& p, const Geometry& g);

/// (prod_i (psi_{q_i}^dag)^{n_i} / sqrt(n_i!)) |0>|C^0>, numerically normalized.
SparseKet multimode_dark_state(const std::vector<int>& occupancies, double theta, const EitParams& p,
                               const Geometry& g, const KetSpace& space);

enum class RampShape { linear, smooth_cosine };

struct RampSchedule {
  double theta_start = 0;
  double theta_end = 1.5707963267948966;
  double duration = 1;
  RampShape shape = RampShape::smooth_cosine;
  double max_step = 0;         // 0: 0.01 / max(g sqrt N, max Omega)
  double omega_cap_ratio = 100;  // Omega never exceeds this multiple of g sqrt N
  std::size_t samples = 200;
  double norm_drift_bound = 1e-8;

  double theta_at(double t) const;
  void validate() const;
};

struct TrajectorySample {
  double t = 0;
  double omega = 0;
  double theta = 0;  // effective mixing angle of the applied Omega(t)
  double norm = 0;
  double dark_fidelity = 0;
  double photon_expectation = 0;
  double c_population = 0;
  double a_population = 0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  SparseKet final_state;
  Rk4Stats stats;
};

/// Omega(t) applied by the sweep at time t.
double ramp_omega(const RampSchedule& ramp, const EitParams& p, int atoms, double t);

/// Integrates the initial (normalized) ket under H_I(t) with Omega(t) from
/// the ramp. The dark-state fidelity at time t is measured against the
/// dark-state image (at the current mixing angle) of the initial state's
/// projection onto the dark states at the starting angle.
Trajectory adiabatic_sweep(const SparseKet& initial, const EitParams& p, const Geometry& g,
                           const RampSchedule& ramp);

/// Columns: t,omega,theta,norm,dark_fidelity,photon_expectation,c_population
void write_trajectory_csv(const Trajectory& tr, std::ostream& os);

std::string to_string(RampShape shape);
RampShape ramp_shape_from_string(const std::string& s);

}  // namespace qstore
