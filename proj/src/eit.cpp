#include <qstore/eit.hpp>

#include <qstore/operators.hpp>
#include <qstore/storage.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace qstore {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

std::vector<Complex> conj_all(std::vector<Complex> v) {
  for (auto& z : v) z = std::conj(z);
  return v;
}

double signal_wavevector(const EitParams& p, int mode) {
  return p.modes.k_signal + p.modes.detunings.at(static_cast<std::size_t>(mode));
}

void check_space(const SparseKet& x, const EitParams& p, const Geometry& g) {
  if (x.space().atoms != g.atoms()) throw IncompatibleSpaces("EIT: geometry atom count differs from ket");
  if (x.space().modes != p.modes.size()) throw IncompatibleSpaces("EIT: ket mode count differs from mode set");
}

// coupling * a_q * sum_j |a_j><b_j| e^{i(k_s+q)z_j}, summed over modes.
SparseKet signal_absorption(const SparseKet& x, double coupling, const EitParams& p, const Geometry& g) {
  SparseKet out(x.space(), x.drop_tolerance());
  for (int q = 0; q < p.modes.size(); ++q) {
    const SparseKet lowered = field_lower(x, q);
    if (lowered.empty()) continue;
    out = out.plus(apply_transition(lowered, Level::b, Level::a, g.phases(signal_wavevector(p, q)), coupling));
  }
  return out;
}

// Hermitian conjugate of signal_absorption.
SparseKet signal_emission(const SparseKet& x, double coupling, const EitParams& p, const Geometry& g) {
  SparseKet out(x.space(), x.drop_tolerance());
  for (int q = 0; q < p.modes.size(); ++q) {
    const SparseKet decayed =
        apply_transition(x, Level::a, Level::b, conj_all(g.phases(signal_wavevector(p, q))), coupling);
    if (decayed.empty()) continue;
    out = out.plus(field_raise(decayed, q));
  }
  return out;
}

SparseKet control_absorption(const SparseKet& x, double omega, const EitParams& p, const Geometry& g) {
  return apply_transition(x, Level::c, Level::a, g.phases(p.modes.k_control), omega);
}

SparseKet control_emission(const SparseKet& x, double omega, const EitParams& p, const Geometry& g) {
  return apply_transition(x, Level::a, Level::c, conj_all(g.phases(p.modes.k_control)), omega);
}

SparseKet free_term(const SparseKet& x, const EitParams& p) {
  SparseKet out(x.space(), x.drop_tolerance());
  for (int q = 0; q < p.modes.size(); ++q) {
    const double w = p.light_speed * p.modes.detunings[static_cast<std::size_t>(q)];
    if (w == 0.0) continue;
    out = out.plus(field_number(x, q), w);
  }
  return out;
}

// -(1/2)(signal absorption + emission)
SparseKet signal_part(const SparseKet& x, const EitParams& p, const Geometry& g) {
  return signal_absorption(x, p.g, p, g).plus(signal_emission(x, p.g, p, g)).scaled(-0.5);
}

// -(1/2)(control absorption + emission) at unit Rabi frequency
SparseKet control_part_unit(const SparseKet& x, const EitParams& p, const Geometry& g) {
  return control_absorption(x, 1.0, p, g).plus(control_emission(x, 1.0, p, g)).scaled(-0.5);
}

}  // namespace

double EitParams::theta(int atoms) const { return std::atan2(collective_coupling(atoms), omega); }

double EitParams::collective_coupling(int atoms) const { return g * std::sqrt(double(atoms)); }

void EitParams::validate() const {
  if (!(g > 0)) throw InvalidArgument("EitParams: g must be positive");
  if (!(omega >= 0) || !std::isfinite(omega)) throw InvalidArgument("EitParams: Omega must be finite and >= 0");
  if (modes.transition != Transition::raman) throw InvalidArgument("EitParams: EIT storage uses the Raman convention");
  if (modes.size() < 1) throw InvalidArgument("EitParams: need at least one signal mode");
  modes.validate();
}

EitParams EitParams::with_theta(double g, double theta, int atoms, ModeSet modes) {
  if (!(theta > 0) || theta > kHalfPi + 1e-15) {
    throw InvalidArgument("EitParams::with_theta: theta must lie in (0, pi/2]");
  }
  EitParams p;
  p.g = g;
  p.modes = std::move(modes);
  p.omega = std::abs(theta - kHalfPi) < 1e-15 ? 0.0 : g * std::sqrt(double(atoms)) / std::tan(theta);
  return p;
}

KetSpace eit_space(int atoms, int modes, int max_quanta) {
  return KetSpace::joint(atoms, modes, max_quanta, max_quanta, 1);
}

SparseKet apply_signal_absorption(const SparseKet& x, const EitParams& p, const Geometry& g) {
  check_space(x, p, g);
  return signal_absorption(x, p.g, p, g);
}

SparseKet apply_control_absorption(const SparseKet& x, const EitParams& p, const Geometry& g) {
  check_space(x, p, g);
  return control_absorption(x, p.omega, p, g);
}

SparseKet apply_dark_coupling(const SparseKet& x, const EitParams& p, const Geometry& g) {
  return apply_signal_absorption(x, p, g).plus(apply_control_absorption(x, p, g));
}

SparseKet apply_H_I(const SparseKet& x, const EitParams& p, const Geometry& g) {
  p.validate();
  check_space(x, p, g);
  SparseKet out = signal_part(x, p, g).plus(control_part_unit(x, p, g), p.omega);
  if (p.include_free_term) out = out.plus(free_term(x, p));
  return out;
}

SparseKet eit_storage_state(int n, int mode, const EitParams& p, const Geometry& g, const KetSpace& space) {
  const SparseKet atoms = storage_direct(StorageSpec::single(g.atoms(), p.k_storage(mode), n), g);
  return tensor(FieldConfig::vacuum(space.modes), atoms, space);
}

SparseKet a_excited_state(int n, int mode, const EitParams& p, const Geometry& g, const KetSpace& space) {
  const int N = g.atoms();
  if (n < 0 || n + 1 > N) throw InvalidArgument("a_excited_state: need n + 1 <= N");
  if (space.atoms != N) throw IncompatibleSpaces("a_excited_state: space atom count differs");
  const auto c_phase = g.phases(p.k_storage(mode));
  const auto a_phase = g.phases(signal_wavevector(p, mode));
  const double coeff = std::sqrt(factorial(n) / falling_factorial(N, n + 1));
  const FieldConfig field = FieldConfig::vacuum(space.modes);
  SparseKet out(space);
  for (Combinations comb(N, n); !comb.done(); comb.next()) {
    const auto& c_atoms = comb.current();
    Complex c_amp{1.0, 0.0};
    for (int i : c_atoms) c_amp *= c_phase[static_cast<std::size_t>(i)];
    for (int l = 0; l < N; ++l) {
      if (std::binary_search(c_atoms.begin(), c_atoms.end(), l)) continue;
      out.add(JointLabel{field, AtomConfig(N, c_atoms, {l})}, coeff * c_amp * a_phase[static_cast<std::size_t>(l)]);
    }
  }
  out.prune();
  return out;
}

SparseKet apply_polariton_dagger(const SparseKet& x, int mode, double theta, const EitParams& p,
                                 const Geometry& g) {
  check_space(x, p, g);
  SparseKet out = field_raise(x, mode).scaled(std::cos(theta));
  return out.plus(apply(sigma_dagger(p.k_storage(mode)), g, x), -std::sin(theta));
}

SparseKet apply_polariton(const SparseKet& x, int mode, double theta, const EitParams& p, const Geometry& g) {
  check_space(x, p, g);
  SparseKet out = field_lower(x, mode).scaled(std::cos(theta));
  return out.plus(apply(sigma(p.k_storage(mode)), g, x), -std::sin(theta));
}

SparseKet polariton_ladder_state(int n, int mode, double theta, const EitParams& p, const Geometry& g,
                                 const KetSpace& space) {
  if (n < 0) throw InvalidArgument("polariton_ladder_state: negative n");
  SparseKet x = vacuum(space);
  for (int i = 0; i < n; ++i) x = apply_polariton_dagger(x, mode, theta, p, g);
  return x.scaled(1.0 / std::sqrt(factorial(n)));
}

SparseKet dark_state(int n, int mode, double theta, const EitParams& p, const Geometry& g, DarkForm form,
                     const KetSpace& space) {
  if (form == DarkForm::exact) return normalize(polariton_ladder_state(n, mode, theta, p, g, space)).ket;
  SparseKet out(space);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  for (int m = 0; m <= n; ++m) {
    const double coeff = (m % 2 ? -1.0 : 1.0) * std::sqrt(binomial(n, m)) * std::pow(c, n - m) * std::pow(s, m);
    if (coeff == 0.0) continue;
    const FieldConfig field = FieldConfig::vacuum(space.modes).with_occupation(mode, n - m);
    const SparseKet atoms = storage_direct(StorageSpec::single(g.atoms(), p.k_storage(mode), m), g);
    for (const auto& [label, amp] : atoms) out.add(JointLabel{field, label.atoms}, coeff * amp);
  }
  out.prune();
  return out;
}

double null_eigenvalue_residual(int n, int mode, const EitParams& p, const Geometry& g, DarkForm form) {
  p.validate();
  if (p.include_free_term && p.modes.detunings.at(static_cast<std::size_t>(mode)) != 0.0) {
    throw InvalidArgument("null_eigenvalue_residual: detuned mode with the free term included");
  }
  if (n == 0) return 0.0;
  const KetSpace space = eit_space(g.atoms(), p.modes.size(), n);
  const SparseKet d = dark_state(n, mode, p.theta(g.atoms()), p, g, form, space);
  return apply_H_I(d, p, g).norm() / d.norm();
}

std::vector<double> dark_interference_residuals(int n, int mode, const EitParams& p, const Geometry& g) {
  p.validate();
  const KetSpace space = eit_space(g.atoms(), p.modes.size(), n);
  const SparseKet d = polariton_ladder_state(n, mode, p.theta(g.atoms()), p, g, space);
  const SparseKet both = apply_dark_coupling(d, p, g);
  std::vector<double> sq(static_cast<std::size_t>(n + 1), 0.0);
  for (const auto& [label, amp] : both) sq.at(static_cast<std::size_t>(label.field.total())) += std::norm(amp);
  for (auto& v : sq) v = std::sqrt(v);
  return sq;
}

SparseKet multimode_dark_state(const std::vector<int>& occupancies, double theta, const EitParams& p,
                               const Geometry& g, const KetSpace& space) {
  if (static_cast<int>(occupancies.size()) != p.modes.size()) {
    throw InvalidArgument("multimode_dark_state: one occupancy per mode required");
  }
  SparseKet x = vacuum(space);
  double norm = 1;
  for (int q = 0; q < p.modes.size(); ++q) {
    const int nq = occupancies[static_cast<std::size_t>(q)];
    if (nq < 0) throw InvalidArgument("multimode_dark_state: negative occupancy");
    for (int i = 0; i < nq; ++i) x = apply_polariton_dagger(x, q, theta, p, g);
    norm *= factorial(nq);
  }
  return normalize(x.scaled(1.0 / std::sqrt(norm))).ket;
}

double RampSchedule::theta_at(double t) const {
  const double s = std::clamp(t / duration, 0.0, 1.0);
  const double w = shape == RampShape::linear ? s : 0.5 * (1.0 - std::cos(std::numbers::pi * s));
  return theta_start + (theta_end - theta_start) * w;
}

void RampSchedule::validate() const {
  if (!(duration > 0)) throw InvalidArgument("RampSchedule: duration must be positive");
  for (double th : {theta_start, theta_end}) {
    if (th < 0 || th > kHalfPi + 1e-12) throw InvalidArgument("RampSchedule: theta outside [0, pi/2]");
  }
  if (max_step < 0) throw InvalidArgument("RampSchedule: negative step");
  if (!(omega_cap_ratio > 0)) throw InvalidArgument("RampSchedule: omega cap must be positive");
}

double ramp_omega(const RampSchedule& ramp, const EitParams& p, int atoms, double t) {
  const double G = p.collective_coupling(atoms);
  const double th = ramp.theta_at(t);
  const double cap = ramp.omega_cap_ratio * G;
  const double s = std::sin(th);
  if (std::abs(th - kHalfPi) < 1e-15) return 0.0;
  if (s * cap <= G * std::cos(th)) return cap;
  return G * std::cos(th) / s;
}

namespace {

// Occupation tuples with total <= max_total and each entry <= cap.
void enumerate_tuples(int modes, int max_total, int cap, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == modes) {
    out.push_back(cur);
    return;
  }
  int used = 0;
  for (int v : cur) used += v;
  for (int v = 0; v <= std::min(cap, max_total - used); ++v) {
    cur.push_back(v);
    enumerate_tuples(modes, max_total, cap, cur, out);
    cur.pop_back();
  }
}

double expectation_diag(const SectorBasis& basis, std::span<const Complex> psi, int which) {
  double s = 0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& l = basis.label(i);
    const int v = which == 0 ? l.field.total() : which == 1 ? l.atoms.n_c() : l.atoms.n_a();
    s += std::norm(psi[i]) * v;
  }
  return s;
}

}  // namespace

Trajectory adiabatic_sweep(const SparseKet& initial, const EitParams& p, const Geometry& g,
                           const RampSchedule& ramp) {
  p.validate();
  ramp.validate();
  check_space(initial, p, g);
  if (std::abs(initial.norm() - 1.0) > 1e-10) throw NotNormalized("adiabatic_sweep: initial ket must be normalized");
  const int N = g.atoms();
  const KetSpace& space = initial.space();
  const double G = p.collective_coupling(N);

  std::vector<LinearMap> generators{
      [&](const SparseKet& x) { return signal_part(x, p, g); },
      [&](const SparseKet& x) { return control_part_unit(x, p, g); },
  };
  if (p.include_free_term) generators.push_back([&](const SparseKet& x) { return free_term(x, p); });
  const SectorBasis basis = SectorBasis::closure(initial, generators);

  TimeDependentHamiltonian h;
  h.terms.push_back(assemble(basis, generators[0]));
  h.coefficients.emplace_back([](double) { return 1.0; });
  h.terms.push_back(assemble(basis, generators[1]));
  h.coefficients.emplace_back([&](double t) { return ramp_omega(ramp, p, N, t); });
  if (p.include_free_term) {
    h.terms.push_back(assemble(basis, generators[2]));
    h.coefficients.emplace_back([](double) { return 1.0; });
  }

  // Dark-state reference: project onto the dark states at the start angle.
  auto effective_theta = [&](double t) { return std::atan2(G, ramp_omega(ramp, p, N, t)); };
  std::vector<std::vector<int>> tuples;
  std::vector<int> cur;
  const int max_total = std::min(space.caps.max_photons, space.caps.max_excitations);
  enumerate_tuples(space.modes, max_total, space.caps.fock_cap, cur, tuples);
  std::vector<std::pair<std::vector<int>, Complex>> weights;
  const double theta0 = effective_theta(0.0);
  for (const auto& tup : tuples) {
    const Complex w = inner_product(multimode_dark_state(tup, theta0, p, g, space), initial);
    if (std::abs(w) > 1e-14) weights.emplace_back(tup, w);
  }
  auto reference = [&](double theta) -> std::optional<SparseKet> {
    SparseKet ref(space);
    for (const auto& [tup, w] : weights) ref = ref.plus(multimode_dark_state(tup, theta, p, g, space), w);
    if (ref.norm() == 0.0) return std::nullopt;
    return normalize(ref).ket;
  };

  double omega_max = 0;
  if (ramp.max_step == 0) {
    const std::size_t probes = 4096;
    for (std::size_t i = 0; i <= probes; ++i) {
      omega_max = std::max(omega_max, ramp_omega(ramp, p, N, ramp.duration * double(i) / probes));
    }
  }
  Rk4Options opt;
  opt.max_step = ramp.max_step > 0 ? ramp.max_step : 0.01 / std::max(G, omega_max);
  opt.norm_drift_bound = ramp.norm_drift_bound;
  const auto est_steps = static_cast<std::size_t>(std::ceil(ramp.duration / opt.max_step));
  opt.sample_every = ramp.samples ? std::max<std::size_t>(1, est_steps / ramp.samples) : 0;

  Trajectory tr{{}, SparseKet(space), {}};
  auto observer = [&](std::size_t, double t, std::span<const Complex> psi) {
    TrajectorySample s;
    s.t = t;
    s.omega = ramp_omega(ramp, p, N, t);
    s.theta = effective_theta(t);
    s.norm = std::sqrt(kernels::squared_norm(psi, kernels::Exec::serial));
    if (auto ref = reference(s.theta)) {
      const SparseKet state = basis.to_sparse(psi);
      s.dark_fidelity = std::norm(inner_product(*ref, state)) / (s.norm * s.norm);
    }
    s.photon_expectation = expectation_diag(basis, psi, 0);
    s.c_population = expectation_diag(basis, psi, 1);
    s.a_population = expectation_diag(basis, psi, 2);
    tr.samples.push_back(s);
  };

  std::vector<Complex> psi = basis.to_dense(initial);
  Rk4Propagator prop(std::move(h));
  tr.stats = prop.propagate(psi, 0.0, ramp.duration, opt, observer);
  tr.final_state = basis.to_sparse(psi);
  return tr;
}

void write_trajectory_csv(const Trajectory& tr, std::ostream& os) {
  os << "t,omega,theta,norm,dark_fidelity,photon_expectation,c_population\n";
  os.precision(17);
  for (const auto& s : tr.samples) {
    os << s.t << ',' << s.omega << ',' << s.theta << ',' << s.norm << ',' << s.dark_fidelity << ','
       << s.photon_expectation << ',' << s.c_population << '\n';
  }
}

std::string to_string(RampShape shape) {
  return shape == RampShape::linear ? "linear" : "smooth-cosine";
}

RampShape ramp_shape_from_string(const std::string& s) {
  if (s == "linear") return RampShape::linear;
  if (s == "smooth-cosine") return RampShape::smooth_cosine;
  throw InvalidArgument("unknown ramp shape '" + s + "' (linear | smooth-cosine)");
}

}  // namespace qstore
