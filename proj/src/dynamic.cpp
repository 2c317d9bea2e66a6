#include <qstore/dynamic.hpp>

#include <qstore/operators.hpp>
#include <qstore/storage.hpp>

#include <cmath>
#include <numbers>
#include <ostream>

namespace qstore {

BosonicState::BosonicState(int max_photons, int max_excitations)
    : m_max_(max_photons), n_max_(max_excitations) {
  if (max_photons < 0 || max_excitations < 0) throw InvalidArgument("BosonicState: negative cap");
  xi_.assign(static_cast<std::size_t>((m_max_ + 1) * (n_max_ + 1)), Complex{});
}

BosonicState BosonicState::fock(int photons, int excitations, int max_photons, int max_excitations) {
  BosonicState s(max_photons, max_excitations);
  s.at(photons, excitations) = 1.0;
  return s;
}

BosonicState BosonicState::product(std::span<const Complex> field, std::span<const Complex> atoms,
                                   int max_photons, int max_excitations) {
  BosonicState s(max_photons, max_excitations);
  for (std::size_t m = 0; m < field.size(); ++m) {
    for (std::size_t n = 0; n < atoms.size(); ++n) {
      const Complex v = field[m] * atoms[n];
      if (v != Complex{}) s.at(static_cast<int>(m), static_cast<int>(n)) = v;
    }
  }
  return s;
}

Complex& BosonicState::at(int m, int n) {
  if (m < 0 || m > m_max_ || n < 0 || n > n_max_) {
    throw SectorOverflow("BosonicState: (" + std::to_string(m) + "," + std::to_string(n) + ") outside caps");
  }
  return xi_[static_cast<std::size_t>(m * (n_max_ + 1) + n)];
}

Complex BosonicState::at(int m, int n) const {
  if (m < 0 || m > m_max_ || n < 0 || n > n_max_) return {};
  return xi_[static_cast<std::size_t>(m * (n_max_ + 1) + n)];
}

int BosonicState::max_quanta() const {
  int q = -1;
  for (int m = 0; m <= m_max_; ++m) {
    for (int n = 0; n <= n_max_; ++n) {
      if (at(m, n) != Complex{}) q = std::max(q, m + n);
    }
  }
  return q;
}

double BosonicState::squared_norm() const {
  double s = 0;
  for (auto v : xi_) s += std::norm(v);
  return s;
}

namespace {

void require_same_caps(const BosonicState& x, const BosonicState& y) {
  if (x.max_photons() != y.max_photons() || x.max_excitations() != y.max_excitations()) {
    throw IncompatibleSpaces("BosonicState: caps differ");
  }
}

void require_room(const BosonicState& s) {
  const int q = s.max_quanta();
  if (q > s.max_photons() || q > s.max_excitations()) {
    throw SectorOverflow("BosonicState: " + std::to_string(q) +
                         " quanta do not fit the caps; exchange would overflow");
  }
}

}  // namespace

Complex overlap(const BosonicState& x, const BosonicState& y) {
  require_same_caps(x, y);
  Complex s{};
  for (std::size_t i = 0; i < x.data().size(); ++i) s += std::conj(x.data()[i]) * y.data()[i];
  return s;
}

double fidelity(const BosonicState& x, const BosonicState& y, double norm_tolerance) {
  const double nx = std::sqrt(x.squared_norm());
  const double ny = std::sqrt(y.squared_norm());
  if (std::abs(nx - 1) > norm_tolerance || std::abs(ny - 1) > norm_tolerance) {
    throw NotNormalized("fidelity: bosonic states must be normalized");
  }
  return std::norm(overlap(x, y));
}

BosonicState evolve_analytic(const BosonicState& state, double omega_t) {
  require_room(state);
  const double c = std::cos(omega_t);
  const Complex mis{0.0, -std::sin(omega_t)};  // -i sin
  BosonicState out(state.max_photons(), state.max_excitations());
  for (int m = 0; m <= state.max_photons(); ++m) {
    for (int n = 0; n <= state.max_excitations(); ++n) {
      const Complex xi = state.at(m, n);
      if (xi == Complex{}) continue;
      // [a^dag c - i sigma^dag s]^m [sigma^dag c - i a^dag s]^n |0,0> / sqrt(m! n!)
      const double norm = 1.0 / std::sqrt(factorial(m) * factorial(n));
      for (int j = 0; j <= m; ++j) {
        for (int l = 0; l <= n; ++l) {
          const int photons = m - j + l;
          const int excitations = j + n - l;
          const Complex coeff = binomial(m, j) * binomial(n, l) * std::pow(c, m - j + n - l) *
                                std::pow(mis, j + l) *
                                std::sqrt(factorial(photons) * factorial(excitations)) * norm;
          out.at(photons, excitations) += xi * coeff;
        }
      }
    }
  }
  return out;
}

BosonicState integrate_two_boson(const BosonicState& state, double omega_t, double max_step) {
  require_room(state);
  const int M = state.max_photons();
  const int Nn = state.max_excitations();
  auto idx = [Nn](int m, int n) { return static_cast<std::uint32_t>(m * (Nn + 1) + n); };
  std::vector<kernels::Triplet> t;
  for (int m = 0; m <= M; ++m) {
    for (int n = 0; n <= Nn; ++n) {
      // a sigma^dag |m,n> = sqrt(m) sqrt(n+1) |m-1,n+1>
      if (m > 0 && n < Nn) t.push_back({idx(m - 1, n + 1), idx(m, n), std::sqrt(double(m) * (n + 1))});
      if (n > 0 && m < M) t.push_back({idx(m + 1, n - 1), idx(m, n), std::sqrt(double(n) * (m + 1))});
    }
  }
  const std::size_t dim = state.data().size();
  TimeDependentHamiltonian h;
  h.terms.push_back(kernels::csr_from_triplets(dim, dim, std::move(t)));
  h.coefficients.emplace_back([](double) { return 1.0; });
  Rk4Propagator prop(std::move(h));
  BosonicState out = state;
  Rk4Options opt;
  opt.max_step = max_step;
  opt.norm_drift_bound = 1e-8;
  prop.propagate(out.data(), 0.0, omega_t, opt);
  return out;
}

double field_purity(const BosonicState& s) {
  double p = 0;
  for (int m = 0; m <= s.max_photons(); ++m) {
    for (int mp = 0; mp <= s.max_photons(); ++mp) {
      Complex rho{};
      for (int n = 0; n <= s.max_excitations(); ++n) rho += s.at(m, n) * std::conj(s.at(mp, n));
      p += std::norm(rho);
    }
  }
  return p;
}

std::string to_string(Associate which) {
  switch (which) {
    case Associate::plus_i: return "(+i)";
    case Associate::minus_i: return "(-i)";
    case Associate::minus: return "(-)";
  }
  return "?";
}

std::vector<Complex> associate_state(std::span<const Complex> amplitudes, Associate which) {
  const Complex unit = which == Associate::plus_i ? Complex{0, 1}
                       : which == Associate::minus_i ? Complex{0, -1}
                                                     : Complex{-1, 0};
  std::vector<Complex> out(amplitudes.begin(), amplitudes.end());
  Complex phase{1, 0};
  for (auto& a : out) {
    a *= phase;
    phase *= unit;
  }
  return out;
}

Complex amplitude_expectation(std::span<const Complex> amplitudes) {
  // <Phi|a|Phi> = sum_m sqrt(m) conj(alpha_{m-1}) alpha_m
  Complex s{};
  for (std::size_t m = 1; m < amplitudes.size(); ++m) {
    s += std::sqrt(double(m)) * std::conj(amplitudes[m - 1]) * amplitudes[m];
  }
  return s;
}

std::vector<Complex> coherent_amplitudes(Complex alpha, int max_photons) {
  std::vector<Complex> out(static_cast<std::size_t>(max_photons + 1));
  Complex term = 1.0;
  double norm = 0;
  for (int m = 0; m <= max_photons; ++m) {
    if (m > 0) term *= alpha / std::sqrt(double(m));
    out[static_cast<std::size_t>(m)] = term;
    norm += std::norm(term);
  }
  for (auto& v : out) v /= std::sqrt(norm);
  return out;
}

SwapReport swap_check(std::span<const Complex> field, std::span<const Complex> atoms,
                      std::span<const double> omega_times, double tolerance) {
  const int quanta = static_cast<int>(field.size() + atoms.size()) - 2;
  const int cap = std::max(quanta, 0);
  const BosonicState initial = BosonicState::product(field, atoms, cap, cap);
  if (std::abs(initial.squared_norm() - 1.0) > 1e-12) throw NotNormalized("swap_check: inputs must be normalized");

  SwapReport report;
  for (double t : omega_times) {
    SwapCheckpoint cp;
    cp.omega_t = t;
    const BosonicState evolved = evolve_analytic(initial, t);
    cp.field_purity = field_purity(evolved);

    const double quarter = t / (std::numbers::pi / 2);
    const double k = std::round(quarter);
    if (std::abs(quarter - k) < 1e-9) {
      const int phase = ((static_cast<int>(k) % 4) + 4) % 4;
      std::vector<Complex> f, a;
      switch (phase) {
        case 0:
          f.assign(field.begin(), field.end());
          a.assign(atoms.begin(), atoms.end());
          cp.expected = "|Phi1,Phi2>";
          break;
        case 1:
          f = associate_state(atoms, Associate::minus_i);
          a = associate_state(field, Associate::minus_i);
          cp.expected = "|Phi2(-i),Phi1(-i)>";
          break;
        case 2:
          f = associate_state(field, Associate::minus);
          a = associate_state(atoms, Associate::minus);
          cp.expected = "|Phi1(-),Phi2(-)>";
          break;
        case 3:
          f = associate_state(atoms, Associate::plus_i);
          a = associate_state(field, Associate::plus_i);
          cp.expected = "|Phi2(+i),Phi1(+i)>";
          break;
      }
      const BosonicState target = BosonicState::product(f, a, cap, cap);
      cp.fidelity = fidelity(target, evolved);
      cp.pass = std::abs(*cp.fidelity - 1.0) <= tolerance;
      report.all_pass = report.all_pass && cp.pass;
    }
    report.checkpoints.push_back(cp);
  }
  return report;
}

KetSpace transfer_space(int atoms, int max_quanta) {
  return KetSpace::joint(atoms, 1, max_quanta, max_quanta, 0);
}

SparseKet embed(const BosonicState& state, double k, const Geometry& g, const KetSpace& space) {
  if (space.modes != 1) throw IncompatibleSpaces("embed: transfer space has exactly one field mode");
  SparseKet out(space);
  for (int n = 0; n <= state.max_excitations(); ++n) {
    bool any = false;
    for (int m = 0; m <= state.max_photons(); ++m) any = any || state.at(m, n) != Complex{};
    if (!any) continue;
    if (n > g.atoms()) throw SectorOverflow("embed: more excitations than atoms");
    const SparseKet atoms = storage_direct(StorageSpec::single(g.atoms(), k, n), g);
    for (int m = 0; m <= state.max_photons(); ++m) {
      const Complex xi = state.at(m, n);
      if (xi == Complex{}) continue;
      for (const auto& [label, amp] : atoms) out.add(JointLabel{FieldConfig({m}), label.atoms}, xi * amp);
    }
  }
  out.prune();
  return out;
}

SparseKet evolve_exact_atoms(const SparseKet& initial, double omega, double t, double k, const Geometry& g,
                             const ExactTransferOptions& options) {
  if (initial.space().modes != 1) throw IncompatibleSpaces("evolve_exact_atoms: one field mode expected");
  if (!(omega > 0)) throw InvalidArgument("evolve_exact_atoms: Omega must be positive");
  if (t == 0.0) return initial;
  const LinearMap coupling = [&](const SparseKet& x) {
    // a sigma^dag + a^dag sigma; lower first so no intermediate leaves the caps
    SparseKet out = apply(sigma_dagger(k), g, field_lower(x, 0));
    return out.plus(field_raise(apply(sigma(k), g, x), 0));
  };
  const std::vector<LinearMap> gens{coupling};
  const SectorBasis basis = SectorBasis::closure(initial, gens);
  TimeDependentHamiltonian h;
  h.terms.push_back(assemble(basis, coupling));
  h.coefficients.emplace_back([omega](double) { return omega; });
  Rk4Propagator prop(std::move(h));
  std::vector<Complex> psi = basis.to_dense(initial);
  Rk4Options opt;
  opt.max_step = options.max_step_omega / omega;
  opt.norm_drift_bound = options.norm_drift_bound;
  prop.propagate(psi, 0.0, t, opt);
  return basis.to_sparse(psi);
}

double finite_n_deviation(const BosonicState& initial, const Geometry& g, double k, double omega_t,
                          const ExactTransferOptions& options) {
  const int quanta = initial.max_quanta();
  const KetSpace space = transfer_space(g.atoms(), quanta);
  const SparseKet start = embed(initial, k, g, space);
  const SparseKet exact = evolve_exact_atoms(start, 1.0, omega_t, k, g, options);
  const SparseKet ideal = embed(evolve_analytic(initial, omega_t), k, g, space);
  return exact.minus(ideal).norm();
}

void write_transfer_csv(const BosonicState& initial, std::span<const double> omega_times, std::ostream& os) {
  BosonicState swapped(initial.max_excitations(), initial.max_photons());
  for (int m = 0; m <= initial.max_photons(); ++m) {
    for (int n = 0; n <= initial.max_excitations(); ++n) {
      static const Complex powers[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
      if (initial.at(m, n) != Complex{}) swapped.at(n, m) = powers[(m + n) % 4] * initial.at(m, n);
    }
  }
  os << "omega_t,fidelity_initial,fidelity_swapped,field_purity\n";
  os.precision(17);
  for (double t : omega_times) {
    const BosonicState s = evolve_analytic(initial, t);
    double f_swapped = 0;
    if (swapped.max_photons() == s.max_photons() && swapped.max_excitations() == s.max_excitations()) {
      f_swapped = std::norm(overlap(swapped, s));
    }
    os << t << ',' << std::norm(overlap(initial, s)) << ',' << f_swapped << ',' << field_purity(s) << '\n';
  }
}

}  // namespace qstore
