#include <qstore/operators.hpp>

#include <cmath>
#include <vector>

namespace qstore {

std::string to_string(OpKind kind) {
  switch (kind) {
    case OpKind::sigma: return "sigma";
    case OpKind::sigma_dagger: return "sigma_dagger";
    case OpKind::rho_ab: return "rho_ab";
    case OpKind::rho_ab_dagger: return "rho_ab_dagger";
    case OpKind::rho_ac: return "rho_ac";
    case OpKind::rho_ac_dagger: return "rho_ac_dagger";
    case OpKind::pop_b: return "pop_b";
    case OpKind::pop_c: return "pop_c";
    case OpKind::pop_a: return "pop_a";
    case OpKind::R1: return "R1";
    case OpKind::R2: return "R2";
    case OpKind::R3: return "R3";
    case OpKind::R_squared: return "R_squared";
  }
  return "?";
}

bool requires_wavevector(OpKind kind) {
  switch (kind) {
    case OpKind::pop_b:
    case OpKind::pop_c:
    case OpKind::pop_a:
      return false;
    default:
      return true;
  }
}

void OperatorSpec::validate() const {
  if (requires_wavevector(kind) && !wavevector) {
    throw InvalidArgument("operator " + to_string(kind) + " requires a wavevector");
  }
  if (!requires_wavevector(kind) && wavevector) {
    throw InvalidArgument("operator " + to_string(kind) + " takes no wavevector");
  }
}

namespace {

using Contribution = std::pair<JointLabel, Complex>;

// Visits b-atoms of `cfg`, i.e. those in neither index set.
template <class Fn>
void for_each_b(const AtomConfig& cfg, Fn&& fn) {
  auto c = cfg.c_atoms();
  auto a = cfg.a_atoms();
  std::size_t ic = 0, ia = 0;
  for (int j = 0; j < cfg.atoms(); ++j) {
    if (ic < c.size() && c[ic] == j) { ++ic; continue; }
    if (ia < a.size() && a[ia] == j) { ++ia; continue; }
    fn(j);
  }
}

void transition_contributions(const JointLabel& label, Complex amp, Level from, Level to,
                              std::span<const Complex> phases, double prefactor,
                              std::vector<Contribution>& out) {
  auto emit = [&](int j) {
    out.emplace_back(JointLabel{label.field, label.atoms.with_level(j, to)},
                     amp * prefactor * phases[static_cast<std::size_t>(j)]);
  };
  switch (from) {
    case Level::b: for_each_b(label.atoms, emit); break;
    case Level::c: for (auto j : label.atoms.c_atoms()) emit(j); break;
    case Level::a: for (auto j : label.atoms.a_atoms()) emit(j); break;
  }
}

std::vector<Complex> conj_all(std::vector<Complex> v) {
  for (auto& z : v) z = std::conj(z);
  return v;
}

}  // namespace

SparseKet apply_transition(const SparseKet& x, Level from, Level to, std::span<const Complex> phases,
                           double prefactor, kernels::Exec exec) {
  if (phases.size() != static_cast<std::size_t>(x.space().atoms)) {
    throw IncompatibleSpaces("apply_transition: phase vector length differs from atom count");
  }
  std::vector<SparseKet::const_iterator> entries;
  entries.reserve(x.size());
  for (auto it = x.begin(); it != x.end(); ++it) entries.push_back(it);

  // Contributions are produced per entry (possibly in parallel) and merged in
  // entry order, so the result does not depend on the thread count.
  std::vector<std::vector<Contribution>> produced(entries.size());
  const auto n = static_cast<std::ptrdiff_t>(entries.size());
  const bool par = exec == kernels::Exec::parallel && entries.size() >= kernels::kParallelThreshold;
#pragma omp parallel for schedule(dynamic, 16) if (par)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& e = *entries[static_cast<std::size_t>(i)];
    transition_contributions(e.first, e.second, from, to, phases, prefactor,
                             produced[static_cast<std::size_t>(i)]);
  }

  SparseKet out(x.space(), x.drop_tolerance());
  for (auto& bucket : produced) {
    for (auto& [label, amp] : bucket) out.add(std::move(label), amp);
  }
  out.prune();
  return out;
}

SparseKet apply_population(const SparseKet& x, Level level) {
  SparseKet out(x.space(), x.drop_tolerance());
  for (const auto& [label, amp] : x) {
    int count = 0;
    switch (level) {
      case Level::b: count = label.atoms.atoms() - label.atoms.excitations(); break;
      case Level::c: count = label.atoms.n_c(); break;
      case Level::a: count = label.atoms.n_a(); break;
    }
    out.add(label, amp * static_cast<double>(count));
  }
  out.prune();
  return out;
}

SparseKet field_lower(const SparseKet& x, int mode) {
  if (mode < 0 || mode >= x.space().modes) throw InvalidArgument("field_lower: no such mode");
  SparseKet out(x.space(), x.drop_tolerance());
  for (const auto& [label, amp] : x) {
    const int n = label.field[mode];
    if (n == 0) continue;
    out.add(JointLabel{label.field.with_occupation(mode, n - 1), label.atoms}, amp * std::sqrt(double(n)));
  }
  out.prune();
  return out;
}

SparseKet field_raise(const SparseKet& x, int mode) {
  if (mode < 0 || mode >= x.space().modes) throw InvalidArgument("field_raise: no such mode");
  SparseKet out(x.space(), x.drop_tolerance());
  for (const auto& [label, amp] : x) {
    const int n = label.field[mode];
    out.add(JointLabel{label.field.with_occupation(mode, n + 1), label.atoms}, amp * std::sqrt(double(n + 1)));
  }
  out.prune();
  return out;
}

SparseKet field_number(const SparseKet& x, int mode) {
  if (mode < 0 || mode >= x.space().modes) throw InvalidArgument("field_number: no such mode");
  SparseKet out(x.space(), x.drop_tolerance());
  for (const auto& [label, amp] : x) out.add(label, amp * double(label.field[mode]));
  out.prune();
  return out;
}

SparseKet total_photon_number(const SparseKet& x) {
  SparseKet out(x.space(), x.drop_tolerance());
  for (const auto& [label, amp] : x) out.add(label, amp * double(label.field.total()));
  out.prune();
  return out;
}

SparseKet apply(const OperatorSpec& op, const Geometry& g, const SparseKet& x, kernels::Exec exec) {
  op.validate();
  if (g.atoms() != x.space().atoms) throw IncompatibleSpaces("apply: geometry atom count differs from ket");
  const int N = g.atoms();
  const double inv_sqrt_n = 1.0 / std::sqrt(double(N));
  const double inv_n = 1.0 / N;
  auto phases = [&] { return g.phases(*op.wavevector); };
  auto lower = [&](const SparseKet& v) {
    return apply_transition(v, Level::c, Level::b, conj_all(phases()), inv_sqrt_n, exec);
  };
  auto raise = [&](const SparseKet& v) {
    return apply_transition(v, Level::b, Level::c, phases(), inv_sqrt_n, exec);
  };

  switch (op.kind) {
    case OpKind::sigma: return lower(x);
    case OpKind::sigma_dagger: return raise(x);
    case OpKind::rho_ab: return apply_transition(x, Level::b, Level::a, phases(), inv_n, exec);
    case OpKind::rho_ab_dagger: return apply_transition(x, Level::a, Level::b, conj_all(phases()), inv_n, exec);
    case OpKind::rho_ac: return apply_transition(x, Level::c, Level::a, phases(), inv_n, exec);
    case OpKind::rho_ac_dagger: return apply_transition(x, Level::a, Level::c, conj_all(phases()), inv_n, exec);
    case OpKind::pop_b: return apply_population(x, Level::b);
    case OpKind::pop_c: return apply_population(x, Level::c);
    case OpKind::pop_a: return apply_population(x, Level::a);
    case OpKind::R1: {
      const double s = std::sqrt(double(N)) / 2;
      return raise(x).plus(lower(x)).scaled(s);
    }
    case OpKind::R2: {
      const Complex s{0.0, -std::sqrt(double(N)) / 2};
      return raise(x).minus(lower(x)).scaled(s);
    }
    case OpKind::R3: {
      // (N/2)(sigma^dag sigma - sigma sigma^dag)
      return raise(lower(x)).minus(lower(raise(x))).scaled(N / 2.0);
    }
    case OpKind::R_squared: {
      const SparseKet up_down = raise(lower(x));
      const SparseKet down_up = lower(raise(x));
      const SparseKet first = up_down.plus(down_up).scaled(N / 2.0);
      // (sigma^dag sigma - sigma sigma^dag)^2 x
      const SparseKet d = up_down.minus(down_up);
      const SparseKet d2 = raise(lower(d)).minus(lower(raise(d)));
      return first.plus(d2, N * double(N) / 4.0);
    }
  }
  throw InvalidArgument("apply: unknown operator kind");
}

Complex matrix_element(const SparseKet& x, const OperatorSpec& a, const Geometry& g, const SparseKet& y) {
  return inner_product(x, apply(a, g, y));
}

Complex commutator_matrix_element(const OperatorSpec& a, const OperatorSpec& b, const Geometry& g,
                                  const SparseKet& x, const SparseKet& y) {
  const SparseKet ab = apply(a, g, apply(b, g, y));
  const SparseKet ba = apply(b, g, apply(a, g, y));
  return inner_product(x, ab) - inner_product(x, ba);
}

EigenCheck angular_momentum_eigencheck(const SparseKet& x, double k, const Geometry& g) {
  const double nx = x.squared_norm();
  if (nx == 0) throw ZeroNorm("angular_momentum_eigencheck: zero ket");
  EigenCheck out;
  const SparseKet r3x = apply({OpKind::R3, k}, g, x);
  const SparseKet r2x = apply({OpKind::R_squared, k}, g, x);
  out.r3 = inner_product(x, r3x).real() / nx;
  out.r_squared = inner_product(x, r2x).real() / nx;
  out.r3_residual = r3x.plus(x, -out.r3).norm();
  out.r_squared_residual = r2x.plus(x, -out.r_squared).norm();
  return out;
}

}  // namespace qstore
