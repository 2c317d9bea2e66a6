#include <qstore/storage.hpp>

#include <qstore/operators.hpp>

#include <algorithm>
#include <cmath>

namespace qstore {

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double falling_factorial(int n, int k) {
  double f = 1;
  for (int i = 0; i < k; ++i) f *= (n - i);
  return f;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  return falling_factorial(n, k) / factorial(k);
}

Combinations::Combinations(int n, int k) : n_(n), idx_(static_cast<std::size_t>(std::max(k, 0))) {
  if (k < 0 || k > n) {
    done_ = true;
    return;
  }
  for (int i = 0; i < k; ++i) idx_[static_cast<std::size_t>(i)] = i;
}

void Combinations::next() {
  const int k = static_cast<int>(idx_.size());
  int i = k - 1;
  while (i >= 0 && idx_[static_cast<std::size_t>(i)] == n_ - k + i) --i;
  if (i < 0) {
    done_ = true;
    return;
  }
  ++idx_[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j) idx_[static_cast<std::size_t>(j)] = idx_[static_cast<std::size_t>(j - 1)] + 1;
}

int StorageSpec::excitations() const {
  int n = 0;
  for (const auto& m : modes) n += m.count;
  return n;
}

void StorageSpec::validate() const {
  if (atoms < 1) throw InvalidArgument("StorageSpec: atom count must be positive");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].count < 0) throw InvalidArgument("StorageSpec: negative occupation");
    for (std::size_t j = i + 1; j < modes.size(); ++j) {
      if (modes[i].wavevector == modes[j].wavevector) {
        throw InvalidArgument("StorageSpec: duplicate mode wavevector");
      }
    }
  }
  if (excitations() > atoms) {
    throw InvalidArgument("StorageSpec: " + std::to_string(excitations()) +
                          " excitations exceed N=" + std::to_string(atoms));
  }
}

SparseKet vacuum(const KetSpace& space) {
  return SparseKet::basis(space, JointLabel{FieldConfig::vacuum(space.modes), AtomConfig::ground(space.atoms)});
}

SparseKet vacuum(int atoms, int max_excitations) {
  return vacuum(KetSpace::atoms_only(atoms, max_excitations));
}

namespace {

std::vector<int> counts_of(const StorageSpec& spec) {
  std::vector<int> c;
  for (const auto& m : spec.modes) c.push_back(m.count);
  return c;
}

// Mode label per excitation, sorted: m_1 copies of 0, m_2 copies of 1, ...
std::vector<int> mode_labels(const StorageSpec& spec) {
  std::vector<int> labels;
  for (std::size_t i = 0; i < spec.modes.size(); ++i) {
    labels.insert(labels.end(), static_cast<std::size_t>(spec.modes[i].count), static_cast<int>(i));
  }
  return labels;
}

// Sum over the distinct assignments of mode labels to the chosen atoms.
Complex assignment_phase_sum(const std::vector<int>& atoms_idx, std::vector<int> labels,
                             const std::vector<std::vector<Complex>>& phase) {
  Complex s{};
  do {
    Complex term{1.0, 0.0};
    for (std::size_t p = 0; p < labels.size(); ++p) {
      term *= phase[static_cast<std::size_t>(labels[p])][static_cast<std::size_t>(atoms_idx[p])];
    }
    s += term;
  } while (std::next_permutation(labels.begin(), labels.end()));
  return s;
}

std::vector<std::vector<Complex>> mode_phases(const StorageSpec& spec, const Geometry& g) {
  std::vector<std::vector<Complex>> out;
  for (const auto& m : spec.modes) out.push_back(g.phases(m.wavevector));
  return out;
}

void check_geometry(const StorageSpec& spec, const Geometry& g) {
  if (g.atoms() != spec.atoms) throw IncompatibleSpaces("storage state: geometry atom count differs");
}

}  // namespace

SparseKet storage_direct(const StorageSpec& spec, const Geometry& g, const KetSpace& space) {
  spec.validate();
  check_geometry(spec, g);
  if (space.atoms != spec.atoms) throw IncompatibleSpaces("storage_direct: space atom count differs");
  const int n = spec.excitations();
  const auto labels = mode_labels(spec);
  const auto phase = mode_phases(spec, g);
  const FieldConfig field = FieldConfig::vacuum(space.modes);

  SparseKet raw(space);
  for (Combinations comb(spec.atoms, n); !comb.done(); comb.next()) {
    const Complex amp = assignment_phase_sum(comb.current(), labels, phase);
    raw.add(JointLabel{field, AtomConfig(spec.atoms, comb.current())}, amp);
  }
  raw.prune();
  return normalize(raw).ket;
}

SparseKet storage_direct(const StorageSpec& spec, const Geometry& g) {
  return storage_direct(spec, g, KetSpace::atoms_only(spec.atoms, spec.excitations()));
}

LadderResult storage_ladder(const StorageSpec& spec, const Geometry& g, const KetSpace& space) {
  spec.validate();
  check_geometry(spec, g);
  SparseKet x = vacuum(space);
  for (const auto& m : spec.modes) {
    for (int i = 0; i < m.count; ++i) x = apply(sigma_dagger(m.wavevector), g, x);
  }
  auto [ket, norm] = normalize(x);
  return {std::move(ket), norm};
}

LadderResult storage_ladder(const StorageSpec& spec, const Geometry& g) {
  return storage_ladder(spec, g, KetSpace::atoms_only(spec.atoms, spec.excitations()));
}

double ladder_prefactor(int atoms, const std::vector<int>& counts) {
  int n = 0;
  double mfact = 1;
  for (int c : counts) {
    n += c;
    mfact *= factorial(c);
  }
  return std::sqrt(falling_factorial(atoms, n) / std::pow(double(atoms), n)) * std::sqrt(mfact);
}

double asymptotic_coefficient(int atoms, const std::vector<int>& counts) {
  int n = 0;
  double mfact = 1;
  for (int c : counts) {
    n += c;
    mfact *= factorial(c);
  }
  return std::sqrt(mfact / falling_factorial(atoms, n));
}

NormalizationAudit normalization_audit(const StorageSpec& spec, const Geometry& g) {
  spec.validate();
  check_geometry(spec, g);
  const int n = spec.excitations();
  const auto labels = mode_labels(spec);
  const auto phase = mode_phases(spec, g);
  const auto counts = counts_of(spec);

  NormalizationAudit a;
  for (Combinations comb(spec.atoms, n); !comb.done(); comb.next()) {
    a.raw_squared_norm += std::norm(assignment_phase_sum(comb.current(), labels, phase));
  }
  double mfact = 1;
  for (int c : counts) mfact *= factorial(c);
  a.diagonal_term = falling_factorial(spec.atoms, n) / mfact;
  a.cross_term = a.raw_squared_norm - a.diagonal_term;
  a.asymptotic_coefficient = asymptotic_coefficient(spec.atoms, counts);
  a.numeric_coefficient = 1.0 / std::sqrt(a.raw_squared_norm);
  a.relative_deviation = std::abs(a.numeric_coefficient - a.asymptotic_coefficient) / a.asymptotic_coefficient;
  a.norm_with_asymptotic = a.asymptotic_coefficient * std::sqrt(a.raw_squared_norm);
  return a;
}

double raw_squared_norm_by_permutations(const StorageSpec& spec, const Geometry& g) {
  spec.validate();
  check_geometry(spec, g);
  const int n = spec.excitations();
  const auto phase = mode_phases(spec, g);
  const auto labels = mode_labels(spec);
  double mfact = 1;
  for (const auto& m : spec.modes) mfact *= factorial(m.count);

  double total = 0;
  for (Combinations comb(spec.atoms, n); !comb.done(); comb.next()) {
    // Every ordering of the excited atoms against the fixed label sequence.
    std::vector<int> order = comb.current();
    Complex s{};
    do {
      Complex term{1.0, 0.0};
      for (std::size_t p = 0; p < labels.size(); ++p) {
        term *= phase[static_cast<std::size_t>(labels[p])][static_cast<std::size_t>(order[p])];
      }
      s += term;
    } while (std::next_permutation(order.begin(), order.end()));
    total += std::norm(s / mfact);
  }
  return total;
}

AddModeReport add_mode_check(int atoms, double k1, int m1, double k2, const Geometry& g) {
  const KetSpace space = KetSpace::atoms_only(atoms, m1 + 1);
  const SparseKet base = storage_direct(StorageSpec::single(atoms, k1, m1), g, space);
  const SparseKet raised = apply(sigma_dagger(k2), g, base);
  const SparseKet target = storage_direct(StorageSpec{atoms, {{k2, 1}, {k1, m1}}}, g, space);
  AddModeReport r;
  r.amplitude = inner_product(target, raised);
  r.fidelity = fidelity(normalize(raised).ket, target);
  r.amplitude_deviation = std::abs(1.0 - std::abs(r.amplitude));
  return r;
}

}  // namespace qstore
