#pragma once

// Seeded generators and brute-force oracles shared by the unit suites.

#include <qstore/core_state.hpp>
#include <qstore/geometry.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace qstore::testing {

inline double max_abs_diff(const SparseKet& x, const SparseKet& y) {
  double worst = 0;
  for (const auto& [l, a] : x) worst = std::max(worst, std::abs(a - y.amplitude(l)));
  for (const auto& [l, a] : y) worst = std::max(worst, std::abs(a - x.amplitude(l)));
  return worst;
}

/// Random ket over atom-only labels with up to `max_exc` c-atoms, about
/// `entries` non-zero amplitudes.
inline SparseKet random_atom_ket(const KetSpace& space, int max_exc, int entries, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, max_exc);
  std::uniform_int_distribution<int> atom(0, space.atoms - 1);
  std::normal_distribution<double> nd;
  SparseKet x(space);
  for (int e = 0; e < entries; ++e) {
    const int n = std::min(count(rng), space.atoms);
    std::vector<int> c;
    while (static_cast<int>(c.size()) < n) {
      const int j = atom(rng);
      if (std::find(c.begin(), c.end(), j) == c.end()) c.push_back(j);
    }
    x.add(JointLabel{FieldConfig::vacuum(space.modes), AtomConfig(space.atoms, c)}, {nd(rng), nd(rng)});
  }
  return x;
}

/// Random joint ket: photons per mode up to the caps, c-atoms, at most
/// max_a atoms in |a>.
inline SparseKet random_joint_ket(const KetSpace& space, int entries, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> atom(0, space.atoms - 1);
  std::normal_distribution<double> nd;
  SparseKet x(space);
  int made = 0;
  for (int tries = 0; made < entries && tries < 100 * entries; ++tries) {
    std::vector<int> occ(static_cast<std::size_t>(space.modes));
    for (auto& o : occ) o = std::uniform_int_distribution<int>(0, space.caps.fock_cap)(rng);
    const int exc = std::uniform_int_distribution<int>(0, space.caps.max_excitations)(rng);
    const int na = std::min(exc, std::uniform_int_distribution<int>(0, space.caps.max_a)(rng));
    std::vector<int> picked;
    while (static_cast<int>(picked.size()) < std::min(exc, space.atoms)) {
      const int j = atom(rng);
      if (std::find(picked.begin(), picked.end(), j) == picked.end()) picked.push_back(j);
    }
    std::vector<int> a(picked.begin(), picked.begin() + std::min<std::ptrdiff_t>(na, std::ssize(picked)));
    std::vector<int> c(picked.begin() + static_cast<std::ptrdiff_t>(a.size()), picked.end());
    JointLabel l{FieldConfig(occ), AtomConfig(space.atoms, c, a)};
    if (!space.admits(l)) continue;
    x.add(l, {nd(rng), nd(rng)});
    ++made;
  }
  return x;
}

/// Storage state from ordered tuples of distinct atoms: tuple position p is
/// excited into mode labels[p]; every tuple contributes its phase product,
/// so each configuration collects all n! orderings. Normalized numerically.
inline SparseKet ordered_tuple_storage(int atoms, const std::vector<double>& k_of_label,
                                       const std::vector<int>& labels, const Geometry& g, const KetSpace& space) {
  const int n = static_cast<int>(labels.size());
  SparseKet x(space, 0.0);
  std::vector<int> tuple(static_cast<std::size_t>(n), 0);
  std::function<void(int)> rec = [&](int depth) {
    if (depth == n) {
      Complex phase{1.0, 0.0};
      for (int p = 0; p < n; ++p) {
        phase *= std::polar(1.0, k_of_label[static_cast<std::size_t>(labels[static_cast<std::size_t>(p)])] *
                                     g.position(tuple[static_cast<std::size_t>(p)]));
      }
      x.add(JointLabel{FieldConfig::vacuum(space.modes), AtomConfig(atoms, tuple)}, phase);
      return;
    }
    for (int j = 0; j < atoms; ++j) {
      if (std::find(tuple.begin(), tuple.begin() + depth, j) != tuple.begin() + depth) continue;
      tuple[static_cast<std::size_t>(depth)] = j;
      rec(depth + 1);
    }
  };
  rec(0);
  x.prune();
  const double nrm = x.norm();
  SparseKet out(space);
  for (const auto& [l, a] : x) out.add(l, a / nrm);
  return out;
}

inline double choose(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace qstore::testing
