#pragma once

// Basis labels and the sparse ket container shared by every other module.
//
// A basis label is a field configuration (photon number per mode) together
// with an atomic configuration (which atoms sit in |c> and which in |a>; all
// others are in |b>). Only configurations inside the configured excitation
// sector are representable, so bases grow like C(N, n) instead of 3^N.

#include <qstore/errors.hpp>

#include <compare>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qstore {

using Complex = std::complex<double>;

inline constexpr double kDefaultDropTolerance = 1e-15;
inline constexpr double kDefaultNormTolerance = 1e-7;

enum class Level : std::uint8_t { b, c, a };

/// Per-atom level assignment, stored as the sorted index sets of atoms in
/// |c> and |a>.
class AtomConfig {
 public:
  AtomConfig() = default;
  AtomConfig(int atoms, std::vector<int> c_atoms, std::vector<int> a_atoms = {});

  static AtomConfig ground(int atoms) { return AtomConfig(atoms, {}, {}); }

  int atoms() const { return atoms_; }
  int n_c() const { return static_cast<int>(c_.size()); }
  int n_a() const { return static_cast<int>(a_.size()); }
  int excitations() const { return n_c() + n_a(); }
  std::span<const std::uint16_t> c_atoms() const { return c_; }
  std::span<const std::uint16_t> a_atoms() const { return a_; }

  Level level(int atom) const;
  /// Copy with atom `atom` moved to level `to`.
  AtomConfig with_level(int atom, Level to) const;

  std::string to_string() const;

  auto operator<=>(const AtomConfig&) const = default;
  bool operator==(const AtomConfig&) const = default;

 private:
  int atoms_ = 0;
  std::vector<std::uint16_t> c_;
  std::vector<std::uint16_t> a_;
};

/// Photon numbers per field mode.
class FieldConfig {
 public:
  FieldConfig() = default;
  explicit FieldConfig(std::vector<int> occupations);
  static FieldConfig vacuum(int modes) { return FieldConfig(std::vector<int>(modes, 0)); }

  int modes() const { return static_cast<int>(occ_.size()); }
  int operator[](int mode) const { return occ_[static_cast<std::size_t>(mode)]; }
  int total() const;
  FieldConfig with_occupation(int mode, int photons) const;
  std::span<const std::uint8_t> occupations() const { return occ_; }

  std::string to_string() const;

  auto operator<=>(const FieldConfig&) const = default;
  bool operator==(const FieldConfig&) const = default;

 private:
  std::vector<std::uint8_t> occ_;
};

struct JointLabel {
  FieldConfig field;
  AtomConfig atoms;

  std::string to_string() const;
  auto operator<=>(const JointLabel&) const = default;
  bool operator==(const JointLabel&) const = default;
};

struct SectorCaps {
  int max_excitations = 0;  // n_c + n_a
  int max_a = 1;
  int max_photons = 0;      // summed over modes
  int fock_cap = 0;         // per mode

  bool operator==(const SectorCaps&) const = default;
};

/// Metadata every ket carries: atom count, mode count, sector caps.
struct KetSpace {
  int atoms = 0;
  int modes = 0;
  SectorCaps caps;

  static KetSpace atoms_only(int atoms, int max_excitations, int max_a = 0);
  static KetSpace joint(int atoms, int modes, int max_excitations, int max_photons,
                        int max_a = 1);

  bool admits(const JointLabel& label) const;
  /// Labels of this shape (atom count, mode count), caps ignored.
  bool shapes(const JointLabel& label) const;
  std::string describe() const;

  bool operator==(const KetSpace&) const = default;
};

/// Sparse superposition over joint basis labels. Entries are kept in
/// canonical (lexicographic) label order, so every reduction is
/// deterministic.
class SparseKet {
 public:
  using Storage = std::map<JointLabel, Complex>;
  using const_iterator = Storage::const_iterator;

  explicit SparseKet(KetSpace space, double drop_tolerance = kDefaultDropTolerance);

  /// Single basis vector.
  static SparseKet basis(KetSpace space, JointLabel label, Complex amplitude = 1.0);

  const KetSpace& space() const { return space_; }
  double drop_tolerance() const { return drop_tol_; }

  /// Accumulates `amp` onto `label`. Throws SectorOverflow when a
  /// non-negligible amplitude lands outside the caps.
  void add(const JointLabel& label, Complex amp);
  void add(JointLabel&& label, Complex amp);
  /// Removes entries with |amp| below the drop tolerance.
  void prune();

  Complex amplitude(const JointLabel& label) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const_iterator begin() const { return entries_.begin(); }
  const_iterator end() const { return entries_.end(); }

  double squared_norm() const;
  double norm() const;

  SparseKet scaled(Complex factor) const;
  /// this + factor * other
  SparseKet plus(const SparseKet& other, Complex factor = 1.0) const;
  SparseKet minus(const SparseKet& other) const { return plus(other, -1.0); }

  /// Same entries in a different (compatible-shape) space; checks caps.
  SparseKet rehomed(const KetSpace& space) const;

 private:
  void check_label(const JointLabel& label, Complex amp) const;

  KetSpace space_;
  double drop_tol_;
  Storage entries_;
};

void require_compatible(const SparseKet& x, const SparseKet& y, const char* what);

/// <x|y>, antilinear in x.
Complex inner_product(const SparseKet& x, const SparseKet& y);

struct Normalized {
  SparseKet ket;
  double norm;
};
Normalized normalize(const SparseKet& x);

/// |<x|y>|^2 for normalized inputs; throws NotNormalized otherwise.
double fidelity(const SparseKet& x, const SparseKet& y, double norm_tolerance = kDefaultNormTolerance);

/// |field> (x) atoms, placed into `joint`.
SparseKet tensor(const FieldConfig& field, const SparseKet& atoms, const KetSpace& joint);

}  // namespace qstore
