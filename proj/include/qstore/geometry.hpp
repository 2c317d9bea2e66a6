#pragma once

// Atom positions, optical phase sums over the ensemble, and the checks that
// decide when collective operators are close to independent bosonic modes.
// Lengths are in units of the mean atom spacing d (d = 1), wavevectors are
// dimensionless k*d.

#include <qstore/core_state.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qstore {

enum class GeometryKind { lattice, uniform_random, user_supplied };

class Geometry {
 public:
  /// z_j = j*d, j = 0..N-1, L = N*d.
  static Geometry lattice(int atoms);
  /// N positions drawn uniformly in [0, length); sorted.
  static Geometry uniform_random(int atoms, double length, std::uint64_t seed);
  static Geometry from_positions(std::vector<double> positions, double length);
  /// One position per line; blank lines and '#' comments ignored.
  static Geometry from_file(const std::string& path, std::optional<double> length = std::nullopt);

  int atoms() const { return static_cast<int>(z_.size()); }
  double spacing() const { return 1.0; }
  double length() const { return length_; }
  GeometryKind kind() const { return kind_; }
  std::optional<std::uint64_t> seed() const { return seed_; }
  const std::vector<double>& positions() const { return z_; }
  double position(int j) const { return z_[static_cast<std::size_t>(j)]; }

  /// exp(i * k * z_j) for every atom.
  std::vector<Complex> phases(double k) const;

 private:
  Geometry(std::vector<double> z, double length, GeometryKind kind,
           std::optional<std::uint64_t> seed);

  std::vector<double> z_;
  double length_ = 0;
  GeometryKind kind_ = GeometryKind::lattice;
  std::optional<std::uint64_t> seed_;
};

std::string to_string(GeometryKind kind);

enum class Transition { raman, cascade };

/// Signal/control wavevectors and the signal detuning grid.
struct ModeSet {
  double k_signal = 0;
  double k_control = 0;
  std::vector<double> detunings;
  Transition transition = Transition::raman;
  int fock_cap = 1;

  int size() const { return static_cast<int>(detunings.size()); }
  /// k_s + q - k_c (Raman) or k_s + q + k_c (cascade).
  double k_eff(int mode) const;
  void validate() const;
};

struct PhaseSum {
  Complex direct;
  /// (1 - e^{ikNd}) / (1 - e^{ikd}); lattice only, k*d not a multiple of 2*pi.
  std::optional<Complex> closed_form;
};

/// sum_j exp(i k z_j) by direct summation.
PhaseSum phase_sum(const Geometry& g, double k);

/// Continuum reference N (e^{ikL} - 1) / (ikL); N at k = 0.
Complex continuum_phase_sum(int atoms, double k, double length);

/// Upper envelope 2 / (N |sin(kd/2)|) of |phase_sum|/N on a lattice.
double lattice_envelope(int atoms, double k);

/// lambda^2 / (2 pi L): wavelength interval below which two modes cannot be
/// resolved by a medium of length L. Any consistent length unit.
double resolvable_mode_spacing(double wavelength, double medium_length);

struct ConditionThresholds {
  double min_ratio = 10.0;
  double max_residual = 0.1;
};

struct ModePairCondition {
  int first = 0;
  int second = 0;
  double dk_times_length = 0;  // |k - k'| L
  double residual = 0;         // |phase_sum(k' - k)| / N
  bool pass = false;
};

struct ConditionReport {
  double atoms_per_excitation = 0;  // N / n_max
  bool low_excitation_pass = false;
  double wavelength_over_spacing = 0;  // lambda / d, lambda = 2 pi / k_s
  double length_over_spacing = 0;      // L / d
  bool dense_medium_pass = false;
  std::vector<ModePairCondition> pairs;
  bool all_pass = false;
  std::optional<std::uint64_t> seed;
};

ConditionReport check_mode_conditions(const Geometry& g, const ModeSet& m, int max_excitations,
                                      const ConditionThresholds& thresholds = {});

}  // namespace qstore
