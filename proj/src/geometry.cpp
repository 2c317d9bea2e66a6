#include <qstore/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace qstore {

Geometry::Geometry(std::vector<double> z, double length, GeometryKind kind,
                   std::optional<std::uint64_t> seed)
    : z_(std::move(z)), length_(length), kind_(kind), seed_(seed) {
  if (z_.empty()) throw InvalidArgument("Geometry: need at least one atom");
  if (!(length_ > 0) || !std::isfinite(length_)) throw InvalidArgument("Geometry: length must be positive");
  for (double zj : z_) {
    if (!std::isfinite(zj) || zj < 0 || zj >= length_) {
      throw InvalidArgument("Geometry: position " + std::to_string(zj) + " outside [0, L)");
    }
  }
}

Geometry Geometry::lattice(int atoms) {
  if (atoms < 1) throw InvalidArgument("Geometry: need at least one atom");
  std::vector<double> z(static_cast<std::size_t>(atoms));
  for (int j = 0; j < atoms; ++j) z[static_cast<std::size_t>(j)] = j;
  return Geometry(std::move(z), atoms, GeometryKind::lattice, std::nullopt);
}

Geometry Geometry::uniform_random(int atoms, double length, std::uint64_t seed) {
  if (atoms < 1) throw InvalidArgument("Geometry: need at least one atom");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, length);
  std::vector<double> z(static_cast<std::size_t>(atoms));
  for (auto& zj : z) zj = dist(rng);
  std::sort(z.begin(), z.end());
  return Geometry(std::move(z), length, GeometryKind::uniform_random, seed);
}

Geometry Geometry::from_positions(std::vector<double> positions, double length) {
  return Geometry(std::move(positions), length, GeometryKind::user_supplied, std::nullopt);
}

Geometry Geometry::from_file(const std::string& path, std::optional<double> length) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("Geometry: cannot open position file " + path);
  std::vector<double> z;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double v;
    if (!(ls >> v)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": not a number");
    }
    std::string rest;
    if (ls >> rest) throw InvalidArgument(path + ":" + std::to_string(lineno) + ": one value per line");
    z.push_back(v);
  }
  const double L = length.value_or(static_cast<double>(z.size()));
  return from_positions(std::move(z), L);
}

std::vector<Complex> Geometry::phases(double k) const {
  std::vector<Complex> out(z_.size());
  for (std::size_t j = 0; j < z_.size(); ++j) out[j] = std::polar(1.0, k * z_[j]);
  return out;
}

std::string to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::lattice: return "lattice";
    case GeometryKind::uniform_random: return "uniform-random";
    case GeometryKind::user_supplied: return "user-supplied";
  }
  return "?";
}

double ModeSet::k_eff(int mode) const {
  const double q = detunings.at(static_cast<std::size_t>(mode));
  return transition == Transition::raman ? k_signal + q - k_control : k_signal + q + k_control;
}

void ModeSet::validate() const {
  auto sorted = detunings;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidArgument("ModeSet: detunings must be distinct");
  }
  if (fock_cap < 0) throw InvalidArgument("ModeSet: negative Fock cap");
}

PhaseSum phase_sum(const Geometry& g, double k) {
  PhaseSum out;
  if (k == 0.0) {
    out.direct = static_cast<double>(g.atoms());
  } else {
    Complex s{};
    for (double z : g.positions()) s += std::polar(1.0, k * z);
    out.direct = s;
  }
  if (g.kind() == GeometryKind::lattice) {
    const double turns = k / (2 * std::numbers::pi);
    if (std::abs(turns - std::round(turns)) > 1e-12) {
      const Complex one{1.0, 0.0};
      out.closed_form = (one - std::polar(1.0, k * g.atoms())) / (one - std::polar(1.0, k));
    }
  }
  return out;
}

Complex continuum_phase_sum(int atoms, double k, double length) {
  if (k == 0.0) return static_cast<double>(atoms);
  const Complex ikL{0.0, k * length};
  return static_cast<double>(atoms) * (std::exp(ikL) - 1.0) / ikL;
}

double lattice_envelope(int atoms, double k) {
  return 2.0 / (atoms * std::abs(std::sin(k / 2)));
}

double resolvable_mode_spacing(double wavelength, double medium_length) {
  if (!(medium_length > 0)) throw InvalidArgument("resolvable_mode_spacing: length must be positive");
  return wavelength * wavelength / (2 * std::numbers::pi * medium_length);
}

ConditionReport check_mode_conditions(const Geometry& g, const ModeSet& m, int max_excitations,
                                      const ConditionThresholds& t) {
  m.validate();
  ConditionReport r;
  r.seed = g.seed();
  const int N = g.atoms();
  r.atoms_per_excitation = max_excitations > 0 ? static_cast<double>(N) / max_excitations
                                               : std::numeric_limits<double>::infinity();
  r.low_excitation_pass = r.atoms_per_excitation >= t.min_ratio;
  r.wavelength_over_spacing = m.k_signal != 0.0 ? 2 * std::numbers::pi / std::abs(m.k_signal) / g.spacing()
                                                : std::numeric_limits<double>::infinity();
  r.length_over_spacing = g.length() / g.spacing();
  r.dense_medium_pass = r.wavelength_over_spacing >= t.min_ratio && r.length_over_spacing >= t.min_ratio;
  bool all = r.low_excitation_pass && r.dense_medium_pass;
  for (int i = 0; i < m.size(); ++i) {
    for (int j = i + 1; j < m.size(); ++j) {
      ModePairCondition p;
      p.first = i;
      p.second = j;
      const double dk = m.k_eff(j) - m.k_eff(i);
      p.dk_times_length = std::abs(dk) * g.length();
      p.residual = std::abs(phase_sum(g, dk).direct) / N;
      p.pass = p.dk_times_length >= t.min_ratio && p.residual <= t.max_residual;
      all = all && p.pass;
      r.pairs.push_back(p);
    }
  }
  r.all_pass = all;
  return r;
}

}  // namespace qstore
