#include <qstore/core_state.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qstore {

namespace {

std::vector<std::uint16_t> sorted_indices(int atoms, std::vector<int> idx, const char* what) {
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
    throw InvalidArgument(std::string("AtomConfig: duplicate ") + what + " atom index");
  }
  std::vector<std::uint16_t> out;
  out.reserve(idx.size());
  for (int i : idx) {
    if (i < 0 || i >= atoms) {
      throw InvalidArgument(std::string("AtomConfig: ") + what + " atom index " +
                            std::to_string(i) + " out of range for N=" + std::to_string(atoms));
    }
    out.push_back(static_cast<std::uint16_t>(i));
  }
  return out;
}

bool contains(const std::vector<std::uint16_t>& v, int i) {
  return std::binary_search(v.begin(), v.end(), static_cast<std::uint16_t>(i));
}

void erase_sorted(std::vector<std::uint16_t>& v, int i) {
  auto it = std::lower_bound(v.begin(), v.end(), static_cast<std::uint16_t>(i));
  v.erase(it);
}

void insert_sorted(std::vector<std::uint16_t>& v, int i) {
  auto it = std::lower_bound(v.begin(), v.end(), static_cast<std::uint16_t>(i));
  v.insert(it, static_cast<std::uint16_t>(i));
}

}  // namespace

AtomConfig::AtomConfig(int atoms, std::vector<int> c_atoms, std::vector<int> a_atoms)
    : atoms_(atoms) {
  if (atoms < 1 || atoms > 65535) {
    throw InvalidArgument("AtomConfig: atom count must be in [1, 65535]");
  }
  c_ = sorted_indices(atoms, std::move(c_atoms), "c");
  a_ = sorted_indices(atoms, std::move(a_atoms), "a");
  for (auto i : a_) {
    if (contains(c_, i)) throw InvalidArgument("AtomConfig: atom assigned to both c and a");
  }
}

Level AtomConfig::level(int atom) const {
  if (contains(c_, atom)) return Level::c;
  if (contains(a_, atom)) return Level::a;
  return Level::b;
}

AtomConfig AtomConfig::with_level(int atom, Level to) const {
  AtomConfig out = *this;
  switch (level(atom)) {
    case Level::c: erase_sorted(out.c_, atom); break;
    case Level::a: erase_sorted(out.a_, atom); break;
    case Level::b: break;
  }
  switch (to) {
    case Level::c: insert_sorted(out.c_, atom); break;
    case Level::a: insert_sorted(out.a_, atom); break;
    case Level::b: break;
  }
  return out;
}

std::string AtomConfig::to_string() const {
  std::string s(static_cast<std::size_t>(atoms_), 'b');
  for (auto i : c_) s[i] = 'c';
  for (auto i : a_) s[i] = 'a';
  return s;
}

FieldConfig::FieldConfig(std::vector<int> occupations) {
  occ_.reserve(occupations.size());
  for (int n : occupations) {
    if (n < 0 || n > 255) throw InvalidArgument("FieldConfig: occupation out of [0, 255]");
    occ_.push_back(static_cast<std::uint8_t>(n));
  }
}

int FieldConfig::total() const {
  int t = 0;
  for (auto n : occ_) t += n;
  return t;
}

FieldConfig FieldConfig::with_occupation(int mode, int photons) const {
  if (photons < 0 || photons > 255) throw SectorOverflow("FieldConfig: occupation out of [0, 255]");
  FieldConfig out = *this;
  out.occ_.at(static_cast<std::size_t>(mode)) = static_cast<std::uint8_t>(photons);
  return out;
}

std::string FieldConfig::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < occ_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(occ_[i]);
  }
  return s;
}

std::string JointLabel::to_string() const {
  return "|" + field.to_string() + ">|" + atoms.to_string() + ">";
}

KetSpace KetSpace::atoms_only(int atoms, int max_excitations, int max_a) {
  KetSpace s;
  s.atoms = atoms;
  s.modes = 0;
  s.caps.max_excitations = max_excitations;
  s.caps.max_a = max_a;
  s.caps.max_photons = 0;
  s.caps.fock_cap = 0;
  return s;
}

KetSpace KetSpace::joint(int atoms, int modes, int max_excitations, int max_photons, int max_a) {
  KetSpace s;
  s.atoms = atoms;
  s.modes = modes;
  s.caps.max_excitations = max_excitations;
  s.caps.max_a = max_a;
  s.caps.max_photons = max_photons;
  s.caps.fock_cap = max_photons;
  return s;
}

bool KetSpace::shapes(const JointLabel& label) const {
  return label.atoms.atoms() == atoms && label.field.modes() == modes;
}

bool KetSpace::admits(const JointLabel& label) const {
  if (!shapes(label)) return false;
  if (label.atoms.excitations() > caps.max_excitations) return false;
  if (label.atoms.n_a() > caps.max_a) return false;
  if (label.field.total() > caps.max_photons) return false;
  for (int m = 0; m < label.field.modes(); ++m) {
    if (label.field[m] > caps.fock_cap) return false;
  }
  return true;
}

std::string KetSpace::describe() const {
  std::ostringstream os;
  os << "N=" << atoms << " modes=" << modes << " caps{excitations<=" << caps.max_excitations
     << ", a<=" << caps.max_a << ", photons<=" << caps.max_photons << ", fock<=" << caps.fock_cap
     << "}";
  return os.str();
}

SparseKet::SparseKet(KetSpace space, double drop_tolerance)
    : space_(space), drop_tol_(drop_tolerance) {
  if (space.atoms < 1) throw InvalidArgument("SparseKet: atom count must be positive");
  if (drop_tolerance < 0) throw InvalidArgument("SparseKet: negative drop tolerance");
}

SparseKet SparseKet::basis(KetSpace space, JointLabel label, Complex amplitude) {
  SparseKet k(space);
  k.add(std::move(label), amplitude);
  return k;
}

void SparseKet::check_label(const JointLabel& label, Complex amp) const {
  if (!space_.shapes(label)) {
    throw IncompatibleSpaces("label " + label.to_string() + " does not match space " +
                             space_.describe());
  }
  if (!space_.admits(label) && std::abs(amp) > drop_tol_) {
    throw SectorOverflow("amplitude on " + label.to_string() + " leaves sector " +
                         space_.describe());
  }
}

void SparseKet::add(const JointLabel& label, Complex amp) {
  check_label(label, amp);
  if (!space_.admits(label)) return;
  auto [it, inserted] = entries_.try_emplace(label, amp);
  if (!inserted) it->second += amp;
}

void SparseKet::add(JointLabel&& label, Complex amp) {
  check_label(label, amp);
  if (!space_.admits(label)) return;
  auto it = entries_.find(label);
  if (it == entries_.end()) {
    entries_.emplace(std::move(label), amp);
  } else {
    it->second += amp;
  }
}

void SparseKet::prune() {
  std::erase_if(entries_, [this](const auto& e) { return std::abs(e.second) < drop_tol_; });
}

Complex SparseKet::amplitude(const JointLabel& label) const {
  auto it = entries_.find(label);
  return it == entries_.end() ? Complex{} : it->second;
}

double SparseKet::squared_norm() const {
  double s = 0;
  for (const auto& [label, amp] : entries_) s += std::norm(amp);
  return s;
}

double SparseKet::norm() const { return std::sqrt(squared_norm()); }

SparseKet SparseKet::scaled(Complex factor) const {
  SparseKet out(space_, drop_tol_);
  for (const auto& [label, amp] : entries_) out.entries_.emplace_hint(out.entries_.end(), label, amp * factor);
  out.prune();
  return out;
}

SparseKet SparseKet::plus(const SparseKet& other, Complex factor) const {
  require_compatible(*this, other, "plus");
  SparseKet out = *this;
  for (const auto& [label, amp] : other) out.add(label, factor * amp);
  out.prune();
  return out;
}

SparseKet SparseKet::rehomed(const KetSpace& space) const {
  SparseKet out(space, drop_tol_);
  for (const auto& [label, amp] : entries_) out.add(label, amp);
  return out;
}

void require_compatible(const SparseKet& x, const SparseKet& y, const char* what) {
  if (!(x.space() == y.space())) {
    throw IncompatibleSpaces(std::string(what) + ": ket spaces differ (" + x.space().describe() +
                             " vs " + y.space().describe() + ")");
  }
}

Complex inner_product(const SparseKet& x, const SparseKet& y) {
  require_compatible(x, y, "inner_product");
  // Merge walk in canonical order; the summation order depends only on labels.
  Complex s{};
  auto ix = x.begin();
  auto iy = y.begin();
  while (ix != x.end() && iy != y.end()) {
    if (ix->first < iy->first) {
      ++ix;
    } else if (iy->first < ix->first) {
      ++iy;
    } else {
      s += std::conj(ix->second) * iy->second;
      ++ix;
      ++iy;
    }
  }
  return s;
}

Normalized normalize(const SparseKet& x) {
  const double n = x.norm();
  if (n == 0.0 || !std::isfinite(n)) throw ZeroNorm("normalize: zero-norm ket");
  return {x.scaled(1.0 / n), n};
}

double fidelity(const SparseKet& x, const SparseKet& y, double norm_tolerance) {
  const double nx = x.norm();
  const double ny = y.norm();
  if (std::abs(nx - 1.0) > norm_tolerance || std::abs(ny - 1.0) > norm_tolerance) {
    throw NotNormalized("fidelity: inputs must be normalized (norms " + std::to_string(nx) + ", " +
                        std::to_string(ny) + ")");
  }
  return std::norm(inner_product(x, y));
}

SparseKet tensor(const FieldConfig& field, const SparseKet& atoms, const KetSpace& joint) {
  if (atoms.space().atoms != joint.atoms) throw IncompatibleSpaces("tensor: atom counts differ");
  if (field.modes() != joint.modes) throw IncompatibleSpaces("tensor: mode counts differ");
  SparseKet out(joint, atoms.drop_tolerance());
  for (const auto& [label, amp] : atoms) out.add(JointLabel{field, label.atoms}, amp);
  return out;
}

}  // namespace qstore
