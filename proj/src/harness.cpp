#include <qstore/harness.hpp>

#include <qstore/dynamic.hpp>
#include <qstore/eit.hpp>
#include <qstore/geometry.hpp>
#include <qstore/operators.hpp>
#include <qstore/storage.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace qstore::harness {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

enum class Ty { integer, number, boolean, string, int_list, number_list, string_list, pair_list, opt_number, opt_string };

struct Field {
  const char* key;
  Ty type;
  json value;
};

using Schema = std::vector<Field>;

std::vector<int> range(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

Schema common_schema(bool with_geometry) {
  Schema s{
      {"schema_version", Ty::integer, kSchemaVersion},
      {"scenario", Ty::string, ""},
      {"seed", Ty::integer, 0},
      {"record_runtime", Ty::boolean, false},
  };
  if (with_geometry) {
    s.push_back({"geometry", Ty::string, "lattice"});
    s.push_back({"geometry_length", Ty::opt_number, nullptr});
    s.push_back({"geometry_file", Ty::opt_string, nullptr});
  }
  return s;
}

Schema schema_for(ScenarioKind kind) {
  Schema s = common_schema(kind != ScenarioKind::swap);
  auto add = [&](const char* key, Ty t, json v) { s.push_back({key, t, std::move(v)}); };
  switch (kind) {
    case ScenarioKind::verify_ladder:
      add("atoms", Ty::int_list, range(3, 12));
      add("max_excitations", Ty::integer, 3);
      add("k_signal", Ty::number, 0.7);
      add("k_control", Ty::number, 0.2);
      add("transitions", Ty::string_list, json::array({"raman", "cascade"}));
      add("tolerance", Ty::number, 1e-12);
      break;
    case ScenarioKind::verify_dicke:
      add("atoms", Ty::int_list, range(2, 10));
      add("max_excitations", Ty::integer, 3);
      add("wavevector", Ty::number, 0.5);
      add("tolerance", Ty::number, 1e-10);
      break;
    case ScenarioKind::commutator_scan:
      add("atoms", Ty::int_list, json::array({64}));
      add("pairs", Ty::pair_list,
          json::array({json::array({0.1, 0.1}), json::array({0.1, 0.2}), json::array({0.1, 0.5}),
                       json::array({0.2, 0.0}), json::array({0.05, 0.15}), json::array({0.3, -0.3}),
                       json::array({1.0, 1.5}), json::array({0.0, kPi / 2}), json::array({0.15, 0.9}),
                       json::array({0.2, 0.2 + 2 * kPi * 17 / 64})}));
      add("k_base", Ty::number, 0.1);
      add("dk_length_grid", Ty::number_list,
          json::array({1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 40.0, 40.84, 44.0, 48.0, 53.4, 64.0, 80.0, 96.0, 128.0, 160.0, 200.0}));
      add("decay_threshold", Ty::number, 40.0);
      add("decay_bound", Ty::number, 0.05);
      add("max_kd", Ty::number, 0.2);
      add("tolerance", Ty::number, 1e-12);
      break;
    case ScenarioKind::mode_conditions:
      add("wavelength_nm", Ty::opt_number, 589.6);
      add("medium_length_um", Ty::opt_number, 339.0);
      add("expected_spacing_nm", Ty::opt_number, 0.163);
      add("spacing_tolerance_nm", Ty::number, 0.001);
      add("atoms", Ty::int_list, json::array({100}));
      add("max_excitations", Ty::integer, 1);
      add("k_signal", Ty::number, 0.2);
      add("k_control", Ty::number, 0.0);
      add("detunings", Ty::number_list, json::array({0.0}));
      add("transition", Ty::string, "raman");
      add("min_ratio", Ty::number, 10.0);
      add("max_residual", Ty::number, 0.1);
      break;
    case ScenarioKind::dark_residual:
      add("atoms", Ty::int_list, json::array({4, 8}));
      add("photons", Ty::int_list, json::array({1, 2}));
      add("thetas", Ty::number_list, json::array({kPi / 6, kPi / 4, kPi / 3}));
      add("g", Ty::number, 1.0);
      add("k_signal", Ty::number, 0.4);
      add("k_control", Ty::number, 0.1);
      add("approx_atoms", Ty::int_list, json::array({8, 16}));
      add("approx_photons", Ty::integer, 2);
      add("approx_theta", Ty::number, kPi / 4);
      add("tolerance", Ty::number, 1e-10);
      add("interference_tolerance", Ty::number, 1e-12);
      break;
    case ScenarioKind::adiabatic_sweep:
      add("atoms", Ty::int_list, json::array({8}));
      add("photons", Ty::integer, 1);
      add("g", Ty::number, 1.0);
      add("k_signal", Ty::number, 0.4);
      add("k_control", Ty::number, 0.1);
      add("duration_scaled", Ty::number, 200.0);
      add("shape", Ty::string, "smooth-cosine");
      add("theta_start", Ty::number, 0.0);
      add("theta_end", Ty::number, kPi / 2);
      add("max_step", Ty::number, 0.0);
      add("omega_cap_ratio", Ty::number, 100.0);
      add("samples", Ty::integer, 200);
      add("norm_drift_bound", Ty::number, 1e-8);
      add("min_fidelity", Ty::opt_number, 0.999);
      add("max_fidelity", Ty::opt_number, nullptr);
      break;
    case ScenarioKind::dynamic_transfer:
      add("photons", Ty::int_list, json::array({1, 2, 3}));
      add("omega_times", Ty::number_list, json::array({0.0, 0.3, kPi / 4, 1.0, kPi / 2, 2.0, kPi, 3 * kPi / 2, 2 * kPi}));
      add("atoms", Ty::int_list, json::array({4, 8, 16}));
      add("finite_n_photons", Ty::int_list, json::array({1, 2}));
      add("finite_n_omega_t", Ty::number, kPi / 2);
      add("wavevector", Ty::number, 0.3);
      add("max_step_omega", Ty::number, 1e-3);
      add("norm_drift_bound", Ty::number, 1e-8);
      add("purity_grid", Ty::integer, 64);
      add("tolerance", Ty::number, 1e-10);
      add("single_excitation_tolerance", Ty::number, 1e-8);
      break;
    case ScenarioKind::swap:
      add("trials", Ty::integer, 20);
      add("max_quanta", Ty::integer, 3);
      add("tolerance", Ty::number, 1e-10);
      break;
    case ScenarioKind::normalization_audit:
      add("atoms", Ty::int_list, json::array({8}));
      add("occupancies", Ty::pair_list, json::array({json::array({1, 1}), json::array({2, 1})}));
      add("wavevectors", Ty::number_list, json::array({0.3, 1.1}));
      add("tolerance", Ty::number, 1e-12);
      break;
  }
  return s;
}

bool type_ok(Ty t, const json& v) {
  auto all_of = [&](auto pred) { return v.is_array() && std::all_of(v.begin(), v.end(), pred); };
  switch (t) {
    case Ty::integer: return v.is_number_integer();
    case Ty::number: return v.is_number();
    case Ty::boolean: return v.is_boolean();
    case Ty::string: return v.is_string();
    case Ty::int_list: return all_of([](const json& e) { return e.is_number_integer(); });
    case Ty::number_list: return all_of([](const json& e) { return e.is_number(); });
    case Ty::string_list: return all_of([](const json& e) { return e.is_string(); });
    case Ty::pair_list:
      return all_of([](const json& e) {
        return e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number();
      });
    case Ty::opt_number: return v.is_null() || v.is_number();
    case Ty::opt_string: return v.is_null() || v.is_string();
  }
  return false;
}

const char* type_name(Ty t) {
  switch (t) {
    case Ty::integer: return "integer";
    case Ty::number: return "number";
    case Ty::boolean: return "boolean";
    case Ty::string: return "string";
    case Ty::int_list: return "list of integers";
    case Ty::number_list: return "list of numbers";
    case Ty::string_list: return "list of strings";
    case Ty::pair_list: return "list of [x, y] pairs";
    case Ty::opt_number: return "number or null";
    case Ty::opt_string: return "string or null";
  }
  return "?";
}

std::vector<int> ints(const json& p, const char* key) { return p.at(key).get<std::vector<int>>(); }
std::vector<double> reals(const json& p, const char* key) { return p.at(key).get<std::vector<double>>(); }
double real(const json& p, const char* key) { return p.at(key).get<double>(); }
int integer(const json& p, const char* key) { return p.at(key).get<int>(); }

void positive_ints(const json& p, const char* key, std::vector<std::string>& errs, int min = 1) {
  if (!p.contains(key)) return;
  const auto v = ints(p, key);
  if (v.empty()) errs.push_back(std::string(key) + ": must not be empty");
  for (int x : v) {
    if (x < min) errs.push_back(std::string(key) + ": value " + std::to_string(x) + " below " + std::to_string(min));
  }
}

void semantic_checks(ScenarioKind kind, const json& p, std::vector<std::string>& errs) {
  if (p.contains("geometry")) {
    const auto g = p.at("geometry").get<std::string>();
    if (g != "lattice" && g != "uniform-random" && g != "file") {
      errs.push_back("geometry: expected lattice, uniform-random or file, got '" + g + "'");
    }
    if (g == "file" && p.at("geometry_file").is_null()) errs.push_back("geometry_file: required for geometry 'file'");
    if (!p.at("geometry_length").is_null() && !(real(p, "geometry_length") > 0)) {
      errs.push_back("geometry_length: must be positive");
    }
  }
  auto positive = [&](const char* key) {
    if (p.contains(key) && p.at(key).is_number() && !(real(p, key) > 0)) {
      errs.push_back(std::string(key) + ": must be positive");
    }
  };
  for (const char* key : {"tolerance", "g", "duration_scaled", "norm_drift_bound", "max_step_omega",
                          "omega_cap_ratio", "spacing_tolerance_nm", "interference_tolerance",
                          "single_excitation_tolerance", "min_ratio"}) {
    positive(key);
  }
  switch (kind) {
    case ScenarioKind::verify_ladder:
    case ScenarioKind::verify_dicke:
      positive_ints(p, "atoms", errs);
      if (integer(p, "max_excitations") < 0) errs.push_back("max_excitations: must be non-negative");
      if (p.contains("transitions")) {
        for (const auto& t : p.at("transitions")) {
          if (t != "raman" && t != "cascade") errs.push_back("transitions: unknown '" + t.get<std::string>() + "'");
        }
      }
      break;
    case ScenarioKind::commutator_scan:
      positive_ints(p, "atoms", errs);
      break;
    case ScenarioKind::mode_conditions: {
      positive_ints(p, "atoms", errs);
      if (integer(p, "max_excitations") < 1) errs.push_back("max_excitations: must be at least 1");
      const auto t = p.at("transition").get<std::string>();
      if (t != "raman" && t != "cascade") errs.push_back("transition: expected raman or cascade");
      auto det = reals(p, "detunings");
      std::sort(det.begin(), det.end());
      if (std::adjacent_find(det.begin(), det.end()) != det.end()) errs.push_back("detunings: must be distinct");
      if (p.at("wavelength_nm").is_null() != p.at("medium_length_um").is_null()) {
        errs.push_back("wavelength_nm and medium_length_um: give both or neither");
      }
      if (!p.at("medium_length_um").is_null() && !(real(p, "medium_length_um") > 0)) {
        errs.push_back("medium_length_um: must be positive");
      }
      break;
    }
    case ScenarioKind::dark_residual:
      positive_ints(p, "atoms", errs, 2);
      positive_ints(p, "photons", errs, 0);
      positive_ints(p, "approx_atoms", errs, 2);
      for (double th : reals(p, "thetas")) {
        if (!(th > 0 && th <= kPi / 2)) errs.push_back("thetas: each angle must lie in (0, pi/2]");
      }
      if (!(real(p, "approx_theta") > 0 && real(p, "approx_theta") <= kPi / 2)) {
        errs.push_back("approx_theta: must lie in (0, pi/2]");
      }
      break;
    case ScenarioKind::adiabatic_sweep: {
      positive_ints(p, "atoms", errs, 2);
      if (integer(p, "photons") < 1) errs.push_back("photons: must be at least 1");
      const auto shape = p.at("shape").get<std::string>();
      if (shape != "linear" && shape != "smooth-cosine") errs.push_back("shape: expected linear or smooth-cosine");
      for (const char* key : {"theta_start", "theta_end"}) {
        const double th = real(p, key);
        if (!(th >= 0 && th <= kPi / 2)) errs.push_back(std::string(key) + ": must lie in [0, pi/2]");
      }
      if (real(p, "max_step") < 0) errs.push_back("max_step: must be non-negative");
      if (integer(p, "samples") < 0) errs.push_back("samples: must be non-negative");
      break;
    }
    case ScenarioKind::dynamic_transfer:
      positive_ints(p, "photons", errs, 0);
      positive_ints(p, "atoms", errs, 1);
      positive_ints(p, "finite_n_photons", errs, 0);
      if (integer(p, "purity_grid") < 4) errs.push_back("purity_grid: need at least 4 points");
      break;
    case ScenarioKind::swap:
      if (integer(p, "trials") < 1) errs.push_back("trials: must be at least 1");
      if (integer(p, "max_quanta") < 0) errs.push_back("max_quanta: must be non-negative");
      break;
    case ScenarioKind::normalization_audit: {
      positive_ints(p, "atoms", errs);
      const auto occ = p.at("occupancies");
      const auto k = reals(p, "wavevectors");
      for (const auto& o : occ) {
        for (const auto& m : o) {
          if (!m.is_number_integer() || m.get<int>() < 0) errs.push_back("occupancies: entries must be non-negative integers");
        }
      }
      if (k.size() != 2) errs.push_back("wavevectors: need exactly two (one per occupancy slot)");
      else if (k[0] == k[1]) errs.push_back("wavevectors: must be distinct");
      break;
    }
  }
}

Geometry make_geometry(const json& p, int atoms) {
  const auto kind = p.value("geometry", std::string("lattice"));
  const json& len = p.contains("geometry_length") ? p.at("geometry_length") : json(nullptr);
  if (kind == "lattice") return Geometry::lattice(atoms);
  if (kind == "uniform-random") {
    const double L = len.is_null() ? atoms : len.get<double>();
    return Geometry::uniform_random(atoms, L, p.at("seed").get<std::uint64_t>());
  }
  const auto g = Geometry::from_file(p.at("geometry_file").get<std::string>(),
                                     len.is_null() ? std::nullopt : std::optional<double>(len.get<double>()));
  if (g.atoms() != atoms) {
    throw InvalidArgument("geometry file holds " + std::to_string(g.atoms()) + " positions, scenario asks for " +
                          std::to_string(atoms));
  }
  return g;
}

std::string tag(const std::string& base, std::initializer_list<std::pair<const char*, std::string>> kv) {
  std::string s = base;
  for (const auto& [k, v] : kv) s += " " + std::string(k) + "=" + v;
  return s;
}

std::string num(double v) { return format_double(v); }
std::string num(int v) { return std::to_string(v); }

/// Runs `body`, turning any exception into a failed check named `name`.
void guarded(std::vector<Check>& checks, const std::string& name, const std::string& identity,
             const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    checks.push_back(failed_check(name, identity, "oracle", e.what()));
  }
}

// ---------------------------------------------------------------------------

void run_verify_ladder(const json& p, Report& r) {
  const double tol = real(p, "tolerance");
  const int nmax = integer(p, "max_excitations");
  for (const auto& tname : p.at("transitions")) {
    const bool raman = tname == "raman";
    const double k = raman ? real(p, "k_signal") - real(p, "k_control") : real(p, "k_signal") + real(p, "k_control");
    for (int N : ints(p, "atoms")) {
      const std::string where = tag("", {{"transition", tname.get<std::string>()}, {"N", num(N)}});
      guarded(r.checks, "ladder" + where, "storage ladder identities", [&] {
        const Geometry g = Geometry::lattice(N);
        const int top = std::min(nmax, N);
        const KetSpace space = KetSpace::atoms_only(N, std::min(top + 1, N));
        std::vector<SparseKet> states;
        for (int n = 0; n <= std::min(top + 1, N); ++n) {
          states.push_back(storage_direct(StorageSpec::single(N, k, n), g, space));
        }
        for (int n = 0; n <= top; ++n) {
          const std::string at = where + " n=" + num(n);
          const SparseKet& cn = states[static_cast<std::size_t>(n)];
          if (n >= 1) {
            const auto lad = storage_ladder(StorageSpec::single(N, k, n), g, space);
            r.checks.push_back(make_check("raw-norm" + at, "||(sigma^dag)^n C^0|| = sqrt(N!/((N-n)! N^n)) sqrt(n!)",
                                          "closed-form", Compare::abs_diff, ladder_prefactor(N, {n}), lad.raw_norm, tol));
            r.checks.push_back(make_check("route-fidelity" + at, "fidelity(direct, ladder) = 1", "oracle",
                                          Compare::abs_diff, 1.0, fidelity(cn, lad.ket), tol));
          }
          const SparseKet up = apply(sigma_dagger(k), g, cn);
          const double cu = std::sqrt(1.0 - double(n) / N) * std::sqrt(n + 1.0);
          const SparseKet up_ref = n < N ? states[static_cast<std::size_t>(n + 1)].scaled(cu) : SparseKet(space);
          r.checks.push_back(make_check("raise" + at, "sigma^dag C^n = sqrt(1-n/N) sqrt(n+1) C^{n+1}", "closed-form",
                                        Compare::abs_diff, 0.0, up.minus(up_ref).norm(), tol));
          const SparseKet down = apply(sigma(k), g, cn);
          const double cd = std::sqrt((N - n + 1.0) / N) * std::sqrt(double(n));
          const SparseKet down_ref = n > 0 ? states[static_cast<std::size_t>(n - 1)].scaled(cd) : SparseKet(space);
          r.checks.push_back(make_check("lower" + at, "sigma C^n = sqrt((N-n+1)/N) sqrt(n) C^{n-1}", "closed-form",
                                        Compare::abs_diff, 0.0, down.minus(down_ref).norm(), tol));
          const SparseKet pc = apply({OpKind::pop_c, std::nullopt}, g, cn);
          const SparseKet pb = apply({OpKind::pop_b, std::nullopt}, g, cn);
          const SparseKet pa = apply({OpKind::pop_a, std::nullopt}, g, cn);
          r.checks.push_back(make_check("pop-c" + at, "sum |c><c| C^n = n C^n", "closed-form", Compare::abs_diff, 0.0,
                                        pc.plus(cn, -double(n)).norm(), tol));
          r.checks.push_back(make_check("pop-b" + at, "sum |b><b| C^n = (N-n) C^n", "closed-form", Compare::abs_diff,
                                        0.0, pb.plus(cn, -double(N - n)).norm(), tol));
          r.checks.push_back(make_check("completeness" + at, "(pop_b + pop_c + pop_a) x = N x", "trivial",
                                        Compare::abs_diff, 0.0, pb.plus(pc).plus(pa).plus(cn, -double(N)).norm(), tol));
        }
        double worst = 0;
        for (int n = 0; n <= top; ++n) {
          for (int m = 0; m <= top; ++m) {
            const double target = n == m ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(inner_product(states[static_cast<std::size_t>(n)],
                                                           states[static_cast<std::size_t>(m)]) - target));
          }
        }
        r.checks.push_back(make_check("orthonormality" + where, "<C^n|C^m> = delta_nm", "closed-form", Compare::abs_diff,
                                      0.0, worst, tol));
      });
    }
  }
}

void run_verify_dicke(const json& p, Report& r) {
  const double tol = real(p, "tolerance");
  const double k = real(p, "wavevector");
  for (int N : ints(p, "atoms")) {
    guarded(r.checks, tag("dicke", {{"N", num(N)}}), "Dicke eigenvalues", [&] {
      const Geometry g = Geometry::lattice(N);
      const int top = std::min(integer(p, "max_excitations"), N);
      const KetSpace space = KetSpace::atoms_only(N, std::min(top + 1, N));
      for (int n = 0; n <= top; ++n) {
        const std::string at = tag("", {{"N", num(N)}, {"n", num(n)}});
        const auto e = angular_momentum_eigencheck(storage_direct(StorageSpec::single(N, k, n), g, space), k, g);
        const double r3 = (2.0 * n - N) / 2;
        const double r2 = N / 2.0 * (N / 2.0 + 1);
        r.checks.push_back(make_check("R3" + at, "R3 C^n = (2n-N)/2 C^n", "closed-form", Compare::abs_diff, r3, e.r3, tol));
        r.checks.push_back(make_check("R3-residual" + at, "||R3 x - r3 x|| = 0", "closed-form", Compare::abs_diff, 0.0,
                                      e.r3_residual, tol));
        r.checks.push_back(make_check("R2" + at, "R^2 C^n = (N/2)(N/2+1) C^n", "closed-form", Compare::rel_diff, r2,
                                      e.r_squared, tol));
        r.checks.push_back(make_check("R2-residual" + at, "||R^2 x - r2 x|| = 0", "closed-form", Compare::abs_diff, 0.0,
                                      e.r_squared_residual, tol * std::max(1.0, r2)));
      }
    });
  }
}

void run_commutator_scan(const json& p, Report& r) {
  const double tol = real(p, "tolerance");
  r.table.columns = {"atoms", "k", "k_prime", "dk_times_length", "residual", "phase_sum_over_n", "envelope"};
  for (int N : ints(p, "atoms")) {
    guarded(r.checks, tag("commutator", {{"N", num(N)}}), "vacuum commutator", [&] {
      const Geometry g = make_geometry(p, N);
      const KetSpace space = KetSpace::atoms_only(N, 1);
      const SparseKet vac = vacuum(space);
      auto element = [&](double k, double kp) {
        return commutator_matrix_element(sigma(k), sigma_dagger(kp), g, vac, vac);
      };
      for (const auto& pr : p.at("pairs")) {
        const double k = pr[0].get<double>();
        const double kp = pr[1].get<double>();
        const Complex m = element(k, kp);
        const Complex s = phase_sum(g, kp - k).direct / double(N);
        r.checks.push_back(make_check(tag("commutator", {{"N", num(N)}, {"k", num(k)}, {"k'", num(kp)}}),
                                      "<C^0|[sigma_k, sigma_k'^dag]|C^0> = phase_sum(k'-k)/N", "oracle",
                                      Compare::abs_diff, 0.0, std::abs(m - s), tol));
      }
      const double kb = real(p, "k_base");
      for (double dkl : reals(p, "dk_length_grid")) {
        const double dk = dkl / g.length();
        const double kp = kb + dk;
        const Complex m = element(kb, kp);
        const double resid = std::abs(m);
        const double env = g.kind() == GeometryKind::lattice ? lattice_envelope(N, dk) : std::nan("");
        r.table.add({double(N), kb, kp, dkl, resid, std::abs(phase_sum(g, dk).direct) / N, env});
        if (dkl >= real(p, "decay_threshold") && std::abs(kb) <= real(p, "max_kd")) {
          r.checks.push_back(make_check(tag("decay", {{"N", num(N)}, {"dkL", num(dkl)}}),
                                        "|<C^0|[sigma_k, sigma_k'^dag]|C^0>| small once |k-k'|L is large", "oracle",
                                        Compare::less_than, real(p, "decay_bound"), resid, 0.0));
        }
        if (g.kind() == GeometryKind::lattice) {
          r.checks.push_back(make_check(tag("envelope", {{"N", num(N)}, {"dkL", num(dkl)}}),
                                        "|phase_sum(k)|/N <= min(1, 2/(N|sin(k/2)|))", "closed-form", Compare::at_most,
                                        std::min(1.0, env) + 1e-12, resid, 0.0));
        }
      }
    });
  }
}

void run_mode_conditions(const json& p, Report& r) {
  if (!p.at("wavelength_nm").is_null()) {
    guarded(r.checks, "mode-spacing", "lambda^2/(2 pi L)", [&] {
      const double spacing = resolvable_mode_spacing(real(p, "wavelength_nm"), real(p, "medium_length_um") * 1e3);
      r.measurements.push_back({"mode_spacing_nm", spacing});
      if (!p.at("expected_spacing_nm").is_null()) {
        r.checks.push_back(make_check("mode-spacing", "lambda^2/(2 pi L)", "closed-form", Compare::abs_diff,
                                      real(p, "expected_spacing_nm"), spacing, real(p, "spacing_tolerance_nm")));
      }
    });
  }
  r.table.columns = {"atoms", "first", "second", "dk_times_length", "residual", "pass"};
  for (int N : ints(p, "atoms")) {
    guarded(r.checks, tag("conditions", {{"N", num(N)}}), "mode conditions", [&] {
      const Geometry g = make_geometry(p, N);
      ModeSet m;
      m.k_signal = real(p, "k_signal");
      m.k_control = real(p, "k_control");
      m.detunings = reals(p, "detunings");
      m.transition = p.at("transition") == "raman" ? Transition::raman : Transition::cascade;
      const ConditionThresholds t{real(p, "min_ratio"), real(p, "max_residual")};
      const auto rep = check_mode_conditions(g, m, integer(p, "max_excitations"), t);
      const std::string at = tag("", {{"N", num(N)}});
      r.checks.push_back(make_check("low-excitation" + at, "N / n_max >= threshold", "trivial", Compare::at_least,
                                    t.min_ratio, rep.atoms_per_excitation, 0.0));
      r.checks.push_back(make_check("dense-medium-wavelength" + at, "lambda / d >= threshold", "trivial",
                                    Compare::at_least, t.min_ratio, rep.wavelength_over_spacing, 0.0));
      r.checks.push_back(make_check("dense-medium-length" + at, "L / d >= threshold", "trivial", Compare::at_least,
                                    t.min_ratio, rep.length_over_spacing, 0.0));
      for (const auto& pc : rep.pairs) {
        const std::string pair = at + " pair=" + num(pc.first) + "," + num(pc.second);
        r.checks.push_back(make_check("distinguishable" + pair, "|k-k'| L >= threshold", "trivial", Compare::at_least,
                                      t.min_ratio, pc.dk_times_length, 0.0));
        r.checks.push_back(make_check("cross-residual" + pair, "|phase_sum(k'-k)|/N <= bound", "oracle",
                                      Compare::at_most, t.max_residual, pc.residual, 0.0));
        r.table.add({double(N), double(pc.first), double(pc.second), pc.dk_times_length, pc.residual,
                     pc.pass ? 1.0 : 0.0});
      }
      if (rep.seed) r.measurements.push_back({"geometry_seed", double(*rep.seed)});
    });
  }
}

ModeSet eit_modes(const json& p) {
  ModeSet m;
  m.k_signal = real(p, "k_signal");
  m.k_control = real(p, "k_control");
  m.detunings = {0.0};
  return m;
}

void run_dark_residual(const json& p, Report& r) {
  const double tol = real(p, "tolerance");
  const double g0 = real(p, "g");
  const ModeSet modes = eit_modes(p);
  for (int N : ints(p, "atoms")) {
    const Geometry g = make_geometry(p, N);
    for (int n : ints(p, "photons")) {
      for (double th : reals(p, "thetas")) {
        const std::string at = tag("", {{"N", num(N)}, {"n", num(n)}, {"theta", num(th)}});
        guarded(r.checks, "null-residual" + at, "H_I D^n = 0", [&] {
          const auto params = EitParams::with_theta(g0, th, N, modes);
          r.checks.push_back(make_check("null-residual" + at, "||H_I D^n|| / ||D^n|| = 0", "closed-form",
                                        Compare::abs_diff, 0.0,
                                        null_eigenvalue_residual(n, 0, params, g, DarkForm::exact), tol));
          double worst = 0;
          for (double v : dark_interference_residuals(n, 0, params, g)) worst = std::max(worst, v);
          r.checks.push_back(make_check("interference" + at,
                                        "signal and control absorption cancel in every photon-number sector",
                                        "closed-form", Compare::abs_diff, 0.0, worst, real(p, "interference_tolerance")));
        });
      }
    }
  }
  const auto approx_atoms = ints(p, "approx_atoms");
  const int na = integer(p, "approx_photons");
  const double tha = real(p, "approx_theta");
  r.table.columns = {"atoms", "photons", "theta", "approx_residual", "exact_approx_fidelity"};
  std::optional<double> previous;
  for (int N : approx_atoms) {
    const std::string at = tag("", {{"N", num(N)}, {"n", num(na)}});
    guarded(r.checks, "approx-residual" + at, "approximate dark state residual", [&] {
      const Geometry g = make_geometry(p, N);
      const auto params = EitParams::with_theta(g0, tha, N, modes);
      const double res = null_eigenvalue_residual(na, 0, params, g, DarkForm::approx);
      const KetSpace space = eit_space(N, 1, na);
      const double f = fidelity(dark_state(na, 0, tha, params, g, DarkForm::exact, space),
                                dark_state(na, 0, tha, params, g, DarkForm::approx, space));
      r.measurements.push_back({"approx_residual" + at, res});
      r.measurements.push_back({"exact_approx_fidelity" + at, f});
      r.table.add({double(N), double(na), tha, res, f});
      if (previous) {
        r.checks.push_back(make_check("approx-decreasing" + at, "approximate-form residual shrinks with N", "oracle",
                                      Compare::less_than, *previous, res, 0.0));
      }
      previous = res;
    });
  }
}

void run_adiabatic_sweep(const json& p, Report& r) {
  const int n = integer(p, "photons");
  for (int N : ints(p, "atoms")) {
    const std::string at = tag("", {{"N", num(N)}, {"n", num(n)}});
    guarded(r.checks, "sweep" + at, "adiabatic transfer to the negative copy", [&] {
      const Geometry g = make_geometry(p, N);
      EitParams params;
      params.g = real(p, "g");
      params.modes = eit_modes(p);
      const double G = params.collective_coupling(N);
      RampSchedule ramp;
      ramp.theta_start = real(p, "theta_start");
      ramp.theta_end = real(p, "theta_end");
      ramp.duration = real(p, "duration_scaled") / G;
      ramp.shape = ramp_shape_from_string(p.at("shape").get<std::string>());
      ramp.max_step = real(p, "max_step");
      ramp.omega_cap_ratio = real(p, "omega_cap_ratio");
      ramp.samples = static_cast<std::size_t>(integer(p, "samples"));
      ramp.norm_drift_bound = real(p, "norm_drift_bound");

      const KetSpace space = KetSpace::joint(N, 1, n, n, n);
      JointLabel start{FieldConfig({n}), AtomConfig::ground(N)};
      const SparseKet initial = SparseKet::basis(space, start);
      const Trajectory tr = adiabatic_sweep(initial, params, g, ramp);
      const SparseKet target = dark_state(n, 0, ramp.theta_end, params, g, DarkForm::approx, space);
      const double f = fidelity(normalize(tr.final_state).ket, target);
      r.measurements.push_back({"final_fidelity" + at, f});
      r.measurements.push_back({"norm_drift" + at, tr.stats.norm_drift});
      r.measurements.push_back({"steps" + at, double(tr.stats.steps)});
      r.measurements.push_back({"final_dark_fidelity" + at, tr.samples.back().dark_fidelity});
      r.checks.push_back(make_check("norm-drift" + at, "RK4 norm drift within bound", "trivial", Compare::at_most,
                                    ramp.norm_drift_bound, tr.stats.norm_drift, 0.0));
      if (!p.at("min_fidelity").is_null()) {
        r.checks.push_back(make_check("final-fidelity" + at, "fidelity with (-1)^n |0>|C^n>", "oracle",
                                      Compare::at_least, real(p, "min_fidelity"), f, 0.0));
      }
      if (!p.at("max_fidelity").is_null()) {
        r.checks.push_back(make_check("nonadiabatic-fidelity" + at, "fast ramp leaves the dark subspace", "oracle",
                                      Compare::at_most, real(p, "max_fidelity"), f, 0.0));
      }
      // Photon + c + a excitations are conserved by H_I with the free term off.
      double worst = 0;
      const double q0 = tr.samples.front().photon_expectation + tr.samples.front().c_population + tr.samples.front().a_population;
      for (const auto& s : tr.samples) {
        worst = std::max(worst, std::abs(s.photon_expectation + s.c_population + s.a_population - q0));
      }
      r.checks.push_back(make_check("excitation-conservation" + at, "<a^dag a + n_c + n_a> constant", "closed-form",
                                    Compare::abs_diff, 0.0, worst, 1e-8));
      r.table.columns = {"t", "omega", "theta", "norm", "dark_fidelity", "photon_expectation", "c_population"};
      for (const auto& s : tr.samples) {
        r.table.add({s.t, s.omega, s.theta, s.norm, s.dark_fidelity, s.photon_expectation, s.c_population});
      }
    });
  }
}

void run_dynamic_transfer(const json& p, Report& r) {
  const double tol = real(p, "tolerance");
  const auto photons = ints(p, "photons");
  const int cap = std::max(1, *std::max_element(photons.begin(), photons.end()));
  const Complex I{0.0, 1.0};

  guarded(r.checks, "single-photon", "cos|1,C^0> - i sin|0,C^1>", [&] {
    const BosonicState one = BosonicState::fock(1, 0, 1, 1);
    for (double wt : reals(p, "omega_times")) {
      const BosonicState s = evolve_analytic(one, wt);
      const double err = std::abs(s.at(1, 0) - std::cos(wt)) + std::abs(s.at(0, 1) + I * std::sin(wt));
      r.checks.push_back(make_check(tag("single-photon", {{"wt", num(wt)}}), "cos(wt)|1,C^0> - i sin(wt)|0,C^1>",
                                    "closed-form", Compare::abs_diff, 0.0, err, tol));
    }
  });
  for (int m : photons) {
    const std::string at = tag("", {{"m", num(m)}});
    guarded(r.checks, "fock" + at, "Fock-state transfer", [&] {
      const BosonicState s0 = BosonicState::fock(m, 0, cap, cap);
      const BosonicState half = evolve_analytic(s0, kPi / 2);
      r.checks.push_back(make_check("full-transfer" + at, "wt=pi/2: (-i)^m |0,C^m>", "closed-form", Compare::abs_diff,
                                    0.0, std::abs(half.at(0, m) - std::pow(-I, m)), tol));
      const BosonicState flip = evolve_analytic(s0, kPi);
      r.checks.push_back(make_check("sign-flip" + at, "wt=pi: (-1)^m |m,C^0>", "closed-form", Compare::abs_diff, 0.0,
                                    std::abs(flip.at(m, 0) - std::pow(-1.0, m)), tol));
      const BosonicState back = evolve_analytic(s0, 2 * kPi);
      r.checks.push_back(make_check("recurrence" + at, "wt=2pi: original state", "closed-form", Compare::abs_diff, 1.0,
                                    fidelity(back, s0), tol));
      double worst = 0;
      for (double wt : reals(p, "omega_times")) {
        worst = std::max(worst, std::abs(std::sqrt(evolve_analytic(s0, wt).squared_norm()) - 1.0));
      }
      r.checks.push_back(make_check("unitarity" + at, "norm preserved", "trivial", Compare::abs_diff, 0.0, worst, tol));
    });
  }
  guarded(r.checks, "purity-minimum", "entanglement maximal at wt=pi/4", [&] {
    const BosonicState one = BosonicState::fock(1, 0, 1, 1);
    const int grid = integer(p, "purity_grid");
    double best = 2;
    double best_t = 0;
    for (int i = 0; i <= grid; ++i) {
      const double wt = kPi / 2 * i / grid;
      const double pur = field_purity(evolve_analytic(one, wt));
      if (pur < best - 1e-15) {
        best = pur;
        best_t = wt;
      }
    }
    r.checks.push_back(make_check("purity-minimum-location", "field purity is smallest at wt = pi/4", "closed-form",
                                  Compare::abs_diff, kPi / 4, best_t, kPi / 2 / grid / 2));
    r.checks.push_back(make_check("purity-minimum-value", "field purity at wt = pi/4 is 1/2", "closed-form",
                                  Compare::abs_diff, 0.5, field_purity(evolve_analytic(one, kPi / 4)), tol));
  });
  for (int m : photons) {
    if (m < 2) continue;
    guarded(r.checks, tag("purity", {{"m", num(m)}}), "field purity extremum", [&] {
      const BosonicState s0 = BosonicState::fock(m, 0, cap, cap);
      const int grid = integer(p, "purity_grid");
      double best = 2, best_t = 0;
      for (int i = 0; i <= grid; ++i) {
        const double wt = kPi / 2 * i / grid;
        const double pur = field_purity(evolve_analytic(s0, wt));
        if (pur < best - 1e-15) {
          best = pur;
          best_t = wt;
        }
      }
      r.measurements.push_back({tag("purity_min_location", {{"m", num(m)}}), best_t});
      r.measurements.push_back({tag("purity_min_value", {{"m", num(m)}}), best});
    });
  }

  const double wt = real(p, "finite_n_omega_t");
  ExactTransferOptions opts;
  opts.max_step_omega = real(p, "max_step_omega");
  opts.norm_drift_bound = real(p, "norm_drift_bound");
  r.table.columns = {"atoms", "photons", "omega_t", "deviation"};
  for (int m : ints(p, "finite_n_photons")) {
    std::optional<double> previous;
    for (int N : ints(p, "atoms")) {
      const std::string at = tag("", {{"N", num(N)}, {"m", num(m)}});
      guarded(r.checks, "finite-n" + at, "finite-N deviation", [&] {
        if (m > N) throw InvalidArgument("more excitations than atoms");
        const Geometry g = make_geometry(p, N);
        const double dev = finite_n_deviation(BosonicState::fock(m, 0, m, m), g, real(p, "wavevector"), wt, opts);
        r.measurements.push_back({"finite_n_deviation" + at, dev});
        r.table.add({double(N), double(m), wt, dev});
        if (m <= 1) {
          r.checks.push_back(make_check("single-excitation-exact" + at, "one excitation is exactly bosonic", "trivial",
                                        Compare::abs_diff, 0.0, dev, real(p, "single_excitation_tolerance")));
        } else if (previous) {
          r.checks.push_back(make_check("finite-n-trend" + at, "||exact - bosonic|| non-increasing in N", "oracle",
                                        Compare::at_most, *previous, dev, 0.0));
        }
        previous = dev;
      });
    }
  }
}

std::vector<Complex> random_amplitudes(std::mt19937_64& rng, int max_quanta) {
  std::uniform_int_distribution<int> len(0, max_quanta);
  std::normal_distribution<double> nd;
  std::vector<Complex> v(static_cast<std::size_t>(len(rng) + 1));
  double s = 0;
  for (auto& a : v) {
    a = {nd(rng), nd(rng)};
    s += std::norm(a);
  }
  for (auto& a : v) a /= std::sqrt(s);
  return v;
}

void run_swap(const json& p, Report& r) {
  const double tol = real(p, "tolerance");
  std::mt19937_64 rng(p.at("seed").get<std::uint64_t>());
  const std::vector<double> times{kPi / 2, kPi, 3 * kPi / 2, 2 * kPi};
  const int trials = integer(p, "trials");
  for (int t = 0; t < trials; ++t) {
    const auto f = random_amplitudes(rng, integer(p, "max_quanta"));
    const auto a = random_amplitudes(rng, integer(p, "max_quanta"));
    guarded(r.checks, tag("swap", {{"trial", num(t)}}), "state swap", [&] {
      const auto rep = swap_check(f, a, times, tol);
      for (const auto& c : rep.checkpoints) {
        r.checks.push_back(make_check(tag("swap", {{"trial", num(t)}, {"wt", num(c.omega_t)}}), c.expected, "oracle",
                                      Compare::abs_diff, 1.0, c.fidelity.value_or(0.0), tol));
      }
    });
  }
}

void run_normalization_audit(const json& p, Report& r) {
  const double tol = real(p, "tolerance");
  const auto ks = reals(p, "wavevectors");
  r.table.columns = {"atoms", "m1", "m2", "raw_squared_norm", "diagonal_term", "cross_term", "numeric_coefficient",
                     "asymptotic_coefficient", "relative_deviation"};
  for (int N : ints(p, "atoms")) {
    const Geometry g = make_geometry(p, N);
    for (const auto& occ : p.at("occupancies")) {
      const int m1 = occ[0].get<int>(), m2 = occ[1].get<int>();
      const std::string at = tag("", {{"N", num(N)}, {"m", num(m1) + "," + num(m2)}});
      guarded(r.checks, "audit" + at, "multimode normalization", [&] {
        StorageSpec spec{N, {}};
        if (m1 > 0) spec.modes.push_back({ks[0], m1});
        if (m2 > 0) spec.modes.push_back({ks[1], m2});
        const auto a = normalization_audit(spec, g);
        const double oracle = raw_squared_norm_by_permutations(spec, g);
        r.checks.push_back(make_check("raw-norm-vs-permutations" + at, "brute-force sum over all orderings",
                                      "oracle", Compare::rel_diff, oracle, a.raw_squared_norm, tol));
        std::vector<int> counts{m1, m2};
        double mult = 1;
        for (int m : counts) mult *= factorial(m);
        r.checks.push_back(make_check("diagonal-term" + at, "N(N-1)...(N-n+1) / (m_1! ... m_s!)", "closed-form",
                                      Compare::rel_diff, falling_factorial(N, m1 + m2) / mult, a.diagonal_term, tol));
        r.checks.push_back(make_check("split" + at, "diagonal + cross = raw", "trivial", Compare::rel_diff,
                                      a.raw_squared_norm, a.diagonal_term + a.cross_term, tol));
        const auto lad = storage_ladder(spec, g);
        const auto dir = storage_direct(spec, g);
        r.checks.push_back(make_check("route-fidelity" + at, "fidelity(direct, ladder) = 1", "oracle",
                                      Compare::abs_diff, 1.0, fidelity(dir, lad.ket), tol));
        r.measurements.push_back({"relative_deviation" + at, a.relative_deviation});
        r.measurements.push_back({"norm_with_asymptotic" + at, a.norm_with_asymptotic});
        r.table.add({double(N), double(m1), double(m2), a.raw_squared_norm, a.diagonal_term, a.cross_term,
                     a.numeric_coefficient, a.asymptotic_coefficient, a.relative_deviation});
      });
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::verify_ladder: return "verify-ladder";
    case ScenarioKind::verify_dicke: return "verify-dicke";
    case ScenarioKind::commutator_scan: return "commutator-scan";
    case ScenarioKind::mode_conditions: return "mode-conditions";
    case ScenarioKind::dark_residual: return "dark-residual";
    case ScenarioKind::adiabatic_sweep: return "adiabatic-sweep";
    case ScenarioKind::dynamic_transfer: return "dynamic-transfer";
    case ScenarioKind::swap: return "swap";
    case ScenarioKind::normalization_audit: return "normalization-audit";
  }
  return "?";
}

const std::vector<ScenarioKind>& all_scenarios() {
  static const std::vector<ScenarioKind> all{
      ScenarioKind::verify_ladder,  ScenarioKind::verify_dicke,     ScenarioKind::commutator_scan,
      ScenarioKind::mode_conditions, ScenarioKind::dark_residual,   ScenarioKind::adiabatic_sweep,
      ScenarioKind::dynamic_transfer, ScenarioKind::swap,           ScenarioKind::normalization_audit,
  };
  return all;
}

std::optional<ScenarioKind> scenario_from_string(const std::string& s) {
  for (auto k : all_scenarios()) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

namespace {
std::string join_violations(const std::vector<std::string>& v) {
  std::string s = "invalid configuration:";
  for (const auto& e : v) s += "\n  - " + e;
  return s;
}
}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

json default_params(ScenarioKind kind) {
  json j = json::object();
  for (const auto& f : schema_for(kind)) j[f.key] = f.value;
  j["scenario"] = to_string(kind);
  return j;
}

ScenarioConfig ScenarioConfig::defaults(ScenarioKind kind) { return {kind, default_params(kind)}; }

ScenarioConfig ScenarioConfig::from_json(const json& j) {
  std::vector<std::string> errs;
  if (!j.is_object()) throw ConfigError({"configuration must be a JSON object"});
  if (!j.contains("schema_version")) {
    errs.push_back("schema_version: missing");
  } else if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != kSchemaVersion) {
    errs.push_back("schema_version: expected " + std::to_string(kSchemaVersion));
  }
  std::optional<ScenarioKind> kind;
  if (!j.contains("scenario") || !j.at("scenario").is_string()) {
    errs.push_back("scenario: missing or not a string");
  } else {
    kind = scenario_from_string(j.at("scenario").get<std::string>());
    if (!kind) errs.push_back("scenario: unknown kind '" + j.at("scenario").get<std::string>() + "'");
  }
  if (!kind) throw ConfigError(errs);

  const Schema schema = schema_for(*kind);
  json merged = default_params(*kind);
  for (const auto& [key, value] : j.items()) {
    auto it = std::find_if(schema.begin(), schema.end(), [&](const Field& f) { return key == f.key; });
    if (it == schema.end()) {
      errs.push_back(key + ": unknown key for scenario " + to_string(*kind));
      continue;
    }
    if (!type_ok(it->type, value)) {
      errs.push_back(key + ": expected " + type_name(it->type));
      continue;
    }
    if (key == "seed" && value.get<std::int64_t>() < 0) {
      errs.push_back("seed: must be non-negative");
      continue;
    }
    merged[key] = value;
  }
  if (errs.empty()) semantic_checks(*kind, merged, errs);
  if (!errs.empty()) throw ConfigError(errs);
  return {*kind, merged};
}

json ScenarioConfig::to_json() const { return params; }
std::uint64_t ScenarioConfig::seed() const { return params.at("seed").get<std::uint64_t>(); }
void ScenarioConfig::set_seed(std::uint64_t seed) { params["seed"] = seed; }

std::string to_string(Compare c) {
  switch (c) {
    case Compare::abs_diff: return "abs-diff";
    case Compare::rel_diff: return "rel-diff";
    case Compare::at_most: return "at-most";
    case Compare::at_least: return "at-least";
    case Compare::less_than: return "less-than";
  }
  return "?";
}

Check make_check(std::string name, std::string identity, std::string provenance, Compare compare, double expected,
                 double actual, double tolerance) {
  Check c{std::move(name), std::move(identity), std::move(provenance), compare, expected, actual, tolerance, false, {}};
  switch (compare) {
    case Compare::abs_diff: c.pass = std::abs(actual - expected) <= tolerance; break;
    case Compare::rel_diff:
      c.pass = std::abs(actual - expected) <= tolerance * std::max(1.0, std::abs(expected));
      break;
    case Compare::at_most: c.pass = actual <= expected; break;
    case Compare::at_least: c.pass = actual >= expected; break;
    case Compare::less_than: c.pass = actual < expected; break;
  }
  return c;
}

Check failed_check(std::string name, std::string identity, std::string provenance, const std::string& error) {
  Check c{std::move(name), std::move(identity), std::move(provenance), Compare::abs_diff, 0, std::nan(""), 0, false,
          error};
  return c;
}

namespace {
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
}  // namespace

json Check::to_json() const {
  json j{{"name", name},
         {"identity", identity},
         {"provenance", provenance},
         {"compare", qstore::harness::to_string(compare)},
         {"expected", number_or_null(expected)},
         {"actual", number_or_null(actual)},
         {"tolerance", tolerance},
         {"pass", pass}};
  if (error) j["error"] = *error;
  return j;
}

json Measurement::to_json() const { return {{"name", name}, {"value", number_or_null(value)}}; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void Table::add(const std::vector<double>& values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(format_double(v));
  rows.push_back(std::move(row));
}

void write_csv(const Table& t, std::ostream& os) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

namespace {
std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}
}  // namespace

void write_checks_csv(const std::vector<Check>& checks, std::ostream& os) {
  os << "name,expected,actual,tolerance,compare,pass,provenance,identity\n";
  for (const auto& c : checks) {
    os << csv_quote(c.name) << ',' << format_double(c.expected) << ',' << format_double(c.actual) << ','
       << format_double(c.tolerance) << ',' << to_string(c.compare) << ',' << (c.pass ? "pass" : "fail") << ','
       << c.provenance << ',' << csv_quote(c.error ? c.identity + " (" + *c.error + ")" : c.identity) << '\n';
  }
}

bool Report::all_pass() const { return failures() == 0 && !checks.empty(); }

std::size_t Report::failures() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.pass; }));
}

json Report::to_json() const {
  json j;
  j["artifact"] = "qstore";
  j["artifact_version"] = kArtifactVersion;
  j["scenario"] = scenario;
  j["checks"] = json::array();
  for (const auto& c : checks) j["checks"].push_back(c.to_json());
  j["measurements"] = json::array();
  for (const auto& m : measurements) j["measurements"].push_back(m.to_json());
  j["summary"] = {{"checks", checks.size()}, {"failed", failures()}};
  j["status"] = all_pass() ? "pass" : "fail";
  if (runtime_seconds) j["runtime_seconds"] = *runtime_seconds;
  return j;
}

Report run(const ScenarioConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  Report r;
  r.scenario = config.params;
  const json& p = config.params;
  // Failures outside any check group still land in the report.
  guarded(r.checks, "setup", "scenario setup", [&] {
    switch (config.kind) {
      case ScenarioKind::verify_ladder: run_verify_ladder(p, r); break;
      case ScenarioKind::verify_dicke: run_verify_dicke(p, r); break;
      case ScenarioKind::commutator_scan: run_commutator_scan(p, r); break;
      case ScenarioKind::mode_conditions: run_mode_conditions(p, r); break;
      case ScenarioKind::dark_residual: run_dark_residual(p, r); break;
      case ScenarioKind::adiabatic_sweep: run_adiabatic_sweep(p, r); break;
      case ScenarioKind::dynamic_transfer: run_dynamic_transfer(p, r); break;
      case ScenarioKind::swap: run_swap(p, r); break;
      case ScenarioKind::normalization_audit: run_normalization_audit(p, r); break;
    }
  });
  if (p.value("record_runtime", false)) {
    r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return r;
}

double estimate_basis_size(const ScenarioConfig& config) {
  const json& p = config.params;
  auto max_of = [&](const char* key, int fallback) {
    if (!p.contains(key)) return fallback;
    const auto v = ints(p, key);
    return v.empty() ? fallback : *std::max_element(v.begin(), v.end());
  };
  // Labels with at most `exc` atomic excitations, times photon-number layers.
  auto sector = [](int N, int exc, int layers, bool with_a) {
    double s = 0;
    for (int j = 0; j <= std::min(exc, N); ++j) s += binomial(N, j) * (with_a ? j + 1 : 1);
    return s * layers;
  };
  const int N = max_of("atoms", 1);
  switch (config.kind) {
    case ScenarioKind::verify_ladder:
    case ScenarioKind::verify_dicke: return sector(N, integer(p, "max_excitations") + 1, 1, false);
    case ScenarioKind::commutator_scan:
    case ScenarioKind::mode_conditions: return N + 1.0;
    case ScenarioKind::dark_residual: {
      const int n = std::max(max_of("photons", 0), integer(p, "approx_photons"));
      return sector(std::max(N, max_of("approx_atoms", 1)), n + 1, n + 1, true);
    }
    case ScenarioKind::adiabatic_sweep: {
      const int n = integer(p, "photons");
      return sector(N, n, n + 1, true);
    }
    case ScenarioKind::dynamic_transfer: {
      const int m = max_of("finite_n_photons", 0);
      return sector(N, m, m + 1, false);
    }
    case ScenarioKind::swap: {
      const double q = integer(p, "max_quanta") + 1.0;
      return q * q;
    }
    case ScenarioKind::normalization_audit: {
      int n = 0;
      for (const auto& occ : p.at("occupancies")) n = std::max(n, occ[0].get<int>() + occ[1].get<int>());
      return sector(N, n, 1, false);
    }
  }
  return 0;
}

BudgetExceeded::BudgetExceeded(double estimate, double budget)
    : Error("scan refused: estimated basis size " + format_double(estimate) + " labels exceeds budget " +
            format_double(budget)),
      estimate_(estimate),
      budget_(budget) {}

ScanConfig ScanConfig::from_json(const json& j) {
  std::vector<std::string> errs;
  if (!j.is_object()) throw ConfigError({"scan configuration must be a JSON object"});
  for (const auto& [key, value] : j.items()) {
    if (key != "base" && key != "grid" && key != "max_basis_size" && key != "schema_version") {
      errs.push_back(key + ": unknown key for scan");
    }
  }
  if (!j.contains("base")) errs.push_back("base: missing");
  if (!j.contains("grid") || !j.at("grid").is_object()) errs.push_back("grid: missing or not an object");
  if (j.contains("max_basis_size") && !(j.at("max_basis_size").is_number() && j.at("max_basis_size").get<double>() > 0)) {
    errs.push_back("max_basis_size: must be a positive number");
  }
  if (!errs.empty()) throw ConfigError(errs);

  ScanConfig s{ScenarioConfig::from_json(j.at("base")), {}, j.value("max_basis_size", 2e6)};
  const Schema schema = schema_for(s.base.kind);
  for (const auto& [key, values] : j.at("grid").items()) {
    auto it = std::find_if(schema.begin(), schema.end(), [&](const Field& f) { return key == f.key; });
    if (it == schema.end() || key == "scenario" || key == "schema_version") {
      errs.push_back("grid." + key + ": not a scannable key for " + to_string(s.base.kind));
      continue;
    }
    if (!values.is_array() || values.empty()) {
      errs.push_back("grid." + key + ": need a non-empty list of values");
      continue;
    }
    std::vector<json> vs;
    for (const auto& v : values) {
      // A scalar grid value for a list-valued key means a one-element list.
      const bool list_key = it->type == Ty::int_list || it->type == Ty::number_list || it->type == Ty::string_list;
      json val = list_key && !v.is_array() ? json::array({v}) : v;
      if (!type_ok(it->type, val)) errs.push_back("grid." + key + ": value " + v.dump() + " is not a " + type_name(it->type));
      vs.push_back(std::move(val));
    }
    s.grid.emplace_back(key, std::move(vs));
  }
  if (!errs.empty()) throw ConfigError(errs);
  for (const auto& pt : s.points()) (void)pt;  // validates every point
  return s;
}

std::vector<ScenarioConfig> ScanConfig::points() const {
  std::vector<ScenarioConfig> out;
  std::vector<std::size_t> idx(grid.size(), 0);
  while (true) {
    json j = base.params;
    for (std::size_t d = 0; d < grid.size(); ++d) j[grid[d].first] = grid[d].second[idx[d]];
    out.push_back(ScenarioConfig::from_json(j));
    std::size_t d = grid.size();
    while (d > 0) {
      --d;
      if (++idx[d] < grid[d].second.size()) break;
      idx[d] = 0;
      if (d == 0) return out;
    }
    if (grid.empty()) return out;
  }
}

bool ScanResult::all_pass() const {
  return std::all_of(reports.begin(), reports.end(), [](const Report& r) { return r.all_pass(); });
}

json ScanResult::to_json() const {
  json j;
  j["artifact"] = "qstore";
  j["artifact_version"] = kArtifactVersion;
  j["points"] = json::array();
  for (const auto& r : reports) j["points"].push_back(r.to_json());
  std::size_t failed = 0;
  for (const auto& r : reports) failed += r.all_pass() ? 0 : 1;
  j["summary"] = {{"points", reports.size()}, {"failed_points", failed}};
  j["status"] = all_pass() ? "pass" : "fail";
  return j;
}

ScanResult scan(const ScanConfig& config, int jobs) {
  ScanResult res;
  res.points = config.points();
  for (const auto& pt : res.points) {
    const double est = estimate_basis_size(pt);
    if (est > config.max_basis_size) throw BudgetExceeded(est, config.max_basis_size);
  }
  res.reports.resize(res.points.size());
  const auto n = static_cast<std::ptrdiff_t>(res.points.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, jobs)) if (jobs > 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    res.reports[static_cast<std::size_t>(i)] = run(res.points[static_cast<std::size_t>(i)]);
  }

  // Long format: grid values, then one row per check or measurement.
  for (const auto& [key, values] : config.grid) res.table.columns.push_back(key);
  for (const char* c : {"record", "name", "value", "pass"}) res.table.columns.push_back(c);
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    std::vector<std::string> prefix;
    for (const auto& [key, values] : config.grid) {
      const json& v = res.points[i].params.at(key);
      const json& scalar = v.is_array() && v.size() == 1 ? v[0] : v;
      prefix.push_back(scalar.is_number() ? format_double(scalar.get<double>())
                                          : csv_quote(scalar.is_string() ? scalar.get<std::string>() : scalar.dump()));
    }
    for (const auto& c : res.reports[i].checks) {
      auto row = prefix;
      row.insert(row.end(), {"check", csv_quote(c.name), format_double(c.actual), c.pass ? "1" : "0"});
      res.table.rows.push_back(std::move(row));
    }
    for (const auto& m : res.reports[i].measurements) {
      auto row = prefix;
      row.insert(row.end(), {"measurement", csv_quote(m.name), format_double(m.value), ""});
      res.table.rows.push_back(std::move(row));
    }
  }
  return res;
}

}  // namespace qstore::harness
