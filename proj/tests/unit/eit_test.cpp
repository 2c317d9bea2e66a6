#include "test_support.hpp"

#include <qstore/eit.hpp>
#include <qstore/operators.hpp>
#include <qstore/storage.hpp>

#include <numbers>
#include <sstream>

using namespace qstore;
using qstore::testing::choose;
using qstore::testing::max_abs_diff;
constexpr double kPi = std::numbers::pi;

namespace {

ModeSet single_mode(double ks = 0.4, double kc = 0.1, double q = 0.0) {
  ModeSet m;
  m.k_signal = ks;
  m.k_control = kc;
  m.detunings = {q};
  return m;
}

EitParams params(double g, double omega, ModeSet m) {
  EitParams p;
  p.g = g;
  p.omega = omega;
  p.modes = std::move(m);
  return p;
}

SparseKet fock_with_storage(int photons, int n, const EitParams& p, const Geometry& g, const KetSpace& s) {
  const SparseKet atoms = storage_direct(StorageSpec::single(g.atoms(), p.k_storage(0), n), g);
  return tensor(FieldConfig({photons}), atoms, s);
}

// Overlap of the large-N expansion with the normalized ladder state.
double approx_exact_fidelity_oracle(int N, int n, double th) {
  const double c = std::cos(th), s = std::sin(th);
  double overlap = 0, norm2 = 0;
  for (int m = 0; m <= n; ++m) {
    double f = 1;
    for (int i = 0; i < m; ++i) f *= double(N - i) / N;
    const double w = choose(n, m) * std::pow(c, 2 * (n - m)) * std::pow(s, 2 * m);
    overlap += w * std::sqrt(f);
    norm2 += w * f;
  }
  return overlap * overlap / norm2;
}

}  // namespace

TEST(EitParams, MixingAngleAndValidation) {
  EitParams p = params(0.5, 2.0, single_mode());
  EXPECT_NEAR(p.theta(16), kPi / 4, 1e-15);
  EXPECT_DOUBLE_EQ(p.collective_coupling(16), 2.0);
  const EitParams q = EitParams::with_theta(1.0, kPi / 3, 9, single_mode());
  EXPECT_NEAR(q.omega, 3.0 / std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(q.theta(9), kPi / 3, 1e-15);
  EXPECT_EQ(EitParams::with_theta(1.0, kPi / 2, 9, single_mode()).omega, 0.0);
  EXPECT_THROW(EitParams::with_theta(1.0, 0.0, 9, single_mode()), InvalidArgument);
  p.modes.transition = Transition::cascade;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = params(0.0, 1.0, single_mode());
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = params(1.0, 1.0, ModeSet{});
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(Eit, InteractionAnnihilatesGroundVacuum) {
  const EitParams p = params(1.0, 2.0, single_mode());
  const Geometry g = Geometry::lattice(5);
  EXPECT_TRUE(apply_H_I(vacuum(eit_space(5, 1, 2)), p, g).empty());
}

TEST(Eit, ControlAbsorptionFromStorageState) {
  const Geometry g = Geometry::uniform_random(6, 6.0, 17);
  const EitParams p = params(1.0, 1.7, single_mode());
  const KetSpace s = eit_space(6, 1, 3);
  for (int n = 1; n <= 3; ++n) {
    const SparseKet got = apply_control_absorption(eit_storage_state(n, 0, p, g, s), p, g);
    const SparseKet want = a_excited_state(n - 1, 0, p, g, s).scaled(1.7 * std::sqrt(double(n)));
    EXPECT_NEAR(max_abs_diff(got, want), 0.0, 1e-14) << n;
  }
}

TEST(Eit, SignalAbsorptionFromOnePhoton) {
  const Geometry g = Geometry::lattice(5);
  const EitParams p = params(0.8, 1.0, single_mode());
  const KetSpace s = eit_space(5, 1, 3);
  const SparseKet got = apply_signal_absorption(fock_with_storage(1, 1, p, g, s), p, g);
  // g sqrt(N - n) with N = 5, n = 1
  EXPECT_NEAR(max_abs_diff(got, a_excited_state(1, 0, p, g, s).scaled(0.8 * 2.0)), 0.0, 1e-14);
  const SparseKet two = apply_signal_absorption(fock_with_storage(2, 2, p, g, s), p, g);
  EXPECT_NEAR(two.norm(), 0.8 * std::sqrt(2.0) * std::sqrt(3.0), 1e-14);
}

TEST(Eit, ExcitedStateOnTwoAtoms) {
  const Geometry g = Geometry::lattice(2);
  const EitParams p = params(1.0, 1.0, single_mode(0.4, 0.1));
  const KetSpace s = eit_space(2, 1, 1);
  const SparseKet a = a_excited_state(0, 0, p, g, s);
  const FieldConfig f({0});
  EXPECT_NEAR(std::abs(a.amplitude({f, AtomConfig(2, {}, {0})}) - 1 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a.amplitude({f, AtomConfig(2, {}, {1})}) - std::polar(1 / std::sqrt(2.0), 0.4)), 0.0, 1e-15);
  EXPECT_THROW(a_excited_state(2, 0, p, g, s), InvalidArgument);
}

TEST(EitProperty, ExcitedStatesAreNormalized) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> kd(-2.0, 2.0);
  for (int t = 0; t < 12; ++t) {
    const int N = 3 + t % 5;
    const Geometry g = Geometry::uniform_random(N, N, 60 + t);
    const EitParams p = params(1.0, 1.0, single_mode(kd(rng), kd(rng)));
    const int n = t % 3;
    EXPECT_NEAR(a_excited_state(n, 0, p, g, eit_space(N, 1, n + 1)).norm(), 1.0, 1e-14);
  }
}

TEST(Polariton, LimitsOfTheMixingAngle) {
  const Geometry g = Geometry::lattice(4);
  const EitParams p = params(1.0, 1.0, single_mode());
  const KetSpace s = eit_space(4, 1, 2);
  const SparseKet v = vacuum(s);
  EXPECT_NEAR(max_abs_diff(apply_polariton_dagger(v, 0, 0.0, p, g), field_raise(v, 0)), 0.0, 1e-16);
  EXPECT_NEAR(max_abs_diff(apply_polariton_dagger(v, 0, kPi / 2, p, g),
                           apply(sigma_dagger(p.k_storage(0)), g, v).scaled(-1.0)),
              0.0, 1e-16);
}

TEST(Polariton, CommutatorOnVacuum) {
  const Geometry g = Geometry::uniform_random(7, 7.0, 3);
  const EitParams p = params(1.0, 1.0, single_mode());
  const KetSpace s = eit_space(7, 1, 2);
  const SparseKet v = vacuum(s);
  for (double th : {0.2, 0.9, 1.4}) {
    const SparseKet up_down = apply_polariton(apply_polariton_dagger(v, 0, th, p, g), 0, th, p, g);
    EXPECT_NEAR(max_abs_diff(up_down, v), 0.0, 1e-15);
    EXPECT_TRUE(apply_polariton(v, 0, th, p, g).empty());
  }
}

TEST(Polariton, LadderNormAtZeroAngleIsFactorial) {
  const Geometry g = Geometry::lattice(5);
  const EitParams p = params(1.0, 1.0, single_mode());
  SparseKet x = vacuum(eit_space(5, 1, 4));
  for (int n = 0; n < 4; ++n) {
    const double before = x.norm();
    x = apply_polariton_dagger(x, 0, 0.0, p, g);
    EXPECT_NEAR(x.norm() / before, std::sqrt(n + 1.0), 1e-14);
  }
}

TEST(DarkState, ExactVersusApproxFidelity) {
  for (auto [N, n, th] : {std::tuple{4, 2, kPi / 4}, {6, 3, kPi / 3}, {10, 2, kPi / 6}}) {
    const Geometry g = Geometry::lattice(N);
    const EitParams p = EitParams::with_theta(1.0, th, N, single_mode());
    const KetSpace s = eit_space(N, 1, n);
    const SparseKet ex = dark_state(n, 0, th, p, g, DarkForm::exact, s);
    const SparseKet ap = dark_state(n, 0, th, p, g, DarkForm::approx, s);
    EXPECT_NEAR(ap.norm(), 1.0, 1e-14);
    EXPECT_NEAR(fidelity(ex, ap), approx_exact_fidelity_oracle(N, n, th), 1e-13);
  }
}

TEST(DarkState, FullStorageLimitIsAtomicState) {
  const Geometry g = Geometry::lattice(6);
  const EitParams p = EitParams::with_theta(1.0, kPi / 2, 6, single_mode());
  const KetSpace s = eit_space(6, 1, 2);
  for (auto form : {DarkForm::exact, DarkForm::approx}) {
    EXPECT_NEAR(fidelity(dark_state(2, 0, kPi / 2, p, g, form, s), eit_storage_state(2, 0, p, g, s)), 1.0, 1e-14);
  }
}

TEST(DarkState, NullResidualExamples) {
  const Geometry g = Geometry::lattice(8);
  for (double th : {kPi / 6, kPi / 4, kPi / 3}) {
    const EitParams p = EitParams::with_theta(1.0, th, 8, single_mode());
    for (int n : {1, 2, 3}) EXPECT_LT(null_eigenvalue_residual(n, 0, p, g, DarkForm::exact), 1e-13);
    EXPECT_LT(null_eigenvalue_residual(1, 0, p, g, DarkForm::approx), 1e-13);
    EXPECT_GT(null_eigenvalue_residual(2, 0, p, g, DarkForm::approx), 1e-3);
  }
  EXPECT_EQ(null_eigenvalue_residual(0, 0, EitParams::with_theta(1.0, 1.0, 8, single_mode()), g, DarkForm::exact), 0.0);
}

TEST(DarkState, FreeTermOnDetunedModeIsRejected) {
  EitParams p = params(1.0, 1.0, single_mode(0.4, 0.1, 0.05));
  p.include_free_term = true;
  EXPECT_THROW(null_eigenvalue_residual(1, 0, p, Geometry::lattice(4), DarkForm::exact), InvalidArgument);
  p.modes.detunings = {0.0};
  EXPECT_LT(null_eigenvalue_residual(1, 0, p, Geometry::lattice(4), DarkForm::exact), 1e-13);
}

TEST(DarkState, SignalAndControlTermsInterfere) {
  const Geometry g = Geometry::uniform_random(6, 6.0, 8);
  const EitParams p = EitParams::with_theta(1.0, 0.7, 6, single_mode());
  for (double r : dark_interference_residuals(3, 0, p, g)) EXPECT_LT(r, 1e-13);
  const SparseKet d = polariton_ladder_state(3, 0, 0.7, p, g, eit_space(6, 1, 3));
  EXPECT_GT(apply_signal_absorption(d, p, g).norm(), 0.1);
  EXPECT_GT(apply_control_absorption(d, p, g).norm(), 0.1);
}

TEST(DarkState, ApproxFamilyIsOrthonormal) {
  const Geometry g = Geometry::lattice(9);
  const EitParams p = EitParams::with_theta(1.0, 0.8, 9, single_mode());
  const KetSpace s = eit_space(9, 1, 3);
  std::vector<SparseKet> d;
  for (int n = 0; n <= 3; ++n) d.push_back(dark_state(n, 0, 0.8, p, g, DarkForm::approx, s));
  for (int i = 0; i <= 3; ++i) {
    for (int j = 0; j <= 3; ++j) EXPECT_NEAR(std::abs(inner_product(d[i], d[j])), i == j ? 1.0 : 0.0, 1e-14);
  }
}

TEST(Multimode, AngleLimits) {
  ModeSet m;
  m.k_signal = 0.4;
  m.k_control = 0.1;
  m.detunings = {0.0, 0.9};
  m.fock_cap = 2;
  const Geometry g = Geometry::uniform_random(6, 6.0, 12);
  const EitParams p = EitParams::with_theta(1.0, 0.5, 6, m);
  const KetSpace s = KetSpace::joint(6, 2, 3, 3, 1);
  const SparseKet fock = SparseKet::basis(s, {FieldConfig({2, 1}), AtomConfig::ground(6)});
  EXPECT_NEAR(fidelity(multimode_dark_state({2, 1}, 0.0, p, g, s), fock), 1.0, 1e-14);
  const SparseKet atoms = storage_direct(StorageSpec{6, {{p.k_storage(0), 2}, {p.k_storage(1), 1}}}, g);
  EXPECT_NEAR(fidelity(multimode_dark_state({2, 1}, kPi / 2, p, g, s), tensor(FieldConfig({0, 0}), atoms, s)), 1.0,
              1e-13);
  EXPECT_THROW(multimode_dark_state({1}, 0.5, p, g, s), InvalidArgument);
}

TEST(Multimode, SingleOccupiedModeMatchesDarkState) {
  ModeSet m = single_mode();
  m.detunings = {0.0, 0.7};
  const Geometry g = Geometry::lattice(5);
  const EitParams p = EitParams::with_theta(1.0, 0.6, 5, m);
  const KetSpace s = KetSpace::joint(5, 2, 2, 2, 1);
  EXPECT_NEAR(fidelity(multimode_dark_state({0, 2}, 0.6, p, g, s), dark_state(2, 1, 0.6, p, g, DarkForm::exact, s)),
              1.0, 1e-14);
}

TEST(EitProperty, InteractionIsHermitian) {
  std::mt19937_64 rng(52);
  const Geometry g = Geometry::uniform_random(5, 5.0, 13);
  ModeSet m = single_mode();
  m.detunings = {0.0, 0.3};
  EitParams p = params(0.7, 1.3, m);
  p.include_free_term = true;
  // Drawn below the caps so no term leaves the sector.
  const KetSpace small = KetSpace::joint(5, 2, 1, 1, 0);
  const KetSpace s = KetSpace::joint(5, 2, 2, 2, 1);
  for (int t = 0; t < 20; ++t) {
    const SparseKet x = qstore::testing::random_joint_ket(small, 8, rng).rehomed(s);
    const SparseKet y = qstore::testing::random_joint_ket(small, 8, rng).rehomed(s);
    const Complex lhs = inner_product(x, apply_H_I(y, p, g));
    const Complex rhs = std::conj(inner_product(y, apply_H_I(x, p, g)));
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-13);
  }
}

TEST(EitProperty, ExactDarkStatesAreNullVectorsAtRandomParameters) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> th(0.05, kPi / 2);
  std::uniform_real_distribution<double> kd(-2.0, 2.0);
  for (int t = 0; t < 12; ++t) {
    const int N = 3 + t % 6;
    const Geometry g = Geometry::uniform_random(N, N, 70 + t);
    const EitParams p = EitParams::with_theta(0.5 + t * 0.1, th(rng), N, single_mode(kd(rng), kd(rng)));
    EXPECT_LT(null_eigenvalue_residual(1 + t % 3, 0, p, g, DarkForm::exact), 1e-12);
  }
}

TEST(Ramp, EndpointsAndCap) {
  RampSchedule r;
  r.duration = 10;
  EXPECT_EQ(r.theta_at(0), 0.0);
  EXPECT_NEAR(r.theta_at(10), kPi / 2, 1e-15);
  EXPECT_NEAR(r.theta_at(5), kPi / 4, 1e-15);
  r.shape = RampShape::linear;
  EXPECT_NEAR(r.theta_at(2.5), kPi / 8, 1e-15);
  const EitParams p = params(1.0, 1.0, single_mode());
  EXPECT_DOUBLE_EQ(ramp_omega(r, p, 4, 0.0), 200.0);
  EXPECT_EQ(ramp_omega(r, p, 4, 10.0), 0.0);
  EXPECT_NEAR(ramp_omega(r, p, 4, 5.0), 2.0 / std::tan(kPi / 4), 1e-14);
  EXPECT_EQ(ramp_shape_from_string("linear"), RampShape::linear);
  EXPECT_EQ(to_string(RampShape::smooth_cosine), "smooth-cosine");
  EXPECT_THROW(ramp_shape_from_string("step"), InvalidArgument);
  r.theta_end = 2.0;
  EXPECT_THROW(r.validate(), InvalidArgument);
}

TEST(Sweep, FrozenRampKeepsDarkStateStationary) {
  const int N = 6;
  const Geometry g = Geometry::lattice(N);
  const EitParams p = EitParams::with_theta(1.0, 0.6, N, single_mode());
  RampSchedule r;
  r.theta_start = r.theta_end = 0.6;
  r.duration = 5;
  r.samples = 10;
  const SparseKet d = dark_state(2, 0, 0.6, p, g, DarkForm::exact, KetSpace::joint(N, 1, 2, 2, 2));
  const Trajectory tr = adiabatic_sweep(d, p, g, r);
  ASSERT_GE(tr.samples.size(), 2u);
  for (const auto& s : tr.samples) {
    EXPECT_NEAR(s.dark_fidelity, 1.0, 1e-10);
    EXPECT_NEAR(s.theta, 0.6, 1e-14);
  }
  EXPECT_NEAR(fidelity(normalize(tr.final_state).ket, d), 1.0, 1e-10);
  EXPECT_LT(tr.stats.norm_drift, 1e-10);

  std::ostringstream csv;
  write_trajectory_csv(tr, csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "t,omega,theta,norm,dark_fidelity,photon_expectation,c_population");
}

TEST(Sweep, CoarseStepIsReported) {
  const int N = 8;
  const Geometry g = Geometry::lattice(N);
  const EitParams p = EitParams::with_theta(1.0, 0.3, N, single_mode());
  RampSchedule r;
  r.theta_start = 0.3;
  r.theta_end = 1.2;
  r.duration = 5;
  r.max_step = 2.5;
  const SparseKet d = dark_state(1, 0, 0.3, p, g, DarkForm::exact, eit_space(N, 1, 1));
  EXPECT_THROW(adiabatic_sweep(d, p, g, r), StepTooCoarse);
  EXPECT_THROW(adiabatic_sweep(d.scaled(2.0), p, g, RampSchedule{}), NotNormalized);
}
