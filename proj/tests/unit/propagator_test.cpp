#include "test_support.hpp"

#include <qstore/operators.hpp>
#include <qstore/propagator.hpp>
#include <qstore/storage.hpp>

using namespace qstore;

namespace {

struct Rig {
  Geometry g = Geometry::lattice(3);
  KetSpace s = KetSpace::joint(3, 1, 1, 1, 0);
  LinearMap exchange = [this](const SparseKet& x) {
    return apply(sigma_dagger(0.4), g, field_lower(x, 0)).plus(field_raise(apply(sigma(0.4), g, x), 0));
  };
  SparseKet photon() const { return SparseKet::basis(s, {FieldConfig({1}), AtomConfig::ground(3)}); }
};

TimeDependentHamiltonian pauli_x(std::function<double(double)> f) {
  TimeDependentHamiltonian h;
  h.terms.push_back(kernels::csr_from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}}));
  h.coefficients.push_back(std::move(f));
  return h;
}

}  // namespace

TEST(SectorBasis, ClosureOfSinglePhotonExchange) {
  Rig r;
  const std::vector<LinearMap> gens{r.exchange};
  const SectorBasis b = SectorBasis::closure(r.photon(), gens);
  EXPECT_EQ(b.size(), 4u);
  EXPECT_LT(b.find({FieldConfig({0}), AtomConfig(3, {2})}), b.size());
  EXPECT_EQ(b.find({FieldConfig({0}), AtomConfig::ground(3)}), b.size());
  EXPECT_THROW(SectorBasis::closure(r.photon(), gens, 2), InvalidArgument);
}

TEST(SectorBasis, DenseRoundTrip) {
  Rig r;
  const std::vector<LinearMap> gens{r.exchange};
  const SectorBasis b = SectorBasis::closure(r.photon(), gens);
  const SparseKet x = r.exchange(r.photon()).plus(r.photon(), {0.0, 2.0});
  EXPECT_EQ(qstore::testing::max_abs_diff(b.to_sparse(b.to_dense(x)), x), 0.0);
  EXPECT_THROW(b.to_dense(SparseKet::basis(r.s, {FieldConfig({0}), AtomConfig::ground(3)})), SectorOverflow);
  EXPECT_THROW(b.to_sparse(std::vector<Complex>(3)), InvalidArgument);
  EXPECT_THROW(b.to_dense(vacuum(3, 1)), IncompatibleSpaces);
}

TEST(Assemble, MatrixActsLikeOperator) {
  std::mt19937_64 rng(41);
  const Geometry g = Geometry::uniform_random(5, 5.0, 2);
  const KetSpace s = KetSpace::joint(5, 1, 2, 2, 0);
  const LinearMap op = [&](const SparseKet& x) {
    return apply(sigma_dagger(0.9), g, field_lower(x, 0)).plus(field_raise(apply(sigma(0.9), g, x), 0));
  };
  const SparseKet seed = SparseKet::basis(s, {FieldConfig({2}), AtomConfig::ground(5)});
  const std::vector<LinearMap> gens{op};
  const SectorBasis b = SectorBasis::closure(seed, gens);
  const auto serial = assemble(b, op, kernels::Exec::serial);
  const auto parallel = assemble(b, op, kernels::Exec::parallel);
  EXPECT_EQ(serial.val, parallel.val);
  std::normal_distribution<double> nd;
  std::vector<Complex> v(b.size());
  for (auto& z : v) z = {nd(rng), nd(rng)};
  std::vector<Complex> y(b.size());
  kernels::csr_axpy(serial, 1.0, v, y, kernels::Exec::serial);
  const auto direct = b.to_dense(op(b.to_sparse(v)));
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(std::abs(y[i] - direct[i]), 0.0, 1e-13);
}

TEST(Rk4, RabiOscillation) {
  Rk4Propagator p(pauli_x([](double) { return 1.0; }));
  std::vector<Complex> psi{1.0, 0.0};
  Rk4Options opt;
  opt.max_step = 1e-3;
  const auto stats = p.propagate(psi, 0.0, 2.0, opt);
  EXPECT_EQ(stats.steps, 2000u);
  EXPECT_NEAR(std::abs(psi[0] - std::cos(2.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(psi[1] - Complex(0, -std::sin(2.0))), 0.0, 1e-12);
  EXPECT_LT(stats.norm_drift, 1e-12);
}

TEST(Rk4, TimeDependentCoefficient) {
  Rk4Propagator p(pauli_x([](double t) { return t; }));
  std::vector<Complex> psi{1.0, 0.0};
  Rk4Options opt;
  opt.max_step = 1e-3;
  p.propagate(psi, 0.0, 1.5, opt);
  const double phi = 1.5 * 1.5 / 2;
  EXPECT_NEAR(std::abs(psi[0] - std::cos(phi)), 0.0, 1e-11);
  EXPECT_NEAR(std::abs(psi[1] - Complex(0, -std::sin(phi))), 0.0, 1e-11);
}

TEST(Rk4, CoarseStepThrows) {
  Rk4Propagator p(pauli_x([](double) { return 1.0; }));
  std::vector<Complex> psi{1.0, 0.0};
  Rk4Options opt;
  opt.max_step = 2.0;
  EXPECT_THROW(p.propagate(psi, 0.0, 20.0, opt), StepTooCoarse);
  opt.max_step = 0;
  EXPECT_THROW(p.propagate(psi, 0.0, 1.0, opt), InvalidArgument);
}

TEST(Rk4, ObserverSchedule) {
  Rk4Propagator p(pauli_x([](double) { return 1.0; }));
  std::vector<Complex> psi{1.0, 0.0};
  Rk4Options opt;
  opt.max_step = 0.01;
  opt.sample_every = 10;
  std::vector<std::size_t> seen;
  p.propagate(psi, 0.0, 1.0, opt, [&](std::size_t s, double, std::span<const Complex>) { seen.push_back(s); });
  ASSERT_EQ(seen.size(), 11u);
  EXPECT_EQ(seen.front(), 0u);
  EXPECT_EQ(seen.back(), 100u);
}

TEST(Rk4, RejectsMismatchedTerms) {
  TimeDependentHamiltonian h = pauli_x([](double) { return 1.0; });
  h.coefficients.clear();
  EXPECT_THROW(Rk4Propagator{h}, InvalidArgument);
  Rk4Propagator p(pauli_x([](double) { return 1.0; }));
  std::vector<Complex> wrong(3);
  EXPECT_THROW(p.step(0.0, 0.1, wrong), InvalidArgument);
}
