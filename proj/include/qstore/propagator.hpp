#pragma once

// Sector-restricted dense propagation: enumerate the labels reachable from an
// initial ket under a set of operators, assemble each operator once as a
// sparse matrix on that basis, then step i d/dt psi = H(t) psi with
// classical fixed-step RK4.

#include <qstore/core_state.hpp>
#include <qstore/kernels.hpp>

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

namespace qstore {

using LinearMap = std::function<SparseKet(const SparseKet&)>;

class SectorBasis {
 public:
  /// Breadth-first closure of the support of `seed` under `generators`.
  /// Throws InvalidArgument when more than `max_size` labels are reached.
  static SectorBasis closure(const SparseKet& seed, std::span<const LinearMap> generators,
                             std::size_t max_size = 2'000'000);

  std::size_t size() const { return labels_.size(); }
  const KetSpace& space() const { return space_; }
  const JointLabel& label(std::size_t i) const { return labels_[i]; }
  /// Index of `label`, or size() if absent.
  std::size_t find(const JointLabel& label) const;

  std::vector<Complex> to_dense(const SparseKet& x) const;
  SparseKet to_sparse(std::span<const Complex> v) const;

 private:
  KetSpace space_;
  std::vector<JointLabel> labels_;  // canonical order
  std::map<JointLabel, std::size_t> index_;
};

/// Matrix of `op` on the basis; columns are assembled independently.
kernels::CsrMatrix assemble(const SectorBasis& basis, const LinearMap& op,
                            kernels::Exec exec = kernels::Exec::parallel);

/// H(t) = sum_i coefficient_i(t) * terms_i
struct TimeDependentHamiltonian {
  std::vector<kernels::CsrMatrix> terms;
  std::vector<std::function<double(double)>> coefficients;

  std::size_t dimension() const { return terms.empty() ? 0 : terms.front().rows; }
};

struct Rk4Options {
  double max_step = 1e-3;
  double norm_drift_bound = 1e-8;
  /// Observer is called every `sample_every` steps (and at both ends); 0 = ends only.
  std::size_t sample_every = 0;
  kernels::Exec exec = kernels::Exec::parallel;
};

struct Rk4Stats {
  std::size_t steps = 0;
  double step = 0;
  double norm_drift = 0;  // max |‖psi(t)‖ - ‖psi(0)‖| over observed points
};

using Rk4Observer = std::function<void(std::size_t step, double t, std::span<const Complex> psi)>;

class Rk4Propagator {
 public:
  explicit Rk4Propagator(TimeDependentHamiltonian h, kernels::Exec exec = kernels::Exec::parallel);

  /// out = -i H(t) psi
  void derivative(double t, std::span<const Complex> psi, std::span<Complex> out) const;
  void step(double t, double h, std::vector<Complex>& psi);

  /// Integrates from t0 to t1 in place. Throws StepTooCoarse when the norm
  /// drifts by more than options.norm_drift_bound.
  Rk4Stats propagate(std::vector<Complex>& psi, double t0, double t1, const Rk4Options& options,
                     const Rk4Observer& observer = {});

 private:
  TimeDependentHamiltonian h_;
  kernels::Exec exec_;
  std::vector<Complex> k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace qstore
