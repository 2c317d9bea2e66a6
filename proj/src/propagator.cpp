#include <qstore/propagator.hpp>

#include <cmath>
#include <deque>
#include <exception>
#include <sstream>

namespace qstore {

SectorBasis SectorBasis::closure(const SparseKet& seed, std::span<const LinearMap> generators,
                                 std::size_t max_size) {
  SectorBasis b;
  b.space_ = seed.space();
  std::map<JointLabel, std::size_t> seen;
  std::deque<JointLabel> frontier;
  auto visit = [&](const JointLabel& label) {
    if (seen.try_emplace(label, 0).second) {
      if (seen.size() > max_size) {
        throw InvalidArgument("SectorBasis: closure exceeds " + std::to_string(max_size) + " labels");
      }
      frontier.push_back(label);
    }
  };
  for (const auto& [label, amp] : seed) visit(label);
  while (!frontier.empty()) {
    const SparseKet unit = SparseKet::basis(b.space_, frontier.front());
    frontier.pop_front();
    for (const auto& gen : generators) {
      for (const auto& [label, amp] : gen(unit)) visit(label);
    }
  }
  b.labels_.reserve(seen.size());
  for (auto& [label, idx] : seen) {
    idx = b.labels_.size();
    b.labels_.push_back(label);
  }
  b.index_ = std::move(seen);
  return b;
}

std::size_t SectorBasis::find(const JointLabel& label) const {
  auto it = index_.find(label);
  return it == index_.end() ? labels_.size() : it->second;
}

std::vector<Complex> SectorBasis::to_dense(const SparseKet& x) const {
  if (!(x.space() == space_)) throw IncompatibleSpaces("SectorBasis::to_dense: space differs");
  std::vector<Complex> v(labels_.size());
  for (const auto& [label, amp] : x) {
    const std::size_t i = find(label);
    if (i == labels_.size()) throw SectorOverflow("SectorBasis::to_dense: label " + label.to_string() + " not in basis");
    v[i] = amp;
  }
  return v;
}

SparseKet SectorBasis::to_sparse(std::span<const Complex> v) const {
  if (v.size() != labels_.size()) throw InvalidArgument("SectorBasis::to_sparse: size mismatch");
  SparseKet x(space_);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != Complex{}) x.add(labels_[i], v[i]);
  }
  x.prune();
  return x;
}

kernels::CsrMatrix assemble(const SectorBasis& basis, const LinearMap& op, kernels::Exec exec) {
  const std::size_t n = basis.size();
  std::vector<std::vector<kernels::Triplet>> columns(n);
  std::exception_ptr failure;
  const auto nn = static_cast<std::ptrdiff_t>(n);
  const bool par = exec == kernels::Exec::parallel && n >= kernels::kParallelThreshold;
#pragma omp parallel for schedule(dynamic, 8) if (par)
  for (std::ptrdiff_t jj = 0; jj < nn; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    try {
      const SparseKet image = op(SparseKet::basis(basis.space(), basis.label(j)));
      for (const auto& [label, amp] : image) {
        const std::size_t i = basis.find(label);
        if (i == n) throw SectorOverflow("assemble: image leaves the basis at " + label.to_string());
        columns[j].push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), amp});
      }
    } catch (...) {
#pragma omp critical(qstore_assemble_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<kernels::Triplet> all;
  for (auto& c : columns) all.insert(all.end(), c.begin(), c.end());
  return kernels::csr_from_triplets(n, n, std::move(all));
}

Rk4Propagator::Rk4Propagator(TimeDependentHamiltonian h, kernels::Exec exec)
    : h_(std::move(h)), exec_(exec) {
  if (h_.terms.size() != h_.coefficients.size()) {
    throw InvalidArgument("Rk4Propagator: one coefficient function per term required");
  }
  const std::size_t n = h_.dimension();
  for (const auto& t : h_.terms) {
    if (t.rows != n || t.cols != n) throw InvalidArgument("Rk4Propagator: term dimensions differ");
  }
  k1_.resize(n);
  k2_.resize(n);
  k3_.resize(n);
  k4_.resize(n);
  tmp_.resize(n);
}

void Rk4Propagator::derivative(double t, std::span<const Complex> psi, std::span<Complex> out) const {
  std::fill(out.begin(), out.end(), Complex{});
  const Complex minus_i{0.0, -1.0};
  for (std::size_t i = 0; i < h_.terms.size(); ++i) {
    const double c = h_.coefficients[i](t);
    if (c == 0.0) continue;
    kernels::csr_axpy(h_.terms[i], minus_i * c, psi, out, exec_);
  }
}

void Rk4Propagator::step(double t, double h, std::vector<Complex>& psi) {
  if (psi.size() != h_.dimension()) throw InvalidArgument("Rk4Propagator: state dimension mismatch");
  derivative(t, psi, k1_);
  kernels::axpy_into(psi, h / 2, k1_, tmp_, exec_);
  derivative(t + h / 2, tmp_, k2_);
  kernels::axpy_into(psi, h / 2, k2_, tmp_, exec_);
  derivative(t + h / 2, tmp_, k3_);
  kernels::axpy_into(psi, h, k3_, tmp_, exec_);
  derivative(t + h, tmp_, k4_);
  const auto n = static_cast<std::ptrdiff_t>(psi.size());
  const double w = h / 6;
  const bool par = exec_ == kernels::Exec::parallel && psi.size() >= kernels::kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    psi[i] += w * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }
}

Rk4Stats Rk4Propagator::propagate(std::vector<Complex>& psi, double t0, double t1,
                                  const Rk4Options& options, const Rk4Observer& observer) {
  if (!(options.max_step > 0)) throw InvalidArgument("Rk4Propagator: max_step must be positive");
  Rk4Stats stats;
  const double span = t1 - t0;
  stats.steps = span > 0 ? static_cast<std::size_t>(std::ceil(span / options.max_step - 1e-9)) : 0;
  stats.step = stats.steps ? span / static_cast<double>(stats.steps) : 0;
  const double norm0 = std::sqrt(kernels::squared_norm(psi, exec_));

  auto observe = [&](std::size_t s, double t) {
    const double nrm = std::sqrt(kernels::squared_norm(psi, exec_));
    stats.norm_drift = std::max(stats.norm_drift, std::abs(nrm - norm0));
    if (observer) observer(s, t, psi);
  };

  observe(0, t0);
  for (std::size_t s = 0; s < stats.steps; ++s) {
    const double t = t0 + static_cast<double>(s) * stats.step;
    step(t, stats.step, psi);
    const std::size_t done = s + 1;
    if (done == stats.steps || (options.sample_every && done % options.sample_every == 0)) {
      observe(done, t0 + static_cast<double>(done) * stats.step);
    }
  }
  if (stats.norm_drift > options.norm_drift_bound) {
    std::ostringstream os;
    os << "RK4 norm drift " << stats.norm_drift << " exceeds bound " << options.norm_drift_bound
       << " (step " << stats.step << ", " << stats.steps << " steps); reduce the step size";
    throw StepTooCoarse(os.str());
  }
  return stats;
}

}  // namespace qstore
