#include <qstore/kernels.hpp>

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qstore::kernels {

void set_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

CsrMatrix csr_from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> t) {
  std::stable_sort(t.begin(), t.end(), [](const Triplet& x, const Triplet& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].row >= rows || t[i].col >= cols) throw InvalidArgument("csr_from_triplets: index out of range");
    if (!m.col.empty() && i > 0 && t[i].row == t[i - 1].row && t[i].col == t[i - 1].col) {
      m.val.back() += t[i].value;
      continue;
    }
    m.col.push_back(t[i].col);
    m.val.push_back(t[i].value);
    ++m.row_ptr[t[i].row + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

namespace {

inline void row_axpy(const CsrMatrix& a, Complex alpha, const Complex* x, Complex* y, std::size_t r) {
  Complex s{};
  for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) s += a.val[p] * x[a.col[p]];
  y[r] += alpha * s;
}

void check_dims(const CsrMatrix& a, std::span<const Complex> x, std::span<Complex> y) {
  if (x.size() != a.cols || y.size() != a.rows) throw InvalidArgument("csr_axpy: dimension mismatch");
}

}  // namespace

void csr_axpy_serial(const CsrMatrix& a, Complex alpha, std::span<const Complex> x,
                     std::span<Complex> y) {
  check_dims(a, x, y);
  for (std::size_t r = 0; r < a.rows; ++r) row_axpy(a, alpha, x.data(), y.data(), r);
}

void csr_axpy_parallel(const CsrMatrix& a, Complex alpha, std::span<const Complex> x,
                       std::span<Complex> y) {
  check_dims(a, x, y);
  const auto rows = static_cast<std::ptrdiff_t>(a.rows);
  const Complex* xp = x.data();
  Complex* yp = y.data();
#pragma omp parallel for schedule(static) if (a.rows >= kParallelThreshold)
  for (std::ptrdiff_t r = 0; r < rows; ++r) row_axpy(a, alpha, xp, yp, static_cast<std::size_t>(r));
}

void csr_axpy(const CsrMatrix& a, Complex alpha, std::span<const Complex> x, std::span<Complex> y,
              Exec exec) {
  if (exec == Exec::parallel) {
    csr_axpy_parallel(a, alpha, x, y);
  } else {
    csr_axpy_serial(a, alpha, x, y);
  }
}

void axpy_into(std::span<const Complex> x, Complex alpha, std::span<const Complex> k,
               std::span<Complex> out, Exec exec) {
  if (x.size() != k.size() || x.size() != out.size()) throw InvalidArgument("axpy_into: size mismatch");
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const bool par = exec == Exec::parallel && x.size() >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + alpha * k[static_cast<std::size_t>(i)];
}

namespace {

template <class BlockFn>
auto blocked_reduce(std::size_t n, Exec exec, BlockFn block) {
  using T = decltype(block(std::size_t{0}, std::size_t{0}));
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<T> partial(blocks);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
  const bool par = exec == Exec::parallel && n >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    partial[static_cast<std::size_t>(b)] = block(lo, std::min(n, lo + kReductionBlock));
  }
  T s{};
  for (const auto& p : partial) s += p;
  return s;
}

}  // namespace

Complex dot(std::span<const Complex> x, std::span<const Complex> y, Exec exec) {
  if (x.size() != y.size()) throw InvalidArgument("dot: size mismatch");
  return blocked_reduce(x.size(), exec, [&](std::size_t lo, std::size_t hi) {
    Complex s{};
    for (std::size_t i = lo; i < hi; ++i) s += std::conj(x[i]) * y[i];
    return s;
  });
}

double squared_norm(std::span<const Complex> x, Exec exec) {
  return blocked_reduce(x.size(), exec, [&](std::size_t lo, std::size_t hi) {
    double s = 0;
    for (std::size_t i = lo; i < hi; ++i) s += std::norm(x[i]);
    return s;
  });
}

}  // namespace qstore::kernels
