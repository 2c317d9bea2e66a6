#include "test_support.hpp"

#include <qstore/kernels.hpp>

using namespace qstore;
using namespace qstore::kernels;

namespace {

std::vector<Complex> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<Complex> v(n);
  for (auto& x : v) x = {nd(rng), nd(rng)};
  return v;
}

CsrMatrix random_matrix(std::size_t n, std::size_t per_row, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<std::uint32_t> col(0, static_cast<std::uint32_t>(n - 1));
  std::vector<Triplet> t;
  for (std::uint32_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < per_row; ++k) t.push_back({r, col(rng), {nd(rng), nd(rng)}});
  }
  return csr_from_triplets(n, n, std::move(t));
}

}  // namespace

TEST(Csr, DuplicatesAreSummed) {
  const CsrMatrix m = csr_from_triplets(2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 2, 0.5}, {1, 0, -1.0}});
  EXPECT_EQ(m.nnz(), 3u);
  EXPECT_EQ(m.row_ptr, (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_EQ(m.col, (std::vector<std::uint32_t>{1, 0, 2}));
  EXPECT_EQ(m.val[2], Complex(1.5));
  EXPECT_THROW(csr_from_triplets(2, 2, {{2, 0, 1.0}}), InvalidArgument);
}

TEST(Csr, AxpyOnSmallMatrix) {
  const CsrMatrix m = csr_from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 1, Complex(0, 1)}});
  const std::vector<Complex> x{1.0, 1.0};
  std::vector<Complex> y{10.0, 0.0};
  csr_axpy(m, 2.0, x, y, Exec::serial);
  EXPECT_EQ(y[0], Complex(16.0));
  EXPECT_EQ(y[1], Complex(0, 2));
  std::vector<Complex> bad(3);
  EXPECT_THROW(csr_axpy(m, 1.0, bad, y, Exec::serial), InvalidArgument);
}

TEST(Reductions, DotAndNorm) {
  const std::vector<Complex> x{{1, 1}, {0, 2}};
  const std::vector<Complex> y{{2, 0}, {1, 0}};
  // conj(x) . y
  EXPECT_EQ(dot(x, y, Exec::serial), Complex(2, -4));
  EXPECT_EQ(squared_norm(x, Exec::serial), 6.0);
  std::vector<Complex> out(2);
  axpy_into(x, 2.0, y, out, Exec::serial);
  EXPECT_EQ(out[0], Complex(5, 1));
}

TEST(KernelsProperty, ParallelMatchesSerialBitwise) {
  std::mt19937_64 rng(31);
  set_threads(4);
  for (std::size_t n : {10u, 300u, 5000u}) {
    const CsrMatrix a = random_matrix(n, 7, rng);
    const auto x = random_vector(n, rng);
    const auto y0 = random_vector(n, rng);
    std::vector<Complex> ys = y0, yp = y0;
    csr_axpy_serial(a, {0.3, -1.2}, x, ys);
    csr_axpy_parallel(a, {0.3, -1.2}, x, yp);
    EXPECT_EQ(ys, yp);
    EXPECT_EQ(dot(x, y0, Exec::serial), dot(x, y0, Exec::parallel));
    EXPECT_EQ(squared_norm(x, Exec::serial), squared_norm(x, Exec::parallel));
    std::vector<Complex> os(n), op(n);
    axpy_into(x, 0.7, y0, os, Exec::serial);
    axpy_into(x, 0.7, y0, op, Exec::parallel);
    EXPECT_EQ(os, op);
  }
  set_threads(1);
}

TEST(KernelsProperty, DotIsConjugateSymmetric) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 20; ++t) {
    const auto x = random_vector(2000, rng);
    const auto y = random_vector(2000, rng);
    EXPECT_NEAR(std::abs(dot(x, y, Exec::serial) - std::conj(dot(y, x, Exec::serial))), 0.0, 1e-10);
  }
}
