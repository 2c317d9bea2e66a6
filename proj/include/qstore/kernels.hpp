#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version; both produce bit-identical results (rows are owned by one
// thread, reductions use fixed-size blocks summed in block order).

#include <qstore/core_state.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qstore::kernels {

enum class Exec { serial, parallel };

/// Below this many rows/entries the parallel path runs serially.
inline constexpr std::size_t kParallelThreshold = 256;
inline constexpr std::size_t kReductionBlock = 1024;

void set_threads(int threads);
int max_threads();

struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col;
  std::vector<Complex> val;

  std::size_t nnz() const { return val.size(); }
};

struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  Complex value;
};

/// Duplicates are summed in input order.
CsrMatrix csr_from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);

/// y += alpha * A x
void csr_axpy_serial(const CsrMatrix& a, Complex alpha, std::span<const Complex> x,
                     std::span<Complex> y);
void csr_axpy_parallel(const CsrMatrix& a, Complex alpha, std::span<const Complex> x,
                       std::span<Complex> y);
void csr_axpy(const CsrMatrix& a, Complex alpha, std::span<const Complex> x, std::span<Complex> y,
              Exec exec);

/// out = x + alpha * k
void axpy_into(std::span<const Complex> x, Complex alpha, std::span<const Complex> k,
               std::span<Complex> out, Exec exec);

/// <x|y> with blocked summation.
Complex dot(std::span<const Complex> x, std::span<const Complex> y, Exec exec);
double squared_norm(std::span<const Complex> x, Exec exec);

}  // namespace qstore::kernels
