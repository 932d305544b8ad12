#include "advd/gemm.hpp"

#include <cblas.h>

#include <mutex>

#include "advd/thread_pool.hpp"

extern "C" void openblas_set_num_threads(int);

namespace advd {
namespace {

// BLAS kept single-threaded; parallelism happens over output-row blocks so
// that accumulation order is fixed.
std::once_flag g_blas_once;

void init_blas() {
  std::call_once(g_blas_once, [] { openblas_set_num_threads(1); });
}

void blas_gemm(bool ta, bool tb, std::int64_t m, std::int64_t n, std::int64_t k,
               float alpha, const float* a, std::int64_t lda, const float* b,
               std::int64_t ldb, float beta, float* c, std::int64_t ldc) {
  cblas_sgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans,
              tb ? CblasTrans : CblasNoTrans, static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), alpha, a,
              static_cast<int>(lda), b, static_cast<int>(ldb), beta, c,
              static_cast<int>(ldc));
}

void blas_gemm(bool ta, bool tb, std::int64_t m, std::int64_t n, std::int64_t k,
               double alpha, const double* a, std::int64_t lda, const double* b,
               std::int64_t ldb, double beta, double* c, std::int64_t ldc) {
  cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans,
              tb ? CblasTrans : CblasNoTrans, static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), alpha, a,
              static_cast<int>(lda), b, static_cast<int>(ldb), beta, c,
              static_cast<int>(ldc));
}

}  // namespace

template <typename T>
void gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n,
          std::int64_t k, T alpha, const T* a, std::int64_t lda, const T* b,
          std::int64_t ldb, T beta, T* c, std::int64_t ldc) {
  if (m == 0 || n == 0) return;
  init_blas();
  parallel_for(
      m,
      [&](std::int64_t r0, std::int64_t r1) {
        const std::int64_t rows = r1 - r0;
        // Row block of C corresponds to rows (or columns, if transposed)
        // r0..r1 of A.
        const T* a_blk = trans_a ? a + r0 : a + r0 * lda;
        blas_gemm(trans_a, trans_b, rows, n, k, alpha, a_blk, lda, b, ldb,
                  beta, c + r0 * ldc, ldc);
      },
      /*grain=*/16);
}

template void gemm<float>(bool, bool, std::int64_t, std::int64_t, std::int64_t,
                          float, const float*, std::int64_t, const float*,
                          std::int64_t, float, float*, std::int64_t);
template void gemm<double>(bool, bool, std::int64_t, std::int64_t, std::int64_t,
                           double, const double*, std::int64_t, const double*,
                           std::int64_t, double, double*, std::int64_t);

}  // namespace advd
