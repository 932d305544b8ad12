#pragma once

#include <cstdint>

namespace advd {

/// Row-major C[M,N] = alpha * op(A) * op(B) + beta * C.
/// Output rows are partitioned into fixed blocks run via parallel_for; each
/// element of C is accumulated by exactly one thread in a fixed k-order, so
/// results are reproducible for any thread cap.
template <typename T>
void gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n,
          std::int64_t k, T alpha, const T* a, std::int64_t lda, const T* b,
          std::int64_t ldb, T beta, T* c, std::int64_t ldc);

}  // namespace advd
