#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <type_traits>

#include "gitsr/tensor.hpp"

#ifdef GITSR_HAVE_CBLAS
#include <cblas.h>
#endif

namespace gitsr::nn {

namespace kernel {

#ifdef GITSR_HAVE_CBLAS
// Row-major C = op(A) * op(B) (+ C); returns false for element types BLAS does not cover.
template <class T>
bool blas_gemm(bool ta, bool tb, std::size_t M, std::size_t N, std::size_t K, const T* A, const T* B, T* C,
               bool accumulate) {
  if (M == 0 || N == 0) return true;
  if (K == 0) {
    if (!accumulate) std::fill(C, C + M * N, T{});
    return true;
  }
  const auto lda = static_cast<int>(ta ? M : K), ldb = static_cast<int>(tb ? K : N), ldc = static_cast<int>(N);
  const auto opa = ta ? CblasTrans : CblasNoTrans, opb = tb ? CblasTrans : CblasNoTrans;
  const int m = static_cast<int>(M), n = static_cast<int>(N), k = static_cast<int>(K);
  if constexpr (std::is_same_v<T, float>) {
    cblas_sgemm(CblasRowMajor, opa, opb, m, n, k, 1.0f, A, lda, B, ldb, accumulate ? 1.0f : 0.0f, C, ldc);
    return true;
  } else if constexpr (std::is_same_v<T, double>) {
    cblas_dgemm(CblasRowMajor, opa, opb, m, n, k, 1.0, A, lda, B, ldb, accumulate ? 1.0 : 0.0, C, ldc);
    return true;
  }
  return false;
}
#endif

// C[M x N] (+)= A[M x K] * B[K x N], all row-major. Four output rows share each load of B.
template <class T>
void gemm_nn(const T* __restrict A, const T* __restrict B, T* __restrict C, std::size_t M, std::size_t K,
             std::size_t N, bool accumulate) {
#ifdef GITSR_HAVE_CBLAS
  if (blas_gemm(false, false, M, N, K, A, B, C, accumulate)) return;
#endif
  if (!accumulate) std::fill(C, C + M * N, T{});
  std::size_t i = 0;
  for (; i + 4 <= M; i += 4) {
    T* c0 = C + i * N;
    T* c1 = c0 + N;
    T* c2 = c1 + N;
    T* c3 = c2 + N;
    const T* a0 = A + i * K;
    const T* a1 = a0 + K;
    const T* a2 = a1 + K;
    const T* a3 = a2 + K;
    for (std::size_t k = 0; k < K; ++k) {
      const T* b = B + k * N;
      const T x0 = a0[k], x1 = a1[k], x2 = a2[k], x3 = a3[k];
      for (std::size_t j = 0; j < N; ++j) {
        const T bj = b[j];
        c0[j] += x0 * bj;
        c1[j] += x1 * bj;
        c2[j] += x2 * bj;
        c3[j] += x3 * bj;
      }
    }
  }
  for (; i < M; ++i) {
    T* c = C + i * N;
    const T* a = A + i * K;
    for (std::size_t k = 0; k < K; ++k) {
      const T* b = B + k * N;
      const T x = a[k];
      for (std::size_t j = 0; j < N; ++j) c[j] += x * b[j];
    }
  }
}

// C[K x N] (+)= A[M x K]^T * B[M x N].
template <class T>
void gemm_tn(const T* __restrict A, const T* __restrict B, T* __restrict C, std::size_t M, std::size_t K,
             std::size_t N, bool accumulate) {
#ifdef GITSR_HAVE_CBLAS
  if (blas_gemm(true, false, K, N, M, A, B, C, accumulate)) return;
#endif
  if (!accumulate) std::fill(C, C + K * N, T{});
  std::size_t r = 0;
  for (; r + 4 <= M; r += 4) {
    const T* b0 = B + r * N;
    const T* b1 = b0 + N;
    const T* b2 = b1 + N;
    const T* b3 = b2 + N;
    for (std::size_t i = 0; i < K; ++i) {
      const T x0 = A[r * K + i], x1 = A[(r + 1) * K + i], x2 = A[(r + 2) * K + i], x3 = A[(r + 3) * K + i];
      T* c = C + i * N;
      for (std::size_t j = 0; j < N; ++j) c[j] += x0 * b0[j] + x1 * b1[j] + x2 * b2[j] + x3 * b3[j];
    }
  }
  for (; r < M; ++r) {
    const T* b = B + r * N;
    for (std::size_t i = 0; i < K; ++i) {
      const T x = A[r * K + i];
      T* c = C + i * N;
      for (std::size_t j = 0; j < N; ++j) c[j] += x * b[j];
    }
  }
}

}  // namespace kernel

template <class T>
Tensor<T> transpose(const Tensor<T>& a) {
  Tensor<T> t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  return t;
}

/// a * b
template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.cols() == b.rows(), "matmul: shape mismatch " + shape_str(a) + " * " + shape_str(b));
  Tensor<T> c(a.rows(), b.cols());
  kernel::gemm_nn(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols(), false);
  return c;
}

/// a^T * b, accumulated into `out` (shape a.cols x b.cols).
template <class T>
void matmul_tn_acc(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>& out) {
  detail::require(a.rows() == b.rows() && out.rows() == a.cols() && out.cols() == b.cols(),
                  "matmul_tn: shape mismatch " + shape_str(a) + "^T * " + shape_str(b));
  kernel::gemm_tn(a.data(), b.data(), out.data(), a.rows(), a.cols(), b.cols(), true);
}

/// a * b^T
template <class T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.cols() == b.cols(), "matmul_nt: shape mismatch " + shape_str(a) + " * " + shape_str(b) + "^T");
#ifdef GITSR_HAVE_CBLAS
  Tensor<T> c(a.rows(), b.rows());
  if (kernel::blas_gemm(false, true, a.rows(), b.rows(), a.cols(), a.data(), b.data(), c.data(), false)) return c;
#endif
  return matmul(a, transpose(b));
}

template <class T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.same_shape(b), "add: shape mismatch " + shape_str(a) + " + " + shape_str(b));
  T* pa = a.data();
  const T* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] += pb[i];
}

template <class T>
Tensor<T> relu(Tensor<T> x) {
  for (auto& v : x.values()) v = v > T{} ? v : T{};
  return x;
}

/// Gradient through a ReLU given its output y.
template <class T>
void relu_backward_inplace(Tensor<T>& dy, const Tensor<T>& y) {
  T* d = dy.data();
  const T* p = y.data();
  for (std::size_t i = 0; i < dy.size(); ++i)
    if (!(p[i] > T{})) d[i] = T{};
}

/// Uniform draw in [0, 1) built from raw engine bits so results do not depend on the
/// standard library's distribution implementation.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <class T>
void init_glorot_uniform(Tensor<T>& w, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : w.values()) v = static_cast<T>((2.0 * uniform01(rng) - 1.0) * limit);
}

}  // namespace gitsr::nn
