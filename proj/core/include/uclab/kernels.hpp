#pragma once

#include <cstddef>

namespace uclab::kern {

// Float matrix kernels used by the training stack. All of them guarantee that
// row i of the output is a pure function of (row i of the input, the weight
// arrays) — bitwise independent of the batch size and of which other rows are
// present. That property is load-bearing: batched uncertainty queries must
// equal the per-state scalar path exactly, and permuting a batch must permute
// the outputs bitwise. Off-the-shelf BLAS/Eigen GEMMs switch packing strategy
// with the row count and break this (measured), hence the hand-rolled tiles.

// Y(n x out) = X(n x in) * W(in x out, row-major) + b; b may be null (treated
// as zero).
void matmul_bias(const float* X, int n, int in, const float* W, const float* b,
                 int out, float* Y);

// C(n x m) = A(n x k) * B(m x k, row-major)^T  (rows of B are dotted with rows
// of A; this is the dX = dY * W^T shape).
void matmul_transB(const float* A, int n, int k, const float* B, int m, float* C);

// C(k x m) += A(n x k)^T * B(n x m)  (the dW = X^T * dY shape). Adds into C.
void accum_AtB(const float* A, int n, int k, const float* B, int m, float* C);

// out(m) += column sums of B(n x m)  (the db shape). Adds into out.
void accum_colsum(const float* B, int n, int m, float* out);

// Reference implementations for arbitrary scalar type; the 64-bit property
// tests and gradient checks run on these.
template <class T>
void matmul_bias_ref(const T* X, int n, int in, const T* W, const T* b, int out,
                     T* Y) {
  for (int i = 0; i < n; ++i) {
    const T* x = X + std::size_t(i) * in;
    T* y = Y + std::size_t(i) * out;
    for (int j = 0; j < out; ++j) y[j] = b ? b[j] : T(0);
    for (int k = 0; k < in; ++k) {
      const T xk = x[k];
      const T* w = W + std::size_t(k) * out;
      for (int j = 0; j < out; ++j) y[j] += xk * w[j];
    }
  }
}

template <class T>
void matmul_transB_ref(const T* A, int n, int k, const T* B, int m, T* C) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      T acc = T(0);
      const T* a = A + std::size_t(i) * k;
      const T* b = B + std::size_t(j) * k;
      for (int t = 0; t < k; ++t) acc += a[t] * b[t];
      C[std::size_t(i) * m + j] = acc;
    }
}

template <class T>
void accum_AtB_ref(const T* A, int n, int k, const T* B, int m, T* C) {
  for (int i = 0; i < n; ++i) {
    const T* a = A + std::size_t(i) * k;
    const T* b = B + std::size_t(i) * m;
    for (int t = 0; t < k; ++t) {
      const T at = a[t];
      T* c = C + std::size_t(t) * m;
      for (int j = 0; j < m; ++j) c[j] += at * b[j];
    }
  }
}

template <class T>
void accum_colsum_ref(const T* B, int n, int m, T* out) {
  for (int i = 0; i < n; ++i) {
    const T* b = B + std::size_t(i) * m;
    for (int j = 0; j < m; ++j) out[j] += b[j];
  }
}

}  // namespace uclab::kern
