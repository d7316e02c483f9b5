#include "uclab/kernels.hpp"

#include <cstring>
#include <vector>

namespace uclab::kern {
namespace {

#if defined(__AVX512F__)
constexpr int VW = 16;
#elif defined(__AVX2__) || defined(__AVX__)
constexpr int VW = 8;
#else
constexpr int VW = 4;
#endif

typedef float vf __attribute__((vector_size(VW * sizeof(float))));

inline vf vload(const float* p) {
  vf v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

inline void vstore(float* p, vf v) { std::memcpy(p, &v, sizeof(v)); }

inline vf vsplat(float x) { return vf{} + x; }

// fixed-order lane sum so every code path reduces identically
inline float hsum(vf v) {
  float s = v[0];
  for (int i = 1; i < VW; ++i) s += v[i];
  return s;
}

std::vector<float>& scratch() {
  thread_local std::vector<float> buf;
  return buf;
}

// --- broadcast-FMA path: 4 rows at a time, register tile of 4 column vectors.
// The count of real rows never changes the per-element operation sequence:
// tail batches re-enter this same function with duplicated row pointers.
void rows4_matmul_bias(const float* const x[4], int in, const float* W,
                       const float* b, int out, float* const y[4]) {
  int j0 = 0;
  for (; j0 + 4 * VW <= out; j0 += 4 * VW) {
    vf a00, a01, a02, a03;
    if (b) {
      a00 = vload(b + j0 + 0 * VW);
      a01 = vload(b + j0 + 1 * VW);
      a02 = vload(b + j0 + 2 * VW);
      a03 = vload(b + j0 + 3 * VW);
    } else {
      a00 = vf{};
      a01 = vf{};
      a02 = vf{};
      a03 = vf{};
    }
    vf a10 = a00, a11 = a01, a12 = a02, a13 = a03;
    vf a20 = a00, a21 = a01, a22 = a02, a23 = a03;
    vf a30 = a00, a31 = a01, a32 = a02, a33 = a03;
    const float* w = W + j0;
    for (int k = 0; k < in; ++k, w += out) {
      const vf w0 = vload(w + 0 * VW), w1 = vload(w + 1 * VW);
      const vf w2 = vload(w + 2 * VW), w3 = vload(w + 3 * VW);
      const vf b0 = vsplat(x[0][k]), b1 = vsplat(x[1][k]);
      const vf b2 = vsplat(x[2][k]), b3 = vsplat(x[3][k]);
      a00 += b0 * w0; a01 += b0 * w1; a02 += b0 * w2; a03 += b0 * w3;
      a10 += b1 * w0; a11 += b1 * w1; a12 += b1 * w2; a13 += b1 * w3;
      a20 += b2 * w0; a21 += b2 * w1; a22 += b2 * w2; a23 += b2 * w3;
      a30 += b3 * w0; a31 += b3 * w1; a32 += b3 * w2; a33 += b3 * w3;
    }
    vstore(y[0] + j0 + 0 * VW, a00); vstore(y[0] + j0 + 1 * VW, a01);
    vstore(y[0] + j0 + 2 * VW, a02); vstore(y[0] + j0 + 3 * VW, a03);
    vstore(y[1] + j0 + 0 * VW, a10); vstore(y[1] + j0 + 1 * VW, a11);
    vstore(y[1] + j0 + 2 * VW, a12); vstore(y[1] + j0 + 3 * VW, a13);
    vstore(y[2] + j0 + 0 * VW, a20); vstore(y[2] + j0 + 1 * VW, a21);
    vstore(y[2] + j0 + 2 * VW, a22); vstore(y[2] + j0 + 3 * VW, a23);
    vstore(y[3] + j0 + 0 * VW, a30); vstore(y[3] + j0 + 1 * VW, a31);
    vstore(y[3] + j0 + 2 * VW, a32); vstore(y[3] + j0 + 3 * VW, a33);
  }
  for (; j0 + VW <= out; j0 += VW) {
    vf a0 = b ? vload(b + j0) : vf{};
    vf a1 = a0, a2 = a0, a3 = a0;
    const float* w = W + j0;
    for (int k = 0; k < in; ++k, w += out) {
      const vf wv = vload(w);
      a0 += vsplat(x[0][k]) * wv;
      a1 += vsplat(x[1][k]) * wv;
      a2 += vsplat(x[2][k]) * wv;
      a3 += vsplat(x[3][k]) * wv;
    }
    vstore(y[0] + j0, a0);
    vstore(y[1] + j0, a1);
    vstore(y[2] + j0, a2);
    vstore(y[3] + j0, a3);
  }
  for (; j0 < out; ++j0) {
    float s0 = b ? b[j0] : 0.0f, s1 = s0, s2 = s0, s3 = s0;
    const float* w = W + j0;
    for (int k = 0; k < in; ++k, w += out) {
      s0 += x[0][k] * w[0];
      s1 += x[1][k] * w[0];
      s2 += x[2][k] * w[0];
      s3 += x[3][k] * w[0];
    }
    y[0][j0] = s0;
    y[1][j0] = s1;
    y[2][j0] = s2;
    y[3][j0] = s3;
  }
}

void matmul_bias_rows(const float* X, int n, int in, const float* W,
                      const float* b, int out, float* Y) {
  auto& pad = scratch();
  pad.resize(std::size_t(3) * out);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const float* x[4] = {X + std::size_t(i) * in, X + std::size_t(i + 1) * in,
                         X + std::size_t(i + 2) * in, X + std::size_t(i + 3) * in};
    float* y[4] = {Y + std::size_t(i) * out, Y + std::size_t(i + 1) * out,
                   Y + std::size_t(i + 2) * out, Y + std::size_t(i + 3) * out};
    rows4_matmul_bias(x, in, W, b, out, y);
  }
  if (i < n) {
    const float* x[4];
    float* y[4];
    for (int r = 0; r < 4; ++r) {
      const int src = std::min(i + r, n - 1);
      x[r] = X + std::size_t(src) * in;
      y[r] = (i + r < n) ? Y + std::size_t(i + r) * out : pad.data() + std::size_t(r - 1) * out;
    }
    rows4_matmul_bias(x, in, W, b, out, y);
  }
}

// --- dot-product path for narrow outputs (heads): weights pre-transposed so
// each output's coefficients are contiguous; one row at a time.
void matmul_bias_dot(const float* X, int n, int in, const float* Wt,
                     const float* b, int out, float* Y) {
  for (int i = 0; i < n; ++i) {
    const float* x = X + std::size_t(i) * in;
    float* y = Y + std::size_t(i) * out;
    for (int j = 0; j < out; ++j) {
      const float* w = Wt + std::size_t(j) * in;
      vf a0 = vf{}, a1 = vf{}, a2 = vf{}, a3 = vf{};
      int t = 0;
      for (; t + 4 * VW <= in; t += 4 * VW) {
        a0 += vload(x + t + 0 * VW) * vload(w + t + 0 * VW);
        a1 += vload(x + t + 1 * VW) * vload(w + t + 1 * VW);
        a2 += vload(x + t + 2 * VW) * vload(w + t + 2 * VW);
        a3 += vload(x + t + 3 * VW) * vload(w + t + 3 * VW);
      }
      for (; t + VW <= in; t += VW) a0 += vload(x + t) * vload(w + t);
      a0 = a0 + a1;
      a2 = a2 + a3;
      a0 = a0 + a2;
      float s = hsum(a0);
      for (; t < in; ++t) s += x[t] * w[t];
      y[j] = s + (b ? b[j] : 0.0f);
    }
  }
}

// 4x4 block of dot products with a fixed per-element reduction
void dot_tile4x4(const float* const a[4], const float* const bm[4], int k,
                 float tmp[4][4]) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const float* x = a[i];
      const float* w = bm[j];
      vf s0 = vf{}, s1 = vf{}, s2 = vf{}, s3 = vf{};
      int t = 0;
      for (; t + 4 * VW <= k; t += 4 * VW) {
        s0 += vload(x + t + 0 * VW) * vload(w + t + 0 * VW);
        s1 += vload(x + t + 1 * VW) * vload(w + t + 1 * VW);
        s2 += vload(x + t + 2 * VW) * vload(w + t + 2 * VW);
        s3 += vload(x + t + 3 * VW) * vload(w + t + 3 * VW);
      }
      for (; t + VW <= k; t += VW) s0 += vload(x + t) * vload(w + t);
      s0 = s0 + s1;
      s2 = s2 + s3;
      s0 = s0 + s2;
      float s = hsum(s0);
      for (; t < k; ++t) s += x[t] * w[t];
      tmp[i][j] = s;
    }
}

}  // namespace

void matmul_bias(const float* X, int n, int in, const float* W, const float* b,
                 int out, float* Y) {
  if (n <= 0) return;
  if (out < 32 && in >= 32) {
    thread_local std::vector<float> wt;
    wt.resize(std::size_t(in) * out);
    for (int k = 0; k < in; ++k)
      for (int j = 0; j < out; ++j) wt[std::size_t(j) * in + k] = W[std::size_t(k) * out + j];
    matmul_bias_dot(X, n, in, wt.data(), b, out, Y);
    return;
  }
  matmul_bias_rows(X, n, in, W, b, out, Y);
}

void matmul_transB(const float* A, int n, int k, const float* B, int m, float* C) {
  if (n <= 0 || m <= 0) return;
  if (k < 16) {
    // narrow reduction: transpose B and use the broadcast path
    std::vector<float> bt(std::size_t(k) * m);
    for (int j = 0; j < m; ++j)
      for (int t = 0; t < k; ++t) bt[std::size_t(t) * m + j] = B[std::size_t(j) * k + t];
    matmul_bias_rows(A, n, k, bt.data(), nullptr, m, C);
    return;
  }
  for (int i0 = 0; i0 < n; i0 += 4) {
    const float* a[4];
    for (int r = 0; r < 4; ++r) a[r] = A + std::size_t(std::min(i0 + r, n - 1)) * k;
    for (int j0 = 0; j0 < m; j0 += 4) {
      const float* bm[4];
      for (int c = 0; c < 4; ++c) bm[c] = B + std::size_t(std::min(j0 + c, m - 1)) * k;
      float tmp[4][4];
      dot_tile4x4(a, bm, k, tmp);
      for (int r = 0; r < 4 && i0 + r < n; ++r)
        for (int c = 0; c < 4 && j0 + c < m; ++c)
          C[std::size_t(i0 + r) * m + (j0 + c)] = tmp[r][c];
    }
  }
}

void accum_AtB(const float* A, int n, int k, const float* B, int m, float* C) {
  if (n <= 0) return;
  if (m < 32 && k >= 32) {
    // accumulate the transpose (m x k) row-contiguously, then fold back
    auto& buf = scratch();
    buf.assign(std::size_t(m) * k, 0.0f);
    for (int i = 0; i < n; ++i) {
      const float* a = A + std::size_t(i) * k;
      const float* b = B + std::size_t(i) * m;
      for (int j = 0; j < m; ++j) {
        float* ct = buf.data() + std::size_t(j) * k;
        const vf bj = vsplat(b[j]);
        int t = 0;
        for (; t + VW <= k; t += VW) vstore(ct + t, vload(ct + t) + bj * vload(a + t));
        for (; t < k; ++t) ct[t] += b[j] * a[t];
      }
    }
    for (int t = 0; t < k; ++t)
      for (int j = 0; j < m; ++j) C[std::size_t(t) * m + j] += buf[std::size_t(j) * k + t];
    return;
  }
  // register tile over (4 rows of C) x (4 vectors of columns), reduction over n
  int t0 = 0;
  for (; t0 < k; t0 += 4) {
    const int tcnt = std::min(4, k - t0);
    int j0 = 0;
    for (; j0 + 4 * VW <= m; j0 += 4 * VW) {
      vf acc[4][4] = {};
      for (int i = 0; i < n; ++i) {
        const float* a = A + std::size_t(i) * k + t0;
        const float* b = B + std::size_t(i) * m + j0;
        const vf b0 = vload(b + 0 * VW), b1 = vload(b + 1 * VW);
        const vf b2 = vload(b + 2 * VW), b3 = vload(b + 3 * VW);
        for (int r = 0; r < tcnt; ++r) {
          const vf ar = vsplat(a[r]);
          acc[r][0] += ar * b0;
          acc[r][1] += ar * b1;
          acc[r][2] += ar * b2;
          acc[r][3] += ar * b3;
        }
      }
      for (int r = 0; r < tcnt; ++r) {
        float* c = C + std::size_t(t0 + r) * m + j0;
        for (int v = 0; v < 4; ++v) vstore(c + v * VW, vload(c + v * VW) + acc[r][v]);
      }
    }
    for (; j0 + VW <= m; j0 += VW) {
      vf acc[4] = {};
      for (int i = 0; i < n; ++i) {
        const float* a = A + std::size_t(i) * k + t0;
        const vf bv = vload(B + std::size_t(i) * m + j0);
        for (int r = 0; r < tcnt; ++r) acc[r] += vsplat(a[r]) * bv;
      }
      for (int r = 0; r < tcnt; ++r) {
        float* c = C + std::size_t(t0 + r) * m + j0;
        vstore(c, vload(c) + acc[r]);
      }
    }
    for (; j0 < m; ++j0) {
      float acc[4] = {};
      for (int i = 0; i < n; ++i) {
        const float* a = A + std::size_t(i) * k + t0;
        const float bj = B[std::size_t(i) * m + j0];
        for (int r = 0; r < tcnt; ++r) acc[r] += a[r] * bj;
      }
      for (int r = 0; r < tcnt; ++r) C[std::size_t(t0 + r) * m + j0] += acc[r];
    }
  }
}

void accum_colsum(const float* B, int n, int m, float* out) {
  for (int i = 0; i < n; ++i) {
    const float* b = B + std::size_t(i) * m;
    int j = 0;
    for (; j + VW <= m; j += VW) vstore(out + j, vload(out + j) + vload(b + j));
    for (; j < m; ++j) out[j] += b[j];
  }
}

}  // namespace uclab::kern
