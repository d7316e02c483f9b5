#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uclab/kernels.hpp"
#include "uclab/rng.hpp"

namespace uclab {

// Minimal numeric substrate: fixed-topology MLPs (ReLU hiddens, identity or
// tanh output), hand-derived backprop, Adam, polyak tracking. Templated on the
// scalar so training runs in float while gradient property tests run the same
// code in double.

template <class T>
struct Mat {
  int n = 0, m = 0;
  std::vector<T> v;

  Mat() = default;
  Mat(int rows, int cols) : n(rows), m(cols), v(std::size_t(rows) * cols) {}
  T& operator()(int i, int j) { return v[std::size_t(i) * m + j]; }
  const T& operator()(int i, int j) const { return v[std::size_t(i) * m + j]; }
  T* row(int i) { return v.data() + std::size_t(i) * m; }
  const T* row(int i) const { return v.data() + std::size_t(i) * m; }
};

template <class T>
struct Linear {
  int in = 0, out = 0;
  std::vector<T> W;  // row-major, in x out
  std::vector<T> b;
};

enum class OutputAct { identity, tanh_bounded };

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class T>
struct Mlp {
  std::vector<Linear<T>> hidden;  // each followed by ReLU
  Linear<T> head;
  OutputAct out_act = OutputAct::identity;

  int input_dim() const { return hidden.empty() ? head.in : hidden.front().in; }
  int latent_dim() const { return head.in; }
  int output_dim() const { return head.out; }
  std::size_t param_count() const {
    std::size_t c = 0;
    for (const auto& l : hidden) c += l.W.size() + l.b.size();
    return c + head.W.size() + head.b.size();
  }
};

// scaled-uniform fan-in init; the final layer gets `head_scale` (default 0.1)
// to start near zero. Draw order: per layer, W row-major then b.
template <class T>
Linear<T> make_linear(Rng& rng, int in, int out, double scale = 1.0) {
  Linear<T> l;
  l.in = in;
  l.out = out;
  l.W.resize(std::size_t(in) * out);
  l.b.resize(out);
  const double r = scale / std::sqrt(double(in));
  for (auto& w : l.W) w = T(rng.uniform(-r, r));
  for (auto& b : l.b) b = T(rng.uniform(-r, r));
  return l;
}

template <class T>
Mlp<T> make_mlp(Rng& rng, int in, const std::vector<int>& hidden_sizes, int out,
                OutputAct act = OutputAct::identity, double head_scale = 0.1) {
  Mlp<T> net;
  net.out_act = act;
  int prev = in;
  for (const int h : hidden_sizes) {
    net.hidden.push_back(make_linear<T>(rng, prev, h));
    prev = h;
  }
  net.head = make_linear<T>(rng, prev, out, head_scale);
  return net;
}

// ---- kernels dispatch -------------------------------------------------------

template <class T>
void linear_forward(const Linear<T>& l, const Mat<T>& x, Mat<T>& y) {
  if (x.m != l.in) throw DimensionError("linear_forward: input dim mismatch");
  y.n = x.n;
  y.m = l.out;
  y.v.resize(std::size_t(y.n) * y.m);
  if constexpr (std::is_same_v<T, float>)
    kern::matmul_bias(x.v.data(), x.n, l.in, l.W.data(), l.b.data(), l.out, y.v.data());
  else
    kern::matmul_bias_ref(x.v.data(), x.n, l.in, l.W.data(), l.b.data(), l.out, y.v.data());
}

// dX = dY * W^T
template <class T>
void linear_backward_input(const Linear<T>& l, const Mat<T>& dy, Mat<T>& dx) {
  dx.n = dy.n;
  dx.m = l.in;
  dx.v.resize(std::size_t(dx.n) * dx.m);
  if constexpr (std::is_same_v<T, float>)
    kern::matmul_transB(dy.v.data(), dy.n, l.out, l.W.data(), l.in, dx.v.data());
  else {
    // reference: C(i,k) = sum_j dY(i,j) * W(k,j)
    for (int i = 0; i < dy.n; ++i)
      for (int k = 0; k < l.in; ++k) {
        T acc = T(0);
        for (int j = 0; j < l.out; ++j) acc += dy(i, j) * l.W[std::size_t(k) * l.out + j];
        dx(i, k) = acc;
      }
  }
}

template <class T>
void linear_backward_params(const Mat<T>& x, const Mat<T>& dy, Linear<T>& grad) {
  if constexpr (std::is_same_v<T, float>) {
    kern::accum_AtB(x.v.data(), x.n, x.m, dy.v.data(), dy.m, grad.W.data());
    kern::accum_colsum(dy.v.data(), dy.n, dy.m, grad.b.data());
  } else {
    kern::accum_AtB_ref(x.v.data(), x.n, x.m, dy.v.data(), dy.m, grad.W.data());
    kern::accum_colsum_ref(dy.v.data(), dy.n, dy.m, grad.b.data());
  }
}

// ---- forward / backward -----------------------------------------------------

template <class T>
struct FwdCache {
  std::vector<Mat<T>> acts;  // acts[0] = input, acts[i] = post-ReLU of hidden i
  Mat<T> y;                  // network output (post output activation)
};

template <class T>
void relu_inplace(Mat<T>& x) {
  for (auto& v : x.v)
    if (v < T(0)) v = T(0);
}

// latent = post-activation of the last hidden layer (the input shared by the
// final head and any auxiliary head)
template <class T>
const Mat<T>& forward_to_latent(const Mlp<T>& net, const Mat<T>& x, FwdCache<T>& cache) {
  if (net.hidden.empty()) throw DimensionError("forward_to_latent: net has no hidden layers");
  cache.acts.clear();
  cache.acts.reserve(net.hidden.size() + 1);
  cache.acts.push_back(x);
  for (const auto& l : net.hidden) {
    Mat<T> h;
    linear_forward(l, cache.acts.back(), h);
    relu_inplace(h);
    cache.acts.push_back(std::move(h));
  }
  return cache.acts.back();
}

template <class T>
const Mat<T>& forward(const Mlp<T>& net, const Mat<T>& x, FwdCache<T>& cache) {
  if (net.hidden.empty()) {
    cache.acts.clear();
    cache.acts.push_back(x);
  } else {
    forward_to_latent(net, x, cache);
  }
  linear_forward(net.head, cache.acts.back(), cache.y);
  if (net.out_act == OutputAct::tanh_bounded)
    for (auto& v : cache.y.v) v = std::tanh(v);
  return cache.y;
}

template <class T>
struct Grads {
  std::vector<Linear<T>> hidden;
  Linear<T> head;
};

template <class T>
Grads<T> make_grads(const Mlp<T>& net) {
  Grads<T> g;
  g.hidden.resize(net.hidden.size());
  for (std::size_t i = 0; i < net.hidden.size(); ++i) {
    g.hidden[i].in = net.hidden[i].in;
    g.hidden[i].out = net.hidden[i].out;
    g.hidden[i].W.assign(net.hidden[i].W.size(), T(0));
    g.hidden[i].b.assign(net.hidden[i].b.size(), T(0));
  }
  g.head.in = net.head.in;
  g.head.out = net.head.out;
  g.head.W.assign(net.head.W.size(), T(0));
  g.head.b.assign(net.head.b.size(), T(0));
  return g;
}

template <class T>
void zero_grads(Grads<T>& g) {
  for (auto& l : g.hidden) {
    std::fill(l.W.begin(), l.W.end(), T(0));
    std::fill(l.b.begin(), l.b.end(), T(0));
  }
  std::fill(g.head.W.begin(), g.head.W.end(), T(0));
  std::fill(g.head.b.begin(), g.head.b.end(), T(0));
}

// Backprop of the hidden stack from a gradient w.r.t. the latent (post-ReLU
// output of the last hidden layer). Parameter gradients are accumulated into
// grads->hidden when grads is non-null; input gradients into *dx when non-null.
template <class T>
void backward_from_latent(const Mlp<T>& net, const FwdCache<T>& cache,
                          const Mat<T>& dlatent, Grads<T>* grads, Mat<T>* dx) {
  Mat<T> dh = dlatent;
  for (int li = int(net.hidden.size()) - 1; li >= 0; --li) {
    // ReLU mask from the post-activation
    const Mat<T>& act = cache.acts[std::size_t(li) + 1];
    for (std::size_t i = 0; i < dh.v.size(); ++i)
      if (act.v[i] <= T(0)) dh.v[i] = T(0);
    if (grads)
      linear_backward_params(cache.acts[std::size_t(li)], dh, grads->hidden[std::size_t(li)]);
    if (li > 0 || dx != nullptr) {
      Mat<T> dprev;
      linear_backward_input(net.hidden[std::size_t(li)], dh, dprev);
      dh = std::move(dprev);
    }
  }
  if (dx != nullptr) *dx = std::move(dh);
}

// Backprop from upstream dY. Parameter gradients are accumulated into *grads
// when non-null (zeroed shapes from make_grads / zero_grads); input gradients
// into *dx when non-null. The cache must come from a matching forward.
template <class T>
void backward(const Mlp<T>& net, const FwdCache<T>& cache, const Mat<T>& dy_in,
              Grads<T>* grads, Mat<T>* dx) {
  if (cache.acts.empty() || cache.y.n != dy_in.n || cache.y.m != dy_in.m)
    throw DimensionError("backward: cache does not match upstream gradient");

  Mat<T> dz = dy_in;
  if (net.out_act == OutputAct::tanh_bounded) {
    for (std::size_t i = 0; i < dz.v.size(); ++i) {
      const T y = cache.y.v[i];
      dz.v[i] = dz.v[i] * (T(1) - y * y);
    }
  }

  if (grads) linear_backward_params(cache.acts.back(), dz, grads->head);
  if (net.hidden.empty()) {
    if (dx != nullptr) linear_backward_input(net.head, dz, *dx);
    return;
  }
  Mat<T> dlat;
  linear_backward_input(net.head, dz, dlat);
  backward_from_latent(net, cache, dlat, grads, dx);
}

// ---- flat parameter views ---------------------------------------------------

template <class T>
std::vector<std::vector<T>*> param_arrays(Mlp<T>& net) {
  std::vector<std::vector<T>*> a;
  for (auto& l : net.hidden) {
    a.push_back(&l.W);
    a.push_back(&l.b);
  }
  a.push_back(&net.head.W);
  a.push_back(&net.head.b);
  return a;
}

template <class T>
std::vector<std::vector<T>*> grad_arrays(Grads<T>& g) {
  std::vector<std::vector<T>*> a;
  for (auto& l : g.hidden) {
    a.push_back(&l.W);
    a.push_back(&l.b);
  }
  a.push_back(&g.head.W);
  a.push_back(&g.head.b);
  return a;
}

template <class T>
std::size_t flat_size(const std::vector<std::vector<T>*>& arrays) {
  std::size_t s = 0;
  for (const auto* a : arrays) s += a->size();
  return s;
}

template <class T>
void flat_gather(const std::vector<std::vector<T>*>& arrays, std::vector<T>& out) {
  out.resize(flat_size(arrays));
  std::size_t at = 0;
  for (const auto* a : arrays) {
    std::copy(a->begin(), a->end(), out.begin() + at);
    at += a->size();
  }
}

template <class T>
void flat_scatter(const std::vector<std::vector<T>*>& arrays, const std::vector<T>& in) {
  if (in.size() != flat_size(arrays))
    throw DimensionError("flat_scatter: size mismatch");
  std::size_t at = 0;
  for (auto* a : arrays) {
    std::copy(in.begin() + at, in.begin() + at + a->size(), a->begin());
    at += a->size();
  }
}

// ---- optimization -----------------------------------------------------------

template <class T>
struct Adam {
  T beta1 = T(0.9), beta2 = T(0.999), eps = T(1e-8);
  long t = 0;
  std::vector<T> m, v;

  // standard bias-corrected Adam; returns false (and leaves params untouched)
  // on non-finite gradients
  bool step(std::span<T> params, std::span<const T> grads, T lr) {
    if (params.size() != grads.size())
      throw DimensionError("adam: gradient size mismatch");
    for (const T g : grads)
      if (!std::isfinite(double(g))) {
        std::fprintf(stderr, "adam: non-finite gradient, update skipped\n");
        return false;
      }
    if (m.size() != params.size()) {
      m.assign(params.size(), T(0));
      v.assign(params.size(), T(0));
    }
    ++t;
    const T bc1 = T(1) - T(std::pow(double(beta1), double(t)));
    const T bc2 = T(1) - T(std::pow(double(beta2), double(t)));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const T g = grads[i];
      m[i] = beta1 * m[i] + (T(1) - beta1) * g;
      v[i] = beta2 * v[i] + (T(1) - beta2) * g * g;
      params[i] -= lr * (m[i] / bc1) / (T(std::sqrt(double(v[i] / bc2))) + eps);
    }
    return true;
  }
};

// target <- rho * target + (1 - rho) * online, elementwise
template <class T>
void polyak_update(std::vector<T>& target, const std::vector<T>& online, T rho) {
  if (target.size() != online.size())
    throw DimensionError("polyak_update: layout mismatch");
  for (std::size_t i = 0; i < target.size(); ++i)
    target[i] = rho * target[i] + (T(1) - rho) * online[i];
}

template <class T>
void polyak_update(Mlp<T>& target, const Mlp<T>& online, T rho) {
  if (target.hidden.size() != online.hidden.size())
    throw DimensionError("polyak_update: layout mismatch");
  for (std::size_t i = 0; i < target.hidden.size(); ++i) {
    polyak_update(target.hidden[i].W, online.hidden[i].W, rho);
    polyak_update(target.hidden[i].b, online.hidden[i].b, rho);
  }
  polyak_update(target.head.W, online.head.W, rho);
  polyak_update(target.head.b, online.head.b, rho);
}

template <class T>
bool all_finite(const Mlp<T>& net) {
  for (const auto& l : net.hidden)
    for (const auto& arr : {&l.W, &l.b})
      for (const T x : *arr)
        if (!std::isfinite(double(x))) return false;
  for (const auto& arr : {&net.head.W, &net.head.b})
    for (const T x : *arr)
      if (!std::isfinite(double(x))) return false;
  return true;
}

}  // namespace uclab
