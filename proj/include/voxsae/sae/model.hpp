#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/core/rng.hpp"
#include "voxsae/tensor/matrix.hpp"
#include "voxsae/tensor/param.hpp"

namespace voxsae::sae {

enum class Activation { Mask, Relu };

inline const char* to_string(Activation a) { return a == Activation::Relu ? "relu" : "mask"; }
inline Activation parse_activation(const std::string& s) {
  if (s == "mask") return Activation::Mask;
  if (s == "relu") return Activation::Relu;
  throw ConfigError("activation must be mask or relu, got '" + s + "'");
}

/// Value encoder (W_e, b_e), mask encoder (W_m, b_m), decoder (W_d, b_d).
struct SaeParams {
  std::size_t N = 0, K = 0;
  ParamTensor W_e, b_e, W_m, b_m, W_d, b_d;

  SaeParams(std::size_t n, std::size_t k)
      : N(n),
        K(k),
        W_e("W_e", Matrix(k, n)),
        b_e("b_e", Matrix(k, 1)),
        W_m("W_m", Matrix(k, n)),
        b_m("b_m", Matrix(k, 1)),
        W_d("W_d", Matrix(n, k)),
        b_d("b_d", Matrix(n, 1)) {
    if (n == 0 || k == 0) throw ConfigError("sae: N and K must be >= 1");
  }

  std::vector<ParamTensor*> params() { return {&W_e, &b_e, &W_m, &b_m, &W_d, &b_d}; }
  std::vector<const ParamTensor*> params() const { return {&W_e, &b_e, &W_m, &b_m, &W_d, &b_d}; }
  void zero_grad() {
    for (auto* p : params()) p->zero_grad();
  }

  double decoder_norm(std::size_t i) const {
    double s = 0.0;
    for (std::size_t r = 0; r < N; ++r) s += W_d.value(r, i) * W_d.value(r, i);
    return std::sqrt(s);
  }
  Vector decoder_norms() const {
    Vector c(K);
    for (std::size_t i = 0; i < K; ++i) c[i] = decoder_norm(i);
    return c;
  }

  /// Decoder columns: random directions with norm 0.1; W_e = W_d^T;
  /// W_m ~ N(0, 0.01^2); b_m = -1; other biases zero.
  void init(Rng& rng, double decoder_norm_init = 0.1, double mask_std = 0.01, double mask_bias = -1.0) {
    for (std::size_t i = 0; i < K; ++i) {
      double s = 0.0;
      for (std::size_t r = 0; r < N; ++r) {
        W_d.value(r, i) = rng.normal();
        s += W_d.value(r, i) * W_d.value(r, i);
      }
      const double scale = decoder_norm_init / std::sqrt(s);
      for (std::size_t r = 0; r < N; ++r) W_d.value(r, i) *= scale;
    }
    W_e.value = W_d.value.transposed();
    for (double& v : W_m.value.data()) v = mask_std * rng.normal();
    b_m.value.fill(mask_bias);
    b_e.value.fill(0.0);
    b_d.value.fill(0.0);
  }
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct DictionaryActivation {
  Vector value;  // W_e x + b_e
  Vector mask;   // sigma(tau (W_m x + b_m)), or the 0/1 indicator for relu
  Vector f;      // value * mask, or relu(value)
  Vector logit;  // W_m x + b_m (mask variant only)
  std::size_t active_count = 0;
};

namespace detail {

inline void check_input(const SaeParams& p, std::span<const double> x) {
  if (x.size() != p.N) {
    throw DimensionError("sae: input width " + std::to_string(x.size()) + " != " + std::to_string(p.N));
  }
}

inline Vector affine(const ParamTensor& W, const ParamTensor& b, std::span<const double> x) {
  Vector y = matvec(W.value, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.value(i, 0);
  return y;
}

}  // namespace detail

/// mask = sigma(tau (W_m x + b_m)); f = (W_e x + b_e) * mask. Active = mask > threshold.
inline DictionaryActivation encode(const SaeParams& p, std::span<const double> x, double tau,
                                   double active_threshold = 0.5) {
  if (!(tau > 0.0)) throw InputError("sae: tau must be > 0");
  detail::check_input(p, x);
  DictionaryActivation a;
  a.value = detail::affine(p.W_e, p.b_e, x);
  a.logit = detail::affine(p.W_m, p.b_m, x);
  a.mask.resize(p.K);
  a.f.resize(p.K);
  for (std::size_t i = 0; i < p.K; ++i) {
    a.mask[i] = sigmoid(tau * a.logit[i]);
    a.f[i] = a.value[i] * a.mask[i];
    if (a.mask[i] > active_threshold) ++a.active_count;
  }
  return a;
}

/// f = max(0, W_e x + b_e); mask is the indicator f > 0.
inline DictionaryActivation relu_encode(const SaeParams& p, std::span<const double> x) {
  detail::check_input(p, x);
  DictionaryActivation a;
  a.value = detail::affine(p.W_e, p.b_e, x);
  a.mask.resize(p.K);
  a.f.resize(p.K);
  for (std::size_t i = 0; i < p.K; ++i) {
    a.f[i] = a.value[i] > 0.0 ? a.value[i] : 0.0;
    a.mask[i] = a.f[i] > 0.0 ? 1.0 : 0.0;
    if (a.f[i] > 0.0) ++a.active_count;
  }
  return a;
}

inline DictionaryActivation encode_with(const SaeParams& p, Activation act, std::span<const double> x, double tau) {
  return act == Activation::Mask ? encode(p, x, tau) : relu_encode(p, x);
}

/// x_hat = W_d f + b_d.
inline Vector decode(const SaeParams& p, std::span<const double> f) {
  if (f.size() != p.K) throw DimensionError("sae: code width " + std::to_string(f.size()) + " != K " + std::to_string(p.K));
  return detail::affine(p.W_d, p.b_d, f);
}

/// (1/N) sum (x_hat - x)^2.
inline double fidelity_loss(std::span<const double> x, std::span<const double> x_hat) {
  if (x.size() != x_hat.size() || x.empty()) throw DimensionError("fidelity_loss: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x_hat[i] - x[i]) * (x_hat[i] - x[i]);
  return s / static_cast<double>(x.size());
}

/// (1/K) sum_i gate_i ||W_d[:, i]||. The gate is the mask (mask variant) or the activation (relu).
inline double sparsity_loss(const SaeParams& p, std::span<const double> gate) {
  if (gate.size() != p.K) throw DimensionError("sparsity_loss: gate length != K");
  double s = 0.0;
  for (std::size_t i = 0; i < p.K; ++i) s += gate[i] * p.decoder_norm(i);
  return s / static_cast<double>(p.K);
}

struct LossParts {
  double total = 0.0, fidelity = 0.0, sparsity = 0.0;
};

/// total = fidelity + lambda * sparsity for one input.
inline LossParts total_loss(std::span<const double> x, const SaeParams& p, double tau, double lambda,
                            Activation act = Activation::Mask) {
  const auto a = encode_with(p, act, x, tau);
  const auto x_hat = decode(p, a.f);
  LossParts l;
  l.fidelity = fidelity_loss(x, x_hat);
  l.sparsity = sparsity_loss(p, act == Activation::Mask ? std::span<const double>(a.mask) : std::span<const double>(a.f));
  l.total = l.fidelity + lambda * l.sparsity;
  return l;
}

/// Accumulates scale * d(total_loss)/d(params) for one input into the grads.
inline LossParts accumulate_grad(SaeParams& p, std::span<const double> x, double tau, double lambda, Activation act,
                                 double scale = 1.0) {
  const auto a = encode_with(p, act, x, tau);
  const auto x_hat = decode(p, a.f);
  const Vector c = p.decoder_norms();
  const double N = static_cast<double>(p.N), K = static_cast<double>(p.K);
  const std::span<const double> gate = act == Activation::Mask ? std::span<const double>(a.mask) : std::span<const double>(a.f);

  LossParts l;
  l.fidelity = fidelity_loss(x, x_hat);
  l.sparsity = sparsity_loss(p, gate);
  l.total = l.fidelity + lambda * l.sparsity;

  Vector dxh(p.N);
  for (std::size_t r = 0; r < p.N; ++r) {
    dxh[r] = scale * 2.0 / N * (x_hat[r] - x[r]);
    p.b_d.grad(r, 0) += dxh[r];
  }
  add_outer(p.W_d.grad, 1.0, dxh, a.f);
  // Sparsity term through the decoder column norms.
  for (std::size_t i = 0; i < p.K; ++i) {
    if (c[i] == 0.0 || gate[i] == 0.0) continue;
    const double k = scale * lambda / K * gate[i] / c[i];
    for (std::size_t r = 0; r < p.N; ++r) p.W_d.grad(r, i) += k * p.W_d.value(r, i);
  }
  const Vector df = matvec_transposed(p.W_d.value, dxh);

  Vector dv(p.K, 0.0), dlogit(p.K, 0.0);
  for (std::size_t i = 0; i < p.K; ++i) {
    const double sp = scale * lambda / K * c[i];
    if (act == Activation::Mask) {
      dv[i] = df[i] * a.mask[i];
      const double dm = df[i] * a.value[i] + sp;
      dlogit[i] = dm * tau * a.mask[i] * (1.0 - a.mask[i]);
    } else {
      dv[i] = a.value[i] > 0.0 ? df[i] + sp : 0.0;
    }
    p.b_e.grad(i, 0) += dv[i];
    p.b_m.grad(i, 0) += dlogit[i];
  }
  add_outer(p.W_e.grad, 1.0, dv, x);
  if (act == Activation::Mask) add_outer(p.W_m.grad, 1.0, dlogit, x);
  return l;
}

}  // namespace voxsae::sae
