#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/core/metadata.hpp"
#include "voxsae/core/rng.hpp"
#include "voxsae/tensor/matrix.hpp"
#include "voxsae/tensor/param.hpp"

namespace voxsae::detector {

/// T x N encoder frames with sample metadata.
struct EmbeddingSequence {
  SampleMeta meta;
  Matrix frames;
};

struct HeadConfig {
  std::size_t input_dim = 64;  // N
  std::size_t hidden = 64;     // H
  std::size_t hidden2 = 32;    // H2
  double dropout_rate = 0.2;
  double leaky_slope = 0.01;
};

enum class Mode { Train, Eval };

/// linear -> LReLU -> dropout -> attention pooling -> linear -> LReLU -> dropout -> output.
/// Inputs are standardized with fixed per-dimension (in_mean, in_scale) before W1.
struct ClassifierHead {
  HeadConfig cfg;
  ParamTensor W1, b1, attn_v, W2, b2, w_out, b_out;
  Vector in_mean, in_scale;

  explicit ClassifierHead(const HeadConfig& c = {})
      : cfg(c),
        W1("W1", Matrix(c.hidden, c.input_dim)),
        b1("b1", Matrix(c.hidden, 1)),
        attn_v("attn_v", Matrix(c.hidden, 1)),
        W2("W2", Matrix(c.hidden2, c.hidden)),
        b2("b2", Matrix(c.hidden2, 1)),
        w_out("w_out", Matrix(1, c.hidden2)),
        b_out("b_out", Matrix(1, 1)),
        in_mean(c.input_dim, 0.0),
        in_scale(c.input_dim, 1.0) {
    if (c.input_dim == 0 || c.hidden == 0 || c.hidden2 == 0) throw ConfigError("detector: layer sizes must be >= 1");
    if (!(c.dropout_rate >= 0.0 && c.dropout_rate < 1.0)) throw ConfigError("detector: dropout_rate must be in [0, 1)");
  }

  std::vector<ParamTensor*> params() { return {&W1, &b1, &attn_v, &W2, &b2, &w_out, &b_out}; }
  std::vector<const ParamTensor*> params() const { return {&W1, &b1, &attn_v, &W2, &b2, &w_out, &b_out}; }

  void zero_grad() {
    for (auto* p : params()) p->zero_grad();
  }

  /// He-style normal init for the linear layers, small scorer, zero biases.
  void init(Rng& rng) {
    auto fill = [&](Matrix& m, double sd) {
      for (double& v : m.data()) v = sd * rng.normal();
    };
    fill(W1.value, std::sqrt(2.0 / static_cast<double>(cfg.input_dim)));
    fill(attn_v.value, 1.0 / std::sqrt(static_cast<double>(cfg.hidden)));
    fill(W2.value, std::sqrt(2.0 / static_cast<double>(cfg.hidden)));
    fill(w_out.value, std::sqrt(1.0 / static_cast<double>(cfg.hidden2)));
    b1.value.fill(0.0);
    b2.value.fill(0.0);
    b_out.value.fill(0.0);
  }
};

inline double lrelu(double z, double slope) { return z > 0.0 ? z : slope * z; }
inline double lrelu_grad(double z, double slope) { return z > 0.0 ? 1.0 : slope; }
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

/// weight * (softplus(z) - y z), the stable form of weighted binary cross-entropy.
inline double bce_loss(double logit, double label, double weight = 1.0) {
  if (!(weight > 0.0)) throw InputError("bce_loss: sample weight must be > 0");
  return weight * (softplus(logit) - label * logit);
}
inline double bce_grad(double logit, double label, double weight = 1.0) { return weight * (sigmoid(logit) - label); }

struct AttentionPool {
  Vector pooled;   // H
  Vector weights;  // T, on the simplex
  Vector scores;   // T
};

/// s_t = v . h_t, weights = softmax(s), pooled = sum_t weights_t h_t.
inline AttentionPool attention_pool(const Matrix& h, std::span<const double> v) {
  if (h.rows() == 0) throw InputError("attention_pool: empty sequence");
  if (h.cols() != v.size()) {
    throw DimensionError("attention_pool: frames " + h.shape_string() + " vs scorer (" + std::to_string(v.size()) + ")");
  }
  AttentionPool out;
  out.scores = matvec(h, v);
  const double smax = *std::max_element(out.scores.begin(), out.scores.end());
  out.weights.resize(h.rows());
  double z = 0.0;
  for (std::size_t t = 0; t < h.rows(); ++t) z += (out.weights[t] = std::exp(out.scores[t] - smax));
  for (double& w : out.weights) w /= z;
  out.pooled = matvec_transposed(h, out.weights);
  return out;
}

/// Intermediate values kept for the backward pass.
struct ForwardCache {
  Matrix x;       // standardized input, T x N
  Matrix h_pre;   // T x H
  Matrix h;       // after LReLU and dropout
  Matrix drop1;   // dropout multipliers (1 in eval)
  AttentionPool pool;
  Vector z2, g, drop2;
};

struct ForwardResult {
  double logit = 0.0;
  double prob = 0.0;
  Vector attention;
  Vector pooled;
  ForwardCache cache;
};

namespace detail {

inline void check_simplex(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw NumericError("attention weights left the simplex (negative or NaN weight)");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-6) throw NumericError("attention weights sum to " + std::to_string(s));
}

inline double dropout_keep(Rng* rng, double p) {
  if (p <= 0.0) return 1.0;
  return rng->uniform() < p ? 0.0 : 1.0 / (1.0 - p);
}

}  // namespace detail

/// Output layers applied to a pooled vector. `drop2` receives the dropout multipliers used.
inline double head_from_pooled(const ClassifierHead& m, std::span<const double> pooled, Mode mode, Rng* rng,
                               Vector* z2_out = nullptr, Vector* g_out = nullptr, Vector* drop2_out = nullptr) {
  if (pooled.size() != m.cfg.hidden) {
    throw DimensionError("detector: pooled width " + std::to_string(pooled.size()) + " != hidden " +
                         std::to_string(m.cfg.hidden));
  }
  if (mode == Mode::Train && rng == nullptr && m.cfg.dropout_rate > 0.0) throw InputError("detector: train mode needs an rng");
  Vector z2 = matvec(m.W2.value, pooled);
  Vector g(z2.size()), drop(z2.size(), 1.0);
  for (std::size_t i = 0; i < z2.size(); ++i) {
    z2[i] += m.b2.value(i, 0);
    if (mode == Mode::Train) drop[i] = detail::dropout_keep(rng, m.cfg.dropout_rate);
    g[i] = lrelu(z2[i], m.cfg.leaky_slope) * drop[i];
  }
  const double logit = dot(m.w_out.value.data(), g) + m.b_out.value(0, 0);
  if (z2_out) *z2_out = std::move(z2);
  if (g_out) *g_out = std::move(g);
  if (drop2_out) *drop2_out = std::move(drop);
  return logit;
}

/// Full forward pass. Eval mode is deterministic; train mode draws dropout masks from rng.
inline ForwardResult forward(const ClassifierHead& m, const Matrix& frames, Mode mode, Rng* rng = nullptr) {
  const auto& c = m.cfg;
  if (frames.cols() != c.input_dim) {
    throw DimensionError("detector: embedding width " + std::to_string(frames.cols()) + " != head input " +
                         std::to_string(c.input_dim));
  }
  if (frames.rows() == 0) throw InputError("detector: empty sequence");
  if (mode == Mode::Train && rng == nullptr && c.dropout_rate > 0.0) throw InputError("detector: train mode needs an rng");
  ForwardResult r;
  auto& k = r.cache;
  const std::size_t T = frames.rows();
  k.x = Matrix(T, c.input_dim);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < c.input_dim; ++j) k.x(t, j) = (frames(t, j) - m.in_mean[j]) / m.in_scale[j];
  }
  k.h_pre = matmul(k.x, m.W1.value.transposed());
  k.h = Matrix(T, c.hidden);
  k.drop1 = Matrix(T, c.hidden, 1.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < c.hidden; ++i) {
      k.h_pre(t, i) += m.b1.value(i, 0);
      if (mode == Mode::Train) k.drop1(t, i) = detail::dropout_keep(rng, c.dropout_rate);
      k.h(t, i) = lrelu(k.h_pre(t, i), c.leaky_slope) * k.drop1(t, i);
    }
  }
  k.pool = attention_pool(k.h, m.attn_v.value.data());
  detail::check_simplex(k.pool.weights);
  r.logit = head_from_pooled(m, k.pool.pooled, mode, rng, &k.z2, &k.g, &k.drop2);
  if (!std::isfinite(r.logit)) throw NumericError("detector: non-finite logit");
  r.prob = sigmoid(r.logit);
  r.attention = k.pool.weights;
  r.pooled = k.pool.pooled;
  return r;
}

/// Accumulates d(loss)/d(params) into the heads' grads given dL/dlogit.
inline void backward(ClassifierHead& m, const ForwardCache& k, double dlogit) {
  const auto& c = m.cfg;
  const std::size_t T = k.h.rows(), H = c.hidden, H2 = c.hidden2;
  m.b_out.grad(0, 0) += dlogit;
  Vector dz2(H2);
  for (std::size_t i = 0; i < H2; ++i) {
    m.w_out.grad(0, i) += dlogit * k.g[i];
    dz2[i] = dlogit * m.w_out.value(0, i) * k.drop2[i] * lrelu_grad(k.z2[i], c.leaky_slope);
    m.b2.grad(i, 0) += dz2[i];
  }
  add_outer(m.W2.grad, 1.0, dz2, k.pool.pooled);
  const Vector dp = matvec_transposed(m.W2.value, dz2);

  const auto& a = k.pool.weights;
  Vector da(T);
  double mean_da = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    da[t] = dot(k.h.row(t), dp);
    mean_da += a[t] * da[t];
  }
  Matrix dh(T, H);
  for (std::size_t t = 0; t < T; ++t) {
    const double ds = a[t] * (da[t] - mean_da);
    auto row = dh.row(t);
    const auto h = k.h.row(t);
    for (std::size_t i = 0; i < H; ++i) {
      row[i] = a[t] * dp[i] + ds * m.attn_v.value(i, 0);
      m.attn_v.grad(i, 0) += ds * h[i];
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    auto row = dh.row(t);
    for (std::size_t i = 0; i < H; ++i) {
      row[i] *= k.drop1(t, i) * lrelu_grad(k.h_pre(t, i), c.leaky_slope);
      m.b1.grad(i, 0) += row[i];
    }
    add_outer(m.W1.grad, 1.0, row, k.x.row(t));
  }
}

}  // namespace voxsae::detector
