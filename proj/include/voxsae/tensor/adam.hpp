#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/tensor/param.hpp"

namespace voxsae {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Per-parameter Adam moments. Full precision; no state quantization.
struct AdamState {
  Matrix m;
  Matrix v;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  AdamState(const Matrix& like, const AdamConfig& cfg = {})
      : m(like.rows(), like.cols()),
        v(like.rows(), like.cols()),
        beta1(cfg.beta1),
        beta2(cfg.beta2),
        epsilon(cfg.epsilon) {}
};

/// One bias-corrected Adam update of `param.value` from `param.grad`.
/// The gradient is left as-is; callers zero it for the next window.
inline void adam_step(ParamTensor& param, AdamState& state, double lr) {
  if (!param.value.same_shape(state.m) || !param.value.same_shape(param.grad)) {
    throw DimensionError("adam_step: shape mismatch for parameter '" + param.name + "' " +
                         param.value.shape_string() + " vs state " + state.m.shape_string());
  }
  if (!(lr >= 0.0)) throw ConfigError("adam_step: learning rate must be >= 0");
  if (!param.grad.all_finite()) {
    throw NumericError("adam_step: non-finite gradient in parameter '" + param.name + "'");
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  auto& w = param.value.data();
  const auto& g = param.grad.data();
  auto& m = state.m.data();
  auto& v = state.v.data();
  for (std::size_t i = 0; i < w.size(); ++i) {
    m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
    v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    w[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

/// Adam over a fixed list of parameters, in list order.
class Adam {
 public:
  Adam(std::span<ParamTensor* const> params, AdamConfig cfg = {}) : cfg_(cfg) {
    params_.assign(params.begin(), params.end());
    for (auto* p : params_) states_.emplace_back(p->value, cfg_);
  }

  void step(double lr) {
    for (std::size_t i = 0; i < params_.size(); ++i) adam_step(*params_[i], states_[i], lr);
  }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  const AdamConfig& config() const { return cfg_; }
  const std::vector<AdamState>& states() const { return states_; }

 private:
  AdamConfig cfg_;
  std::vector<ParamTensor*> params_;
  std::vector<AdamState> states_;
};

}  // namespace voxsae
