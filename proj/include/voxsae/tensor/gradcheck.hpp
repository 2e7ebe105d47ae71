#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "voxsae/tensor/param.hpp"

namespace voxsae {

struct GradCheckEntry {
  std::string name;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<GradCheckEntry> per_tensor;
};

/// Relative error with a floor on the denominator so coordinates whose true
/// gradient is ~0 are judged on absolute error instead of amplified noise.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  const double diff = std::abs(analytic - numeric);
  if (diff == 0.0) return 0.0;
  return diff / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares analytic gradients already stored in `params[i]->grad` against
/// central differences of `loss`. Parameter values are restored afterwards.
/// `loss` must be deterministic (no dropout, no augmentation).
inline GradCheckReport finite_diff_check(const std::function<double()>& loss,
                                         std::span<ParamTensor* const> params, double eps,
                                         double denom_floor = 1e-6) {
  GradCheckReport report;
  for (ParamTensor* p : params) {
    GradCheckEntry entry;
    entry.name = p->name;
    auto& w = p->value.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      w[i] = saved + eps;
      const double up = loss();
      w[i] = saved - eps;
      const double down = loss();
      w[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad.data()[i];
      double err = relative_error(analytic, numeric, denom_floor);
      if (!std::isfinite(numeric)) err = numeric;
      if (!(err <= entry.rel_error)) {
        entry.rel_error = err;
        entry.worst_index = i;
        entry.analytic = analytic;
        entry.numeric = numeric;
      }
    }
    if (!(entry.rel_error <= report.max_rel_error)) report.max_rel_error = entry.rel_error;
    report.per_tensor.push_back(std::move(entry));
  }
  return report;
}

}  // namespace voxsae
