#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "voxsae/core/error.hpp"
#include "voxsae/core/rng.hpp"

namespace voxsae::analysis {

/// 1-based ranks; tied values share the average of their ranks.
inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline bool has_ties(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) != s.end();
}

/// Pearson correlation; empty when either input has zero variance or n < 2.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Spearman's rho: Pearson correlation of average ranks. Empty (undefined)
/// when n < 3 or either ranking is constant.
inline std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("spearman: length mismatch");
  if (x.size() < 3) return std::nullopt;
  const auto rx = average_ranks(x), ry = average_ranks(y);
  return pearson(rx, ry);
}

/// Pairs with both values present.
struct PairedSample {
  std::vector<double> x, y;
};

inline PairedSample drop_missing(std::span<const std::optional<double>> x, std::span<const std::optional<double>> y) {
  if (x.size() != y.size()) throw DimensionError("drop_missing: length mismatch");
  PairedSample p;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] && y[i]) {
      p.x.push_back(*x[i]);
      p.y.push_back(*y[i]);
    }
  }
  return p;
}

struct PValue {
  double p = 1.0;
  bool exact = false;  // |rho| = 1: the t statistic is infinite, p reported as 0
};

/// Two-sided p for Spearman's rho from t = rho sqrt((n-2)/(1-rho^2)) on n-2 dof.
inline PValue spearman_pvalue(double rho, std::size_t n) {
  if (n < 4) throw InputError("spearman_pvalue: need n >= 4, got " + std::to_string(n));
  if (!(std::abs(rho) <= 1.0)) throw InputError("spearman_pvalue: |rho| > 1");
  if (std::abs(rho) == 1.0) return {0.0, true};
  const double dof = static_cast<double>(n - 2);
  const double t = std::abs(rho) * std::sqrt(dof / (1.0 - rho * rho));
  const boost::math::students_t dist(dof);
  return {std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t))), false};
}

/// Two-sided p for untied Spearman's rho using the Edgeworth series
/// approximation to the null distribution of S = sum d^2 (algorithm AS 89).
inline PValue spearman_pvalue_edgeworth(double rho, std::size_t n) {
  if (n < 4) throw InputError("spearman_pvalue_edgeworth: need n >= 4, got " + std::to_string(n));
  if (!(std::abs(rho) <= 1.0)) throw InputError("spearman_pvalue_edgeworth: |rho| > 1");
  if (std::abs(rho) == 1.0) return {0.0, true};
  const double nd = static_cast<double>(n);
  const double n3 = nd * (nd * nd - 1.0);
  // Lower tail of S at the observed |rho|: P(S <= q). S is always even, so
  // P(S <= q) = 1 - P(S >= q + 2).
  const double q = n3 * (1.0 - std::abs(rho)) / 6.0;
  const double js = std::round(q) + 2.0;
  double upper = 0.0;  // P(S >= js)
  if (js <= 0.0) {
    upper = 1.0;
  } else if (js > n3 / 3.0) {
    upper = 0.0;
  } else {
    constexpr double c1 = 0.2274, c2 = 0.2531, c3 = 0.1745, c4 = 0.0758, c5 = 0.1033, c6 = 0.3932, c7 = 0.0879,
                     c8 = 0.0151, c9 = 0.0072, c10 = 0.0831, c11 = 0.0131, c12 = 4.6e-4;
    const double b = 1.0 / nd;
    const double x = (6.0 * (js - 1.0) * b / (nd * nd - 1.0) - 1.0) * std::sqrt(1.0 / b - 1.0);
    const double y = x * x;
    const double u =
        x * b *
        (c1 + b * (c2 + c3 * b) +
         y * (-c4 + b * (c5 + c6 * b) - y * b * (c7 + c8 * b - y * (c9 - c10 * b + y * b * (c11 - c12 * y)))));
    const boost::math::normal_distribution<double> z;
    upper = std::clamp(u / std::exp(y / 2.0) + boost::math::cdf(boost::math::complement(z, x)), 0.0, 1.0);
  }
  const double one_sided = std::clamp(1.0 - upper, 0.0, 1.0);
  return {std::min(1.0, 2.0 * one_sided), false};
}

/// Two-sided permutation p: (1 + #{|rho_perm| >= |rho|}) / (1 + n_perm).
inline PValue spearman_pvalue_permutation(std::span<const double> x, std::span<const double> y, std::size_t n_perm,
                                          Rng& rng) {
  const auto rho = spearman(x, y);
  if (!rho) throw NumericError("spearman_pvalue_permutation: undefined correlation");
  const auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n_perm; ++k) {
    for (std::size_t i = ry.size(); i > 1; --i) std::swap(ry[i - 1], ry[rng.uniform_index(i)]);
    const auto r = pearson(rx, ry);
    if (r && std::abs(*r) >= std::abs(*rho) - 1e-12) ++hits;
  }
  return {static_cast<double>(hits + 1) / static_cast<double>(n_perm + 1), false};
}

enum class PMethod { Auto, TApprox, Edgeworth, Permutation };

inline PMethod parse_pmethod(const std::string& s) {
  if (s == "auto") return PMethod::Auto;
  if (s == "t") return PMethod::TApprox;
  if (s == "edgeworth") return PMethod::Edgeworth;
  if (s == "permutation") return PMethod::Permutation;
  throw ConfigError("p-value method must be auto, t, edgeworth or permutation, got '" + s + "'");
}
inline const char* to_string(PMethod m) {
  switch (m) {
    case PMethod::Auto: return "auto";
    case PMethod::TApprox: return "t";
    case PMethod::Edgeworth: return "edgeworth";
    case PMethod::Permutation: return "permutation";
  }
  return "?";
}

struct POptions {
  PMethod method = PMethod::TApprox;
  std::size_t n_permutations = 10000;
};

/// p for an observed pair. Auto uses the Edgeworth series when neither
/// variable has ties and n >= 10, otherwise the t-approximation.
inline PValue spearman_p(std::span<const double> x, std::span<const double> y, double rho, const POptions& opt,
                         Rng* rng = nullptr) {
  const std::size_t n = x.size();
  switch (opt.method) {
    case PMethod::TApprox: return spearman_pvalue(rho, n);
    case PMethod::Edgeworth: return spearman_pvalue_edgeworth(rho, n);
    case PMethod::Permutation: {
      if (!rng) throw InputError("permutation p-values need an rng");
      return spearman_pvalue_permutation(x, y, opt.n_permutations, *rng);
    }
    case PMethod::Auto:
      break;
  }
  if (n >= 10 && !has_ties(x) && !has_ties(y)) return spearman_pvalue_edgeworth(rho, n);
  return spearman_pvalue(rho, n);
}

/// min(1, m p).
inline double bonferroni(double p_raw, std::size_t m) {
  if (m < 1) throw InputError("bonferroni: m must be >= 1");
  return std::min(1.0, static_cast<double>(m) * p_raw);
}

}  // namespace voxsae::analysis
