#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/core/parallel.hpp"
#include "voxsae/core/rng.hpp"
#include "voxsae/sae/model.hpp"
#include "voxsae/tensor/adam.hpp"

namespace voxsae::sae {

struct TemperatureSchedule {
  double tau_start = 1.0;
  double tau_end = 0.2;
  std::uint64_t anneal_steps = 200;

  void validate() const {
    if (!(tau_start >= tau_end && tau_end > 0.0)) throw ConfigError("sae: need tau_start >= tau_end > 0");
  }
};

/// Linear from tau_start at step 0 to tau_end at anneal_steps, constant afterwards.
inline double tau_at(const TemperatureSchedule& s, std::uint64_t step) {
  if (step >= s.anneal_steps) return s.tau_end;
  const double frac = static_cast<double>(step) / static_cast<double>(s.anneal_steps);
  return s.tau_start + (s.tau_end - s.tau_start) * frac;
}

struct SaeTrainConfig {
  std::size_t K = 64;
  double lr = 0.003;
  double lambda = 0.001;
  TemperatureSchedule schedule{};
  std::uint64_t steps = 2000;
  std::uint64_t batch = 32;
  double holdout_fraction = 0.2;
  double active_threshold = 0.5;
  Activation activation = Activation::Mask;
  std::uint64_t seed = 0;
  AdamConfig adam{};

  void validate() const {
    if (!(lambda >= 0.0)) throw ConfigError("sae: lambda must be >= 0");
    if (!(lr > 0.0)) throw ConfigError("sae: lr must be > 0");
    if (K == 0 || batch == 0) throw ConfigError("sae: K and batch must be >= 1");
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) throw ConfigError("sae: holdout_fraction must be in [0,1)");
    schedule.validate();
  }
};

/// Summary of the code on a set of inputs at inference temperature.
struct CodeStats {
  double fidelity = 0.0;          // mean over samples of the per-sample MSE
  double mean_active = 0.0;       // mask > threshold (mask) or f > 0 (relu)
  double mean_mask = 0.0;         // mean gate value
  double effective_active = 0.0;  // entries with |f_i| ||W_d,i|| > 1% of ||x - b_d||
};

inline CodeStats code_stats(const SaeParams& p, const Matrix& X, std::span<const std::size_t> rows, Activation act,
                            double tau, double active_threshold = 0.5) {
  CodeStats s;
  if (rows.empty()) return s;
  const Vector c = p.decoder_norms();
  for (std::size_t r : rows) {
    const auto x = X.row(r);
    const auto a = act == Activation::Mask ? encode(p, x, tau, active_threshold) : relu_encode(p, x);
    s.fidelity += fidelity_loss(x, decode(p, a.f));
    s.mean_active += static_cast<double>(a.active_count);
    double centred = 0.0;
    for (std::size_t j = 0; j < p.N; ++j) centred += (x[j] - p.b_d.value(j, 0)) * (x[j] - p.b_d.value(j, 0));
    centred = std::sqrt(centred);
    for (std::size_t i = 0; i < p.K; ++i) {
      s.mean_mask += a.mask[i] / static_cast<double>(p.K);
      if (std::abs(a.f[i]) * c[i] > 0.01 * centred) s.effective_active += 1.0;
    }
  }
  const double n = static_cast<double>(rows.size());
  s.fidelity /= n;
  s.mean_active /= n;
  s.mean_mask /= n;
  s.effective_active /= n;
  return s;
}

struct SaeTrainResult {
  SaeParams params;
  std::vector<std::size_t> train_rows, holdout_rows;
  CodeStats train, holdout;
  double final_loss = 0.0;
};

/// Deterministic split: a seeded shuffle, the first ceil(holdout_fraction*n) rows held out.
inline void split_rows(std::size_t n, double holdout_fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                       std::vector<std::size_t>& holdout) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(mix_seed(seed, 11));
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  const auto n_hold = static_cast<std::size_t>(std::ceil(holdout_fraction * static_cast<double>(n)));
  holdout.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(n_hold, n)));
  train.assign(idx.begin() + static_cast<std::ptrdiff_t>(std::min(n_hold, n)), idx.end());
  std::sort(holdout.begin(), holdout.end());
  std::sort(train.begin(), train.end());
}

/// Adam on the mean batch loss with tau from the annealing schedule.
/// Batches are drawn by walking seeded shuffles of the training rows.
inline SaeTrainResult train_sae(const Matrix& X, const SaeTrainConfig& cfg) {
  cfg.validate();
  if (X.rows() == 0 || X.cols() == 0) throw InputError("sae: no training vectors");
  if (!X.all_finite()) throw InputError("sae: training vectors contain non-finite values");
  SaeTrainResult res{SaeParams(X.cols(), cfg.K), {}, {}, {}, {}, 0.0};
  split_rows(X.rows(), cfg.holdout_fraction, cfg.seed, res.train_rows, res.holdout_rows);
  if (res.train_rows.empty()) throw InputError("sae: training split is empty");

  SaeParams& p = res.params;
  Rng init_rng(mix_seed(cfg.seed, 12)), batch_rng(mix_seed(cfg.seed, 13));
  p.init(init_rng);
  auto params = p.params();
  Adam opt(params, cfg.adam);

  std::vector<std::size_t> order = res.train_rows;
  std::size_t cursor = order.size();
  for (std::uint64_t step = 0; step < cfg.steps; ++step) {
    const double tau = tau_at(cfg.schedule, step);
    opt.zero_grad();
    const std::size_t B = std::min<std::size_t>(cfg.batch, order.size());
    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      if (cursor == order.size()) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[batch_rng.uniform_index(i)]);
        cursor = 0;
      }
      const auto l = accumulate_grad(p, X.row(order[cursor++]), tau, cfg.lambda, cfg.activation, 1.0 / static_cast<double>(B));
      loss += l.total / static_cast<double>(B);
    }
    if (!std::isfinite(loss)) throw NumericError("sae: loss diverged at step " + std::to_string(step));
    try {
      opt.step(cfg.lr);
    } catch (const NumericError& e) {
      throw NumericError("sae: step " + std::to_string(step) + ": " + e.what());
    }
    res.final_loss = loss;
  }
  const double tau = cfg.schedule.tau_end;
  res.train = code_stats(p, X, res.train_rows, cfg.activation, tau, cfg.active_threshold);
  res.holdout = code_stats(p, X, res.holdout_rows.empty() ? res.train_rows : res.holdout_rows, cfg.activation, tau,
                           cfg.active_threshold);
  return res;
}

/// Codes for every row of X at inference temperature (rows x K).
inline Matrix encode_all(const SaeParams& p, const Matrix& X, Activation act, double tau) {
  Matrix F(X.rows(), p.K);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto a = encode_with(p, act, X.row(r), tau);
    std::copy(a.f.begin(), a.f.end(), F.row(r).begin());
  }
  return F;
}

struct SweepRow {
  double lambda = 0.0;
  Activation activation = Activation::Mask;
  std::uint64_t seed = 0;
  CodeStats holdout;
};

/// Trains one SAE per (lambda, activation, seed) on the same data, in
/// activation-major order regardless of `threads`.
inline std::vector<SweepRow> sweep_sae(const Matrix& X, const SaeTrainConfig& base, const std::vector<double>& lambdas,
                                       const std::vector<Activation>& acts, const std::vector<std::uint64_t>& seeds,
                                       std::size_t threads = 1) {
  std::vector<SweepRow> rows;
  for (Activation act : acts) {
    for (double lambda : lambdas) {
      for (std::uint64_t seed : seeds) rows.push_back({lambda, act, seed, {}});
    }
  }
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    SaeTrainConfig cfg = base;
    cfg.lambda = rows[i].lambda;
    cfg.activation = rows[i].activation;
    cfg.seed = rows[i].seed;
    rows[i].holdout = train_sae(X, cfg).holdout;
  });
  return rows;
}

struct FrontierPoint {
  double lambda = 0.0;
  double active = 0.0;
  double fidelity = 0.0;
};

/// Seed-averaged (lambda, mean active, mean fidelity) for one activation, in input lambda order.
inline std::vector<FrontierPoint> frontier(const std::vector<SweepRow>& rows, Activation act,
                                           const std::vector<double>& lambdas) {
  std::vector<FrontierPoint> out;
  for (double l : lambdas) {
    FrontierPoint fp{l, 0.0, 0.0};
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.activation == act && r.lambda == l) {
        fp.active += r.holdout.mean_active;
        fp.fidelity += r.holdout.fidelity;
        ++n;
      }
    }
    if (n == 0) throw InputError("frontier: no runs for lambda " + std::to_string(l));
    fp.active /= static_cast<double>(n);
    fp.fidelity /= static_cast<double>(n);
    out.push_back(fp);
  }
  return out;
}

/// Piecewise-linear fidelity as a function of active count through `pts`
/// (plus optional anchor), extrapolating linearly past the ends.
inline double interpolate_fidelity(std::vector<std::pair<double, double>> pts, double active) {
  std::sort(pts.begin(), pts.end());
  // Merge duplicate abscissae by averaging.
  std::vector<std::pair<double, double>> u;
  for (std::size_t i = 0; i < pts.size();) {
    std::size_t j = i;
    double s = 0.0;
    while (j < pts.size() && pts[j].first == pts[i].first) s += pts[j++].second;
    u.emplace_back(pts[i].first, s / static_cast<double>(j - i));
    i = j;
  }
  if (u.empty()) throw InputError("interpolate_fidelity: no points");
  if (u.size() == 1) return u[0].second;
  std::size_t k = 1;
  while (k + 1 < u.size() && active > u[k].first) ++k;
  const auto [x0, y0] = u[k - 1];
  const auto [x1, y1] = u[k];
  return y0 + (y1 - y0) * (active - x0) / (x1 - x0);
}

}  // namespace voxsae::sae
