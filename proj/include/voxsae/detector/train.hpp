#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/core/metadata.hpp"
#include "voxsae/core/rng.hpp"
#include "voxsae/detector/evaluate.hpp"
#include "voxsae/detector/head.hpp"
#include "voxsae/dsp/augment.hpp"
#include "voxsae/dsp/encoder.hpp"
#include "voxsae/dsp/waveform.hpp"
#include "voxsae/tensor/adam.hpp"
#include "voxsae/tensor/schedule.hpp"

namespace voxsae::detector {

/// Cell index in the sex x label grid: 2*sex + label.
inline std::size_t cell_of(const SampleMeta& m) {
  return 2 * static_cast<std::size_t>(m.sex) + static_cast<std::size_t>(m.label);
}
inline std::string cell_name(std::size_t cell) {
  return std::string(to_string(static_cast<Sex>(cell / 2))) + "/" + to_string(static_cast<Label>(cell % 2));
}

/// Picks a sex x label cell uniformly, then a sample uniformly within it (with replacement).
class BalancedSampler {
 public:
  explicit BalancedSampler(std::span<const SampleMeta> metas) {
    for (std::size_t i = 0; i < metas.size(); ++i) cells_[cell_of(metas[i])].push_back(i);
    std::string empty;
    for (std::size_t c = 0; c < 4; ++c) {
      if (cells_[c].empty()) empty += (empty.empty() ? "" : ", ") + cell_name(c);
    }
    if (!empty.empty()) throw ConfigError("balanced sampler: empty cell(s): " + empty);
  }

  std::size_t draw(Rng& rng) const {
    const auto& cell = cells_[rng.uniform_index(4)];
    return cell[rng.uniform_index(cell.size())];
  }
  const std::array<std::vector<std::size_t>, 4>& cells() const { return cells_; }

 private:
  std::array<std::vector<std::size_t>, 4> cells_;
};

/// Cells larger than the median cell size get `majority`, smaller get
/// `minority`, cells exactly at the median get 1.
inline std::array<double, 4> cell_weights(std::span<const SampleMeta> metas, double majority = 0.7,
                                          double minority = 1.5) {
  std::array<double, 4> size{};
  for (const auto& m : metas) size[cell_of(m)] += 1.0;
  std::array<double, 4> sorted = size;
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[1] + sorted[2]);
  std::array<double, 4> w{};
  for (std::size_t c = 0; c < 4; ++c) w[c] = size[c] > median ? majority : (size[c] < median ? minority : 1.0);
  return w;
}

struct TrainConfig {
  HeadConfig head{};
  double lr_peak = 1e-4;
  std::uint64_t epochs = 20;
  std::uint64_t warmup_epochs = 2;
  std::uint64_t samples_per_epoch = 1024;
  std::uint64_t batch = 32;
  double weight_majority = 0.7;
  double weight_minority = 1.5;
  double augment_prob = 0.9;
  bool standardize_inputs = true;
  std::uint64_t seed = 0;
  AdamConfig adam{};

  std::uint64_t steps_per_epoch() const { return samples_per_epoch / batch; }
  LrSchedule schedule() const {
    return {lr_peak, warmup_epochs * steps_per_epoch(), epochs * steps_per_epoch(), LrShape::WarmupCosine};
  }
  void validate() const {
    if (batch == 0 || samples_per_epoch < batch) throw ConfigError("detector: need samples_per_epoch >= batch >= 1");
    if (epochs == 0) throw ConfigError("detector: epochs must be >= 1");
    if (warmup_epochs > epochs) throw ConfigError("detector: warmup_epochs > epochs");
    if (!(lr_peak > 0.0)) throw ConfigError("detector: lr_peak must be > 0");
    if (!(weight_majority > 0.0 && weight_minority > 0.0)) throw ConfigError("detector: sample weights must be > 0");
    if (!(augment_prob >= 0.0 && augment_prob <= 1.0)) throw ConfigError("detector: augment_prob must be in [0,1]");
  }
};

struct EpochRecord {
  std::uint64_t epoch = 0;
  double mean_loss = 0.0;
  std::optional<double> f1, f1_fr, f1_en;
};

struct TrainResult {
  ClassifierHead head;
  std::vector<EpochRecord> history;
};

/// Hook called with the attention weights of every forward pass during training.
using AttentionObserver = std::function<void(std::span<const double>)>;

/// Per-sample input source: returns the frames of sample i; `augment` asks
/// for a freshly augmented version (only meaningful for waveform input).
using FrameSource = std::function<Matrix(std::size_t i, bool augment, Rng& rng)>;

inline std::vector<double> predict_probs(const ClassifierHead& head, std::size_t n,
                                         const std::function<const Matrix&(std::size_t)>& frames) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = forward(head, frames(i), Mode::Eval).prob;
  return p;
}

inline void fit_standardizer(ClassifierHead& head, std::size_t n, const std::function<const Matrix&(std::size_t)>& frames) {
  const std::size_t N = head.cfg.input_dim;
  Vector sum(N, 0.0), sq(N, 0.0);
  double count = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& f = frames(i);
    for (std::size_t t = 0; t < f.rows(); ++t) {
      for (std::size_t j = 0; j < N; ++j) {
        sum[j] += f(t, j);
        sq[j] += f(t, j) * f(t, j);
      }
      count += 1.0;
    }
  }
  for (std::size_t j = 0; j < N; ++j) {
    head.in_mean[j] = sum[j] / count;
    const double var = sq[j] / count - head.in_mean[j] * head.in_mean[j];
    head.in_scale[j] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
}

/// Core loop shared by embedding and waveform training. `clean(i)` gives the
/// unaugmented frames used for standardization and epoch metrics.
inline TrainResult train_loop(std::span<const SampleMeta> metas, const std::function<const Matrix&(std::size_t)>& clean,
                              const FrameSource& augmented, bool can_augment, const TrainConfig& cfg,
                              const AttentionObserver& observer = {}) {
  cfg.validate();
  if (metas.empty()) throw ConfigError("detector: empty training set");
  bool has_pd = false, has_hc = false;
  for (const auto& m : metas) (m.label == Label::PD ? has_pd : has_hc) = true;
  if (!has_pd || !has_hc) throw ConfigError("detector: training data must contain both PD and HC samples");

  const BalancedSampler sampler(metas);
  const auto weights = cell_weights(metas, cfg.weight_majority, cfg.weight_minority);

  TrainResult res{ClassifierHead(cfg.head), {}};
  ClassifierHead& head = res.head;
  Rng init_rng(mix_seed(cfg.seed, 1));
  head.init(init_rng);
  if (cfg.standardize_inputs) fit_standardizer(head, metas.size(), clean);

  Rng sample_rng(mix_seed(cfg.seed, 2)), dropout_rng(mix_seed(cfg.seed, 3)), aug_rng(mix_seed(cfg.seed, 4));
  auto params = head.params();
  Adam opt(params, cfg.adam);
  const LrSchedule sched = cfg.schedule();
  const std::uint64_t spe = cfg.steps_per_epoch();

  for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (std::uint64_t s = 0; s < spe; ++s) {
      const std::uint64_t step = epoch * spe + s;
      opt.zero_grad();
      const bool aug = can_augment && aug_rng.bernoulli(cfg.augment_prob);
      double batch_loss = 0.0;
      for (std::uint64_t b = 0; b < cfg.batch; ++b) {
        const std::size_t i = sampler.draw(sample_rng);
        const double w = weights[cell_of(metas[i])];
        const double y = metas[i].label == Label::PD ? 1.0 : 0.0;
        ForwardResult fr;
        if (aug) {
          const Matrix frames = augmented(i, true, aug_rng);
          fr = forward(head, frames, Mode::Train, &dropout_rng);
        } else {
          fr = forward(head, clean(i), Mode::Train, &dropout_rng);
        }
        if (observer) observer(fr.attention);
        batch_loss += bce_loss(fr.logit, y, w);
        backward(head, fr.cache, bce_grad(fr.logit, y, w) / static_cast<double>(cfg.batch));
      }
      batch_loss /= static_cast<double>(cfg.batch);
      if (!std::isfinite(batch_loss)) throw NumericError("detector: loss diverged at step " + std::to_string(step));
      try {
        opt.step(lr_at(sched, step + 1));
      } catch (const NumericError& e) {
        throw NumericError("detector: step " + std::to_string(step) + ": " + e.what());
      }
      loss_sum += batch_loss;
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.mean_loss = loss_sum / static_cast<double>(spe);
    const auto probs = predict_probs(head, metas.size(), clean);
    const auto ev = score_predictions(probs, metas);
    rec.f1 = ev.f1();
    rec.f1_fr = ev.f1(Language::Fr);
    rec.f1_en = ev.f1(Language::En);
    res.history.push_back(rec);
  }
  return res;
}

/// Trains on precomputed embedding sequences (no augmentation).
inline TrainResult train_detector(std::span<const EmbeddingSequence> data, const TrainConfig& cfg,
                                  const AttentionObserver& observer = {}) {
  std::vector<SampleMeta> metas;
  for (const auto& d : data) metas.push_back(d.meta);
  auto clean = [&](std::size_t i) -> const Matrix& { return data[i].frames; };
  FrameSource none = [&](std::size_t i, bool, Rng&) { return data[i].frames; };
  return train_loop(metas, clean, none, false, cfg, observer);
}

struct WavSample {
  SampleMeta meta;
  dsp::Waveform wave;
};

/// Trains on waveforms through the filterbank encoder; a fraction augment_prob
/// of batches is augmented (noise + notches) before encoding.
inline TrainResult train_detector_wav(std::span<const WavSample> data, const TrainConfig& cfg,
                                      const dsp::AugmentConfig& aug_cfg = {}, const AttentionObserver& observer = {}) {
  std::vector<SampleMeta> metas;
  std::vector<Matrix> encoded;
  for (const auto& d : data) {
    metas.push_back(d.meta);
    encoded.push_back(dsp::filterbank_encoder(d.wave, cfg.head.input_dim));
  }
  dsp::AugmentConfig always = aug_cfg;
  always.apply_probability = 1.0;
  auto clean = [&](std::size_t i) -> const Matrix& { return encoded[i]; };
  FrameSource aug = [&](std::size_t i, bool, Rng& rng) {
    return dsp::filterbank_encoder(dsp::augment(data[i].wave, always, rng), cfg.head.input_dim);
  };
  return train_loop(metas, clean, aug, true, cfg, observer);
}

inline EvalResult evaluate(const ClassifierHead& head, std::span<const EmbeddingSequence> data) {
  std::vector<double> probs;
  std::vector<SampleMeta> metas;
  for (const auto& d : data) {
    probs.push_back(forward(head, d.frames, Mode::Eval).prob);
    metas.push_back(d.meta);
  }
  return score_predictions(probs, metas);
}

}  // namespace voxsae::detector
