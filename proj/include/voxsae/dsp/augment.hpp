#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/core/rng.hpp"
#include "voxsae/dsp/waveform.hpp"

namespace voxsae::dsp {

enum class NoiseSource { White, Bank };

struct AugmentConfig {
  double apply_probability = 0.9;
  double snr_db_min = 0.0;
  double snr_db_max = 15.0;
  int notch_count_min = 2;
  int notch_count_max = 5;
  double notch_q = 30.0;
  double notch_f_min = 100.0;
  double notch_f_max_rel = 0.9;  // fraction of Nyquist
  NoiseSource noise_source = NoiseSource::White;
  std::vector<std::vector<double>> noise_bank;

  void validate() const {
    if (!(apply_probability >= 0.0 && apply_probability <= 1.0)) {
      throw ConfigError("augment: apply_probability must be in [0, 1]");
    }
    if (!(snr_db_min <= snr_db_max)) throw ConfigError("augment: snr range not ordered");
    if (notch_count_min < 0 || notch_count_min > notch_count_max) {
      throw ConfigError("augment: notch count range not ordered");
    }
    if (!(notch_q > 0.0)) throw ConfigError("augment: notch_q must be positive");
    if (noise_source == NoiseSource::Bank) {
      if (noise_bank.empty()) throw ConfigError("augment: noise bank is empty");
      for (const auto& n : noise_bank) {
        if (n.empty()) throw ConfigError("augment: noise bank entry is empty");
      }
    }
  }
};

/// Second-order section, normalized so a0 = 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(x.size());
    double z1 = 0.0, z2 = 0.0;  // transposed direct form II
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double out = b0 * x[i] + z1;
      z1 = b1 * x[i] - a1 * out + z2;
      z2 = b2 * x[i] - a2 * out;
      y[i] = out;
    }
    return y;
  }
};

/// Notch at f0 Hz (audio-EQ cookbook form).
inline Biquad design_notch(double f0, double sample_rate, double q) {
  const double w0 = 2.0 * std::numbers::pi * f0 / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Biquad bq;
  bq.b0 = 1.0 / a0;
  bq.b1 = -2.0 * std::cos(w0) / a0;
  bq.b2 = 1.0 / a0;
  bq.a1 = -2.0 * std::cos(w0) / a0;
  bq.a2 = (1.0 - alpha) / a0;
  return bq;
}

/// signal + g*noise with g chosen so mean_power(signal) / mean_power(g*noise) = 10^(snr/10).
/// A silent signal or silent noise is returned unchanged.
inline std::vector<double> mix_at_snr(std::span<const double> signal, std::span<const double> noise, double snr_db) {
  if (noise.size() != signal.size()) throw DimensionError("mix_at_snr: noise length differs from signal");
  std::vector<double> out(signal.begin(), signal.end());
  const double ps = mean_power(signal), pn = mean_power(noise);
  if (!(ps > 0.0) || !(pn > 0.0)) return out;
  const double g = std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += g * noise[i];
  return out;
}

struct AugmentRecord {
  bool applied = false;
  double snr_db = 0.0;
  std::vector<double> notch_hz;
};

/// Noise at a random SNR followed by random notches, with probability
/// apply_probability; otherwise the input is returned untouched.
inline Waveform augment(const Waveform& w, const AugmentConfig& cfg, Rng& rng, AugmentRecord* record = nullptr) {
  cfg.validate();
  AugmentRecord rec;
  if (!(rng.uniform() < cfg.apply_probability)) {
    if (record) *record = rec;
    return w;
  }
  rec.applied = true;
  rec.snr_db = rng.uniform(cfg.snr_db_min, cfg.snr_db_max);

  std::vector<double> noise(w.size());
  if (cfg.noise_source == NoiseSource::White) {
    for (double& v : noise) v = rng.normal();
  } else {
    const auto& src = cfg.noise_bank[rng.uniform_index(cfg.noise_bank.size())];
    std::size_t pos = rng.uniform_index(src.size());
    for (double& v : noise) {
      v = src[pos];
      pos = (pos + 1) % src.size();
    }
  }
  Waveform out{mix_at_snr(w.samples, noise, rec.snr_db), w.sample_rate};

  const auto n_notch = rng.uniform_int(cfg.notch_count_min, cfg.notch_count_max);
  const double f_hi = cfg.notch_f_max_rel * w.sample_rate / 2.0;
  for (std::int64_t i = 0; i < n_notch; ++i) {
    const double f = rng.uniform(cfg.notch_f_min, f_hi);
    rec.notch_hz.push_back(f);
    out.samples = design_notch(f, w.sample_rate, cfg.notch_q).apply(out.samples);
  }
  clip_unit(out.samples);
  if (record) *record = std::move(rec);
  return out;
}

}  // namespace voxsae::dsp
