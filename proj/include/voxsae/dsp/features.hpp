#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/dsp/pause.hpp"
#include "voxsae/dsp/pitch.hpp"
#include "voxsae/dsp/spectral.hpp"
#include "voxsae/dsp/stft.hpp"
#include "voxsae/dsp/waveform.hpp"

namespace voxsae::dsp {

/// Named acoustic scalars; an empty optional marks a missing value.
class VocalFeatureVector {
 public:
  static const std::vector<std::string>& required_keys() {
    static const std::vector<std::string> keys = {
        "spectral_centroid", "spectral_spread", "spectral_skew", "spectral_kurtosis",
        "spectral_entropy",  "spectral_flatness", "spectral_crest", "spectral_flux",
        "mfcc_1",            "mfcc_2",           "mfcc_3",         "mfcc_4",
        "f0_mean",           "hnr_db",           "jitter_local",   "shimmer_local",
        "gne"};
    return keys;
  }

  VocalFeatureVector() {
    for (const auto& k : required_keys()) values_[k] = std::nullopt;
  }

  void set(const std::string& key, std::optional<double> v) { values_[key] = v; }
  std::optional<double> get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw InputError("unknown feature '" + key + "'");
    return it->second;
  }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::optional<double>>& values() const { return values_; }

 private:
  std::map<std::string, std::optional<double>> values_;
};

inline const std::vector<std::string>& pause_keys() {
  static const std::vector<std::string> keys = {"longest_pause_s", "pauses_over_1s", "total_nonspeech_s",
                                                "nonspeech_ratio"};
  return keys;
}

/// Fixed feature column order: vocal features then pause statistics.
inline std::vector<std::string> feature_columns(bool with_attention_flux = false) {
  auto cols = VocalFeatureVector::required_keys();
  if (with_attention_flux) cols.push_back("spectral_flux_attn");
  for (const auto& k : pause_keys()) cols.push_back(k);
  return cols;
}

struct FeatureConfig {
  FrameConfig frames{};
  std::size_t stats_smoothing_frames = 5;
  std::size_t n_mfcc = 4;
  std::size_t n_mels = 26;
  PitchConfig pitch{};
  GneConfig gne{};
  PauseConfig pause{};
  double target_rate = kDefaultSampleRate;
};

struct ExtractedFeatures {
  VocalFeatureVector vocal;
  PauseStats pause;

  /// Values in feature_columns() order.
  std::vector<std::optional<double>> row(bool with_attention_flux = false) const {
    std::vector<std::optional<double>> out;
    for (const auto& k : VocalFeatureVector::required_keys()) out.push_back(vocal.get(k));
    if (with_attention_flux) out.push_back(vocal.has("spectral_flux_attn") ? vocal.get("spectral_flux_attn") : std::nullopt);
    out.push_back(pause.longest_pause_s);
    out.push_back(static_cast<double>(pause.pauses_over_1s));
    out.push_back(pause.total_nonspeech_s);
    out.push_back(pause.nonspeech_ratio);
    return out;
  }
};

namespace detail {

struct MeanAcc {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  std::optional<double> mean() const {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

}  // namespace detail

/// Utterance-level features. Spectral shape statistics are averaged over
/// time-smoothed frames; MFCCs over non-silent frames; voice quality over
/// voiced frames. `attention`, when given on the STFT frame grid, adds
/// spectral_flux_attn.
inline ExtractedFeatures extract_features(const Waveform& input, const FeatureConfig& cfg = {},
                                          std::span<const double> attention = {}) {
  const Waveform w = input.sample_rate == cfg.target_rate ? input : resample_linear(input, cfg.target_rate);
  ExtractedFeatures out;
  const auto spectra = stft_magnitude(w, cfg.frames);
  const double bin_hz = spectra.bin_hz();

  const Matrix smoothed = smooth_frames(spectra.frames, cfg.stats_smoothing_frames);
  detail::MeanAcc centroid, spread, skew, kurt, entropy, flatness, crest;
  for (std::size_t t = 0; t < smoothed.rows(); ++t) {
    const auto s = spectral_stats(smoothed.row(t), bin_hz);
    if (!s.defined) continue;
    centroid.add(s.centroid);
    spread.add(s.spread);
    if (s.skew) skew.add(*s.skew);
    if (s.kurtosis) kurt.add(*s.kurtosis);
    entropy.add(s.entropy);
    flatness.add(s.flatness);
    crest.add(s.crest);
  }
  auto& v = out.vocal;
  v.set("spectral_centroid", centroid.mean());
  v.set("spectral_spread", spread.mean());
  v.set("spectral_skew", skew.mean());
  v.set("spectral_kurtosis", kurt.mean());
  v.set("spectral_entropy", entropy.mean());
  v.set("spectral_flatness", flatness.mean());
  v.set("spectral_crest", crest.mean());
  if (spectra.n_frames() >= 2) {
    v.set("spectral_flux", spectral_flux(spectra.frames));
    if (!attention.empty()) v.set("spectral_flux_attn", spectral_flux(spectra.frames, attention));
  } else if (!attention.empty()) {
    v.set("spectral_flux_attn", std::nullopt);
  }

  const Matrix cc = mfcc(spectra, cfg.n_mfcc, cfg.n_mels);
  std::vector<detail::MeanAcc> cacc(cfg.n_mfcc);
  for (std::size_t t = 0; t < cc.rows(); ++t) {
    const auto frame = spectra.frames.row(t);
    if (std::all_of(frame.begin(), frame.end(), [](double m) { return m == 0.0; })) continue;
    for (std::size_t k = 0; k < cfg.n_mfcc; ++k) cacc[k].add(cc(t, k));
  }
  for (std::size_t k = 0; k < std::min<std::size_t>(4, cfg.n_mfcc); ++k) {
    v.set("mfcc_" + std::to_string(k + 1), cacc[k].mean());
  }

  if (w.size() >= static_cast<std::size_t>(std::lround(cfg.pitch.frame_s * w.sample_rate))) {
    const auto track = f0_autocorrelation(w, cfg.pitch);
    detail::MeanAcc f0;
    for (std::size_t t = 0; t < track.size(); ++t) {
      if (track.voiced[t]) f0.add(track.f0_hz[t]);
    }
    v.set("f0_mean", f0.mean());
    const auto q = voice_quality(w, track, cfg.gne);
    v.set("hnr_db", q.hnr_db);
    v.set("jitter_local", q.jitter_local);
    v.set("shimmer_local", q.shimmer_local);
    v.set("gne", q.gne);
  }

  out.pause = pause_stats(w, cfg.pause);
  return out;
}

}  // namespace voxsae::dsp
