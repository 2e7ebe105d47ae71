#pragma once

#include <cmath>
#include <map>
#include <string>
#include <numbers>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/core/rng.hpp"
#include "voxsae/dsp/augment.hpp"
#include "voxsae/dsp/waveform.hpp"

namespace voxsae::synth {

using dsp::Waveform;

inline std::size_t n_samples(double duration_s, double sr) {
  return static_cast<std::size_t>(std::lround(duration_s * sr));
}

inline Waveform silence(double duration_s, double sr = dsp::kDefaultSampleRate) {
  return {std::vector<double>(n_samples(duration_s, sr), 0.0), sr};
}

inline Waveform sine(double freq_hz, double duration_s, double amplitude = 0.8,
                     double sr = dsp::kDefaultSampleRate, double phase = 0.0) {
  Waveform w{std::vector<double>(n_samples(duration_s, sr)), sr};
  for (std::size_t i = 0; i < w.size(); ++i) {
    w.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / sr + phase);
  }
  return w;
}

/// Sine with amplitude 1 + depth*sin(2 pi mod_hz t), scaled by `amplitude`.
inline Waveform am_sine(double freq_hz, double duration_s, double depth, double mod_hz, double amplitude = 0.6,
                        double sr = dsp::kDefaultSampleRate) {
  Waveform w{std::vector<double>(n_samples(duration_s, sr)), sr};
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double t = static_cast<double>(i) / sr;
    const double env = 1.0 + depth * std::sin(2.0 * std::numbers::pi * mod_hz * t);
    w.samples[i] = amplitude * env * std::sin(2.0 * std::numbers::pi * freq_hz * t);
  }
  return w;
}

inline Waveform white_noise(double duration_s, double stddev, Rng& rng, double sr = dsp::kDefaultSampleRate) {
  Waveform w{std::vector<double>(n_samples(duration_s, sr)), sr};
  for (double& v : w.samples) v = stddev * rng.normal();
  dsp::clip_unit(w.samples);
  return w;
}

/// Sine mixed with white noise at a power-based SNR.
inline Waveform sine_plus_noise(double freq_hz, double duration_s, double snr_db, Rng& rng,
                                double amplitude = 0.3, double sr = dsp::kDefaultSampleRate) {
  const Waveform s = sine(freq_hz, duration_s, amplitude, sr);
  std::vector<double> noise(s.size());
  for (double& v : noise) v = rng.normal();
  Waveform out{dsp::mix_at_snr(s.samples, noise, snr_db), sr};
  dsp::clip_unit(out.samples);
  return out;
}

/// tone (tone_s) + silence (gap_s) + tone (tone_s).
inline Waveform tone_gap_tone(double freq_hz, double tone_s, double gap_s, double amplitude = 0.8,
                              double sr = dsp::kDefaultSampleRate) {
  Waveform a = sine(freq_hz, tone_s, amplitude, sr);
  const std::size_t gap = n_samples(gap_s, sr);
  Waveform out{a.samples, sr};
  out.samples.insert(out.samples.end(), gap, 0.0);
  out.samples.insert(out.samples.end(), a.samples.begin(), a.samples.end());
  return out;
}

using SignalParams = std::map<std::string, double>;

/// Named test signal at 16 kHz. Unlisted params take the defaults below.
inline Waveform test_signal(const std::string& kind, const SignalParams& params, std::uint64_t seed) {
  auto get = [&](const char* k, double def) {
    const auto it = params.find(k);
    return it == params.end() ? def : it->second;
  };
  const double sr = dsp::kDefaultSampleRate;
  const double f = get("freq_hz", 100.0), dur = get("duration_s", 1.0);
  Rng rng(seed);
  if (kind == "sine") return sine(f, dur, get("amplitude", 0.8), sr);
  if (kind == "am_sine") return am_sine(f, dur, get("depth", 0.2), get("mod_hz", 5.0), get("amplitude", 0.6), sr);
  if (kind == "noise") return white_noise(dur, get("stddev", 0.1), rng, sr);
  if (kind == "tone_gap_tone") return tone_gap_tone(f, get("tone_s", 1.0), get("gap_s", 1.5), get("amplitude", 0.8), sr);
  if (kind == "sine_plus_noise") return sine_plus_noise(f, dur, get("snr_db", 0.0), rng, get("amplitude", 0.3), sr);
  throw InputError("unknown test signal kind '" + kind + "'");
}

}  // namespace voxsae::synth
