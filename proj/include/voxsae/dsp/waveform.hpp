#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "voxsae/core/error.hpp"

namespace voxsae::dsp {

inline constexpr double kDefaultSampleRate = 16000.0;

struct Waveform {
  std::vector<double> samples;
  double sample_rate = kDefaultSampleRate;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

inline double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

inline double rms(std::span<const double> x) { return std::sqrt(mean_power(x)); }

inline void clip_unit(std::vector<double>& x) {
  for (double& v : x) v = std::clamp(v, -1.0, 1.0);
}

/// Linear-interpolation resampler. Output length = round(n * target / source).
inline Waveform resample_linear(const Waveform& in, double target_rate) {
  if (!(in.sample_rate > 0.0) || !(target_rate > 0.0)) {
    throw InputError("resample: sample rates must be positive");
  }
  if (in.sample_rate == target_rate || in.samples.empty()) {
    Waveform out = in;
    out.sample_rate = target_rate;
    return out;
  }
  const double ratio = in.sample_rate / target_rate;
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(in.samples.size()) * target_rate / in.sample_rate));
  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);
  const std::size_t last = in.samples.size() - 1;
  for (std::size_t i = 0; i < n_out; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const auto i0 = std::min(static_cast<std::size_t>(pos), last);
    const std::size_t i1 = std::min(i0 + 1, last);
    const double frac = pos - static_cast<double>(i0);
    out.samples[i] = in.samples[i0] * (1.0 - frac) + in.samples[i1] * frac;
  }
  return out;
}

}  // namespace voxsae::dsp
