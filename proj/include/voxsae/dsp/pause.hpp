#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "voxsae/dsp/stft.hpp"
#include "voxsae/dsp/waveform.hpp"

namespace voxsae::dsp {

struct PauseStats {
  double longest_pause_s = 0.0;
  std::size_t pauses_over_1s = 0;
  double total_nonspeech_s = 0.0;
  double nonspeech_ratio = 0.0;
};

struct PauseConfig {
  double energy_threshold_rel = 0.05;
  std::size_t smoothing_frames = 5;
  double long_pause_s = 1.0;
  FrameConfig frames{};
};

/// Centered running median; the window shrinks at the edges.
inline std::vector<double> median_filter(std::span<const double> x, std::size_t window) {
  std::vector<double> out(x.begin(), x.end());
  if (window <= 1) return out;
  const std::size_t half = window / 2;
  std::vector<double> buf;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(x.size(), i + window - half);
    buf.assign(x.begin() + static_cast<std::ptrdiff_t>(lo), x.begin() + static_cast<std::ptrdiff_t>(hi));
    const auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    double m = *mid;
    if (buf.size() % 2 == 0) m = 0.5 * (m + *std::max_element(buf.begin(), mid));
    out[i] = m;
  }
  return out;
}

/// Non-speech runs from smoothed frame RMS. A run of quiet frames a..b spans
/// [a*hop, b*hop + window], widened to the signal edges at either end.
inline PauseStats pause_stats(const Waveform& w, const PauseConfig& cfg = {}) {
  PauseStats ps;
  const double duration = w.duration_s();
  if (w.size() == 0) return ps;
  const auto L = frame_layout(w.size(), w.sample_rate, cfg.frames);

  if (L.n_frames == 0) {
    if (rms(w.samples) == 0.0) {
      ps.longest_pause_s = ps.total_nonspeech_s = duration;
      ps.pauses_over_1s = duration > cfg.long_pause_s ? 1 : 0;
      ps.nonspeech_ratio = 1.0;
    }
    return ps;
  }

  const auto energy = median_filter(frame_rms(w, cfg.frames), cfg.smoothing_frames);
  const double peak = *std::max_element(energy.begin(), energy.end());
  const double thr = cfg.energy_threshold_rel * peak;
  const double hop = static_cast<double>(L.hop) / w.sample_rate;
  const double win = static_cast<double>(L.window) / w.sample_rate;

  double covered_until = 0.0;
  std::size_t t = 0;
  while (t < energy.size()) {
    const bool quiet = peak == 0.0 || energy[t] < thr;
    if (!quiet) {
      ++t;
      continue;
    }
    std::size_t u = t;
    while (u + 1 < energy.size() && (peak == 0.0 || energy[u + 1] < thr)) ++u;
    const double start = t == 0 ? 0.0 : static_cast<double>(t) * hop;
    const double end = u + 1 == energy.size() ? duration : std::min(duration, static_cast<double>(u) * hop + win);
    const double len = end - start;
    ps.longest_pause_s = std::max(ps.longest_pause_s, len);
    if (len > cfg.long_pause_s) ++ps.pauses_over_1s;
    // Union of intervals: runs are ordered, so only the overlap with the previous one matters.
    ps.total_nonspeech_s += end - std::max(start, covered_until);
    covered_until = end;
    t = u + 1;
  }
  ps.total_nonspeech_s = std::min(ps.total_nonspeech_s, duration);
  ps.nonspeech_ratio = duration > 0.0 ? std::clamp(ps.total_nonspeech_s / duration, 0.0, 1.0) : 0.0;
  return ps;
}

}  // namespace voxsae::dsp
