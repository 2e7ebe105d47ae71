#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/dsp/fft.hpp"
#include "voxsae/dsp/waveform.hpp"
#include "voxsae/tensor/matrix.hpp"

namespace voxsae::dsp {

/// Analysis framing. Defaults: 25 ms Hann window, 10 ms hop.
struct FrameConfig {
  double window_s = 0.025;
  double hop_s = 0.010;
};

struct FrameLayout {
  std::size_t window = 0;  // samples
  std::size_t hop = 0;     // samples
  std::size_t fft_size = 0;
  std::size_t n_frames = 0;
};

inline FrameLayout frame_layout(std::size_t n_samples, double sample_rate, const FrameConfig& cfg) {
  if (!(cfg.hop_s > 0.0) || !(cfg.window_s > 0.0)) {
    throw InputError("framing: window and hop must be positive");
  }
  FrameLayout L;
  L.window = static_cast<std::size_t>(std::lround(cfg.window_s * sample_rate));
  L.hop = static_cast<std::size_t>(std::lround(cfg.hop_s * sample_rate));
  if (L.window < 2 || L.hop < 1) throw InputError("framing: window/hop too short for sample rate");
  L.fft_size = next_pow2(L.window);
  L.n_frames = n_samples < L.window ? 0 : 1 + (n_samples - L.window) / L.hop;
  return L;
}

/// Periodic Hann window.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

/// T x F magnitude spectra (F = fft_size/2 + 1), all entries >= 0.
struct FramedSpectra {
  Matrix frames;
  double window_s = 0.025;
  double hop_s = 0.010;
  double sample_rate = kDefaultSampleRate;
  std::size_t fft_size = 0;

  std::size_t n_frames() const { return frames.rows(); }
  std::size_t n_bins() const { return frames.cols(); }
  double bin_hz() const { return sample_rate / static_cast<double>(fft_size); }
};

inline FramedSpectra stft_magnitude(const Waveform& w, const FrameConfig& cfg = {}) {
  const FrameLayout L = frame_layout(w.size(), w.sample_rate, cfg);
  if (L.n_frames == 0) {
    throw InputError("stft: signal of " + std::to_string(w.size()) +
                     " samples is shorter than one window (" + std::to_string(L.window) + ")");
  }
  const auto window = hann_window(L.window);
  FramedSpectra out;
  out.window_s = cfg.window_s;
  out.hop_s = cfg.hop_s;
  out.sample_rate = w.sample_rate;
  out.fft_size = L.fft_size;
  out.frames = Matrix(L.n_frames, L.fft_size / 2 + 1);
  std::vector<double> buf(L.window);
  for (std::size_t t = 0; t < L.n_frames; ++t) {
    const std::size_t start = t * L.hop;
    for (std::size_t i = 0; i < L.window; ++i) buf[i] = w.samples[start + i] * window[i];
    const auto spec = rfft(buf, L.fft_size);
    auto row = out.frames.row(t);
    for (std::size_t k = 0; k < spec.size(); ++k) row[k] = std::abs(spec[k]);
  }
  return out;
}

/// Per-frame RMS on the same frame grid as stft_magnitude (rectangular window).
inline std::vector<double> frame_rms(const Waveform& w, const FrameConfig& cfg = {}) {
  const FrameLayout L = frame_layout(w.size(), w.sample_rate, cfg);
  std::vector<double> out(L.n_frames);
  for (std::size_t t = 0; t < L.n_frames; ++t) {
    out[t] = rms(std::span<const double>(w.samples).subspan(t * L.hop, L.window));
  }
  return out;
}

/// Centered moving average; the window shrinks at the edges.
inline std::vector<double> moving_average(std::span<const double> x, std::size_t window) {
  std::vector<double> out(x.size());
  if (window <= 1) {
    out.assign(x.begin(), x.end());
    return out;
  }
  const std::size_t half = window / 2;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(x.size(), i + window - half);
    double acc = 0.0;
    for (std::size_t j = lo; j < hi; ++j) acc += x[j];
    out[i] = acc / static_cast<double>(hi - lo);
  }
  return out;
}

/// Time-averaged spectra: each frame replaced by the mean of `window` frames
/// centered on it. Used as a low-variance spectral estimate for shape statistics.
inline Matrix smooth_frames(const Matrix& frames, std::size_t window) {
  Matrix out(frames.rows(), frames.cols());
  if (frames.rows() == 0) return out;
  const std::size_t half = window / 2;
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    const std::size_t lo = t >= half ? t - half : 0;
    const std::size_t hi = std::min(frames.rows(), t + window - half);
    auto dst = out.row(t);
    for (std::size_t s = lo; s < hi; ++s) {
      const auto src = frames.row(s);
      for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
    }
    const double inv = 1.0 / static_cast<double>(hi - lo);
    for (double& v : dst) v *= inv;
  }
  return out;
}

}  // namespace voxsae::dsp
