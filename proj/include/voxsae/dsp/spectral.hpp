#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/dsp/stft.hpp"
#include "voxsae/tensor/matrix.hpp"

namespace voxsae::dsp {

inline constexpr double kLogFloor = 1e-10;

/// Shape statistics of one magnitude frame, treating normalized magnitudes as
/// a distribution over bin frequencies. `defined` is false for an all-zero frame.
struct SpectralStats {
  bool defined = false;
  double centroid = 0.0;  // Hz
  double spread = 0.0;    // Hz
  std::optional<double> skew;      // missing when spread == 0
  std::optional<double> kurtosis;  // missing when spread == 0
  double entropy = 0.0;   // normalized by log(F)
  double flatness = 0.0;  // geometric / arithmetic mean
  double crest = 0.0;     // max / mean
};

inline SpectralStats spectral_stats(std::span<const double> mag, double bin_hz) {
  SpectralStats s;
  const std::size_t F = mag.size();
  double total = 0.0, peak = 0.0;
  bool any_zero = false;
  for (double m : mag) {
    if (m < 0.0) throw InputError("spectral_stats: negative magnitude");
    total += m;
    peak = std::max(peak, m);
    any_zero = any_zero || m == 0.0;
  }
  if (F < 2 || !(total > 0.0)) return s;
  s.defined = true;

  double mu = 0.0;
  for (std::size_t k = 0; k < F; ++k) mu += static_cast<double>(k) * bin_hz * (mag[k] / total);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, h = 0.0, log_sum = 0.0;
  for (std::size_t k = 0; k < F; ++k) {
    const double p = mag[k] / total;
    const double d = static_cast<double>(k) * bin_hz - mu;
    m2 += p * d * d;
    m3 += p * d * d * d;
    m4 += p * d * d * d * d;
    if (p > 0.0) h -= p * std::log(std::max(p, kLogFloor));
    if (!any_zero) log_sum += std::log(mag[k]);
  }
  const double mean = total / static_cast<double>(F);
  s.centroid = mu;
  s.spread = std::sqrt(m2);
  if (s.spread > 0.0) {
    s.skew = m3 / (s.spread * s.spread * s.spread);
    s.kurtosis = m4 / (m2 * m2);
  }
  s.entropy = h / std::log(static_cast<double>(F));
  const double geo = any_zero ? 0.0 : std::exp(log_sum / static_cast<double>(F));
  s.flatness = std::clamp(geo / mean, 0.0, 1.0);
  s.crest = peak / mean;
  return s;
}

/// Attention-weighted spectral flux:
///   Phi = (1/T) * sum_{t=0}^{T-2} (A_t / F) * sum_f (S[t+1,f] - S[t,f])^2
/// Weight A_t pairs with the difference S[t+1]-S[t]. A length-T attention
/// vector uses its first T-1 entries; without attention A_t = 1.
inline double spectral_flux(const Matrix& spectra, std::span<const double> attention = {}) {
  const std::size_t T = spectra.rows();
  const std::size_t F = spectra.cols();
  if (T < 2) throw InputError("spectral_flux: need at least 2 frames, got " + std::to_string(T));
  if (!attention.empty() && attention.size() != T && attention.size() != T - 1) {
    throw InputError("spectral_flux: attention length " + std::to_string(attention.size()) +
                     " does not match " + std::to_string(T) + " frames");
  }
  for (double a : attention) {
    if (!(a >= 0.0)) throw InputError("spectral_flux: attention weights must be >= 0");
  }
  double phi = 0.0;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    const auto a = spectra.row(t);
    const auto b = spectra.row(t + 1);
    double sq = 0.0;
    for (std::size_t f = 0; f < F; ++f) {
      const double d = b[f] - a[f];
      sq += d * d;
    }
    const double weight = attention.empty() ? 1.0 : attention[t];
    phi += weight / static_cast<double>(F) * sq;
  }
  return phi / static_cast<double>(T);
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular HTK-style mel filters evaluated at bin frequencies (n_mels x F).
/// A filter narrower than the bin spacing gets unit weight on its nearest bin.
inline Matrix mel_filterbank(std::size_t n_mels, std::size_t fft_size, double sample_rate,
                             double fmin = 0.0, double fmax = -1.0) {
  if (fmax <= 0.0) fmax = sample_rate / 2.0;
  const std::size_t F = fft_size / 2 + 1;
  const double bin_hz = sample_rate / static_cast<double>(fft_size);
  const double mel_lo = hz_to_mel(fmin), mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(n_mels + 1));
  }
  Matrix fb(n_mels, F);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    bool any = false;
    for (std::size_t k = 0; k < F; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > lo && f <= center) w = (f - lo) / (center - lo);
      else if (f > center && f < hi) w = (hi - f) / (hi - center);
      fb(m, k) = w;
      any = any || w > 0.0;
    }
    if (!any) {
      const auto k = std::min(F - 1, static_cast<std::size_t>(std::lround(center / bin_hz)));
      fb(m, k) = 1.0;
    }
  }
  return fb;
}

/// log(max(sum_k fb[m,k] * |S[t,k]|^2, floor)) per frame and band.
inline Matrix log_mel_energies(const Matrix& spectra, const Matrix& fb) {
  if (fb.cols() != spectra.cols()) {
    throw DimensionError("log_mel: filterbank " + fb.shape_string() + " vs spectra " +
                         spectra.shape_string());
  }
  Matrix out(spectra.rows(), fb.rows());
  std::vector<double> power(spectra.cols());
  for (std::size_t t = 0; t < spectra.rows(); ++t) {
    const auto s = spectra.row(t);
    for (std::size_t k = 0; k < s.size(); ++k) power[k] = s[k] * s[k];
    for (std::size_t m = 0; m < fb.rows(); ++m) {
      out(t, m) = std::log(std::max(dot(fb.row(m), power), kLogFloor));
    }
  }
  return out;
}

/// Orthonormal DCT-II coefficient k of x.
inline double dct2_coeff(std::span<const double> x, std::size_t k) {
  const double M = static_cast<double>(x.size());
  double acc = 0.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    acc += x[m] * std::cos(std::numbers::pi * static_cast<double>(k) * (static_cast<double>(m) + 0.5) / M);
  }
  return acc * std::sqrt((k == 0 ? 1.0 : 2.0) / M);
}

/// Mel cepstra 1..n_coeffs (c0 excluded), one row per frame.
inline Matrix mfcc(const FramedSpectra& spectra, std::size_t n_coeffs = 4, std::size_t n_mels = 26) {
  if (spectra.n_bins() < n_mels) {
    throw InputError("mfcc: " + std::to_string(spectra.n_bins()) + " bins < " +
                     std::to_string(n_mels) + " mel bands");
  }
  const Matrix fb = mel_filterbank(n_mels, spectra.fft_size, spectra.sample_rate);
  const Matrix logmel = log_mel_energies(spectra.frames, fb);
  Matrix out(logmel.rows(), n_coeffs);
  for (std::size_t t = 0; t < logmel.rows(); ++t) {
    for (std::size_t k = 1; k <= n_coeffs; ++k) out(t, k - 1) = dct2_coeff(logmel.row(t), k);
  }
  return out;
}

}  // namespace voxsae::dsp
