#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/dsp/fft.hpp"
#include "voxsae/dsp/stft.hpp"
#include "voxsae/dsp/waveform.hpp"

namespace voxsae::dsp {

struct PitchConfig {
  double f_min = 60.0;
  double f_max = 400.0;
  double frame_s = 0.040;
  double hop_s = 0.010;
  double voicing_threshold = 0.5;
  // Penalty per octave of lag, favouring shorter lags among near-equal peaks.
  double octave_cost = 0.01;
};

struct PitchTrack {
  std::vector<double> f0_hz;      // 0 for unvoiced frames
  std::vector<double> peak_r;     // normalized autocorrelation at the chosen lag
  std::vector<double> period;     // samples, fractional; 0 when unvoiced
  std::vector<bool> voiced;
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  double sample_rate = kDefaultSampleRate;

  std::size_t size() const noexcept { return voiced.size(); }
  std::size_t n_voiced() const { return static_cast<std::size_t>(std::count(voiced.begin(), voiced.end(), true)); }
};

namespace detail {

// Normalized cross-correlation of x[0..n) with x[lag..lag+n).
inline double nccf(std::span<const double> x, std::size_t n, std::size_t lag) {
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x[i], b = x[i + lag];
    xy += a * b;
    xx += a * a;
    yy += b * b;
  }
  const double denom = std::sqrt(xx * yy);
  return denom > 0.0 ? xy / denom : 0.0;
}

}  // namespace detail

/// Per-frame F0 from the peak of the normalized autocorrelation in the lag
/// window [sr/f_max, sr/f_min], refined by parabolic interpolation.
/// A frame is voiced iff the peak exceeds the voicing threshold. Exactly
/// equal candidate scores resolve to the longer lag.
inline PitchTrack f0_autocorrelation(const Waveform& w, const PitchConfig& cfg = {}) {
  if (!(cfg.f_min > 0.0) || !(cfg.f_max > cfg.f_min)) throw InputError("pitch: need 0 < f_min < f_max");
  const double sr = w.sample_rate;
  const auto L = frame_layout(w.size(), sr, FrameConfig{cfg.frame_s, cfg.hop_s});
  const auto lag_min = static_cast<std::size_t>(std::floor(sr / cfg.f_max));
  const auto lag_max = static_cast<std::size_t>(std::ceil(sr / cfg.f_min));
  if (L.window < 2 * lag_max) {
    throw InputError("pitch: frame of " + std::to_string(L.window) +
                     " samples cannot hold two periods of f_min");
  }
  // Correlation length shared by all lags (+1 so lag_max+1 is available for interpolation).
  const std::size_t n = L.window - lag_max - 1;

  PitchTrack tr;
  tr.frame_len = L.window;
  tr.hop = L.hop;
  tr.sample_rate = sr;
  tr.f0_hz.assign(L.n_frames, 0.0);
  tr.peak_r.assign(L.n_frames, 0.0);
  tr.period.assign(L.n_frames, 0.0);
  tr.voiced.assign(L.n_frames, false);

  std::vector<double> frame(L.window);
  std::vector<double> r(lag_max + 2, 0.0);
  for (std::size_t t = 0; t < L.n_frames; ++t) {
    const auto src = std::span<const double>(w.samples).subspan(t * L.hop, L.window);
    double mean = 0.0;
    for (double v : src) mean += v;
    mean /= static_cast<double>(L.window);
    for (std::size_t i = 0; i < L.window; ++i) frame[i] = src[i] - mean;

    for (std::size_t lag = lag_min - 1; lag <= lag_max + 1; ++lag) r[lag] = detail::nccf(frame, n, lag);

    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
      if (!(r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1])) continue;
      const double score = r[lag] - cfg.octave_cost * std::log2(static_cast<double>(lag) / lag_min);
      if (score >= best_score) {
        best_score = score;
        best = lag;
      }
    }
    if (best == 0) continue;
    const double a = r[best - 1], b = r[best], c = r[best + 1];
    const double curv = a - 2.0 * b + c;
    double shift = 0.0, peak = b;
    if (curv < 0.0) {
      shift = std::clamp(0.5 * (a - c) / curv, -0.5, 0.5);
      peak = b - 0.25 * (a - c) * shift;
    }
    tr.peak_r[t] = std::min(peak, 1.0);
    if (b > cfg.voicing_threshold) {
      tr.voiced[t] = true;
      tr.period[t] = static_cast<double>(best) + shift;
      tr.f0_hz[t] = sr / tr.period[t];
    }
  }
  return tr;
}

struct VoiceQuality {
  std::optional<double> hnr_db;
  std::optional<double> jitter_local;
  std::optional<double> shimmer_local;
  std::optional<double> gne;
};

struct GneConfig {
  double band_width_hz = 1000.0;
  double band_spacing_hz = 500.0;
  double range_lo_hz = 300.0;
  double range_hi_hz = 3400.0;
  std::size_t lpc_order = 18;
  int max_lag = 3;
};

/// Autocorrelation-method LPC via Levinson-Durbin. Returns a[0..order] with a[0] = 1.
inline std::vector<double> lpc(std::span<const double> x, std::size_t order) {
  std::vector<double> R(order + 1, 0.0);
  for (std::size_t k = 0; k <= order; ++k) {
    for (std::size_t i = k; i < x.size(); ++i) R[k] += x[i] * x[i - k];
  }
  std::vector<double> a(order + 1, 0.0);
  a[0] = 1.0;
  if (!(R[0] > 0.0)) return a;
  R[0] *= 1.0 + 1e-9;  // tiny white-noise correction for conditioning
  double err = R[0];
  std::vector<double> prev(order + 1);
  for (std::size_t i = 1; i <= order; ++i) {
    double acc = R[i];
    for (std::size_t j = 1; j < i; ++j) acc += a[j] * R[i - j];
    const double k = -acc / err;
    prev = a;
    for (std::size_t j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    err *= 1.0 - k * k;
    if (!(err > 0.0)) break;
  }
  return a;
}

/// Hilbert envelope of x restricted to [lo, hi) Hz.
inline std::vector<double> band_envelope(std::span<const double> x, double sr, double lo, double hi) {
  const std::size_t n = next_pow2(x.size());
  const auto X = rfft(x, n);
  std::vector<Complex> A(n, Complex{0.0, 0.0});
  const double bin_hz = sr / static_cast<double>(n);
  for (std::size_t k = 1; k < X.size(); ++k) {
    const double f = static_cast<double>(k) * bin_hz;
    if (f >= lo && f < hi) A[k] = 2.0 * X[k];
  }
  const auto a = fft(A, true);
  std::vector<double> env(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) env[i] = std::abs(a[i]);
  return env;
}

/// Maximum mean-removed normalized cross-correlation for lags in [-max_lag, max_lag].
inline std::optional<double> max_envelope_xcorr(std::span<const double> a, std::span<const double> b, int max_lag) {
  const auto n = static_cast<int>(a.size());
  std::optional<double> best;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    const int lo = std::max(0, -lag), hi = std::min(n, n - lag);
    if (hi - lo < 2) continue;
    double ma = 0.0, mb = 0.0;
    for (int i = lo; i < hi; ++i) {
      ma += a[i];
      mb += b[i + lag];
    }
    ma /= hi - lo;
    mb /= hi - lo;
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (int i = lo; i < hi; ++i) {
      const double da = a[i] - ma, db = b[i + lag] - mb;
      ab += da * db;
      aa += da * da;
      bb += db * db;
    }
    if (!(aa > 0.0 && bb > 0.0)) continue;
    const double c = ab / std::sqrt(aa * bb);
    if (!best || c > *best) best = c;
  }
  return best;
}

/// Glottal-to-noise excitation ratio of one frame: LPC residual, Hilbert
/// envelopes in overlapping bands, max cross-band envelope correlation.
inline std::optional<double> gne_frame(std::span<const double> frame, double sr, const GneConfig& cfg = {}) {
  const auto win = hann_window(frame.size());
  std::vector<double> xw(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) xw[i] = frame[i] * win[i];
  const auto a = lpc(xw, cfg.lpc_order);
  std::vector<double> e(frame.size(), 0.0);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    double acc = frame[i];
    for (std::size_t j = 1; j < a.size() && j <= i; ++j) acc += a[j] * frame[i - j];
    e[i] = acc;
  }
  // Drop the filter warm-up.
  const std::span<const double> resid = std::span<const double>(e).subspan(std::min(cfg.lpc_order, e.size()));

  std::vector<std::vector<double>> env;
  std::vector<double> centers;
  for (double lo = cfg.range_lo_hz; lo + cfg.band_width_hz <= cfg.range_hi_hz + 1e-9; lo += cfg.band_spacing_hz) {
    env.push_back(band_envelope(resid, sr, lo, lo + cfg.band_width_hz));
    centers.push_back(lo + cfg.band_width_hz / 2.0);
  }
  std::optional<double> best;
  for (std::size_t i = 0; i < env.size(); ++i) {
    for (std::size_t j = i + 1; j < env.size(); ++j) {
      if (centers[j] - centers[i] < cfg.band_width_hz / 2.0) continue;
      const auto c = max_envelope_xcorr(env[i], env[j], cfg.max_lag);
      if (c && (!best || *c > *best)) best = c;
    }
  }
  if (best) best = std::clamp(*best, 0.0, 1.0);
  return best;
}

namespace detail {

struct Run {
  std::size_t first, last;  // inclusive frame indices
};

inline std::vector<Run> voiced_runs(const PitchTrack& tr, std::size_t min_len) {
  std::vector<Run> runs;
  std::size_t t = 0;
  while (t < tr.size()) {
    if (!tr.voiced[t]) {
      ++t;
      continue;
    }
    std::size_t u = t;
    while (u + 1 < tr.size() && tr.voiced[u + 1]) ++u;
    if (u - t + 1 >= min_len) runs.push_back({t, u});
    t = u + 1;
  }
  return runs;
}

inline double mean_abs_diff_ratio(const std::vector<std::vector<double>>& seqs) {
  double diff = 0.0, total = 0.0;
  std::size_t n_diff = 0, n_total = 0;
  for (const auto& s : seqs) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      total += s[i];
      ++n_total;
      if (i > 0) {
        diff += std::abs(s[i] - s[i - 1]);
        ++n_diff;
      }
    }
  }
  if (n_diff == 0 || !(total > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (diff / static_cast<double>(n_diff)) / (total / static_cast<double>(n_total));
}

}  // namespace detail

/// HNR, jitter, shimmer and GNE over the voiced frames of `tr`.
/// Jitter and shimmer need at least 3 consecutive voiced frames.
inline VoiceQuality voice_quality(const Waveform& w, const PitchTrack& tr, const GneConfig& gcfg = {}) {
  VoiceQuality q;
  if (tr.n_voiced() == 0) return q;

  double hnr = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < tr.size(); ++t) {
    if (!tr.voiced[t]) continue;
    const double r = std::clamp(tr.peak_r[t], 1e-6, 1.0 - 1e-6);
    hnr += 10.0 * std::log10(r / (1.0 - r));
    ++n;
  }
  q.hnr_db = hnr / static_cast<double>(n);

  const auto runs = detail::voiced_runs(tr, 3);
  if (!runs.empty()) {
    std::vector<std::vector<double>> periods, amps;
    for (const auto& run : runs) {
      std::vector<double> p;
      for (std::size_t t = run.first; t <= run.last; ++t) p.push_back(tr.period[t] / tr.sample_rate);
      periods.push_back(std::move(p));

      // Walk the run cycle by cycle using the local period, taking each cycle's peak |x|.
      std::vector<double> a;
      const std::size_t end = std::min(w.size(), run.last * tr.hop + tr.frame_len);
      double pos = static_cast<double>(run.first * tr.hop);
      while (true) {
        const auto frame = std::min(run.last, static_cast<std::size_t>(pos) / tr.hop);
        const double period = tr.period[std::max(frame, run.first)];
        const auto lo = static_cast<std::size_t>(pos);
        const auto hi = static_cast<std::size_t>(pos + period);
        if (hi > end || period < 1.0) break;
        double peak = 0.0;
        for (std::size_t i = lo; i < hi; ++i) peak = std::max(peak, std::abs(w.samples[i]));
        a.push_back(peak);
        pos += period;
      }
      amps.push_back(std::move(a));
    }
    const double j = detail::mean_abs_diff_ratio(periods);
    const double s = detail::mean_abs_diff_ratio(amps);
    if (std::isfinite(j)) q.jitter_local = j;
    if (std::isfinite(s)) q.shimmer_local = s;
  }

  double gsum = 0.0;
  std::size_t gn = 0;
  for (std::size_t t = 0; t < tr.size(); ++t) {
    if (!tr.voiced[t]) continue;
    const auto frame = std::span<const double>(w.samples).subspan(t * tr.hop, tr.frame_len);
    if (const auto g = gne_frame(frame, tr.sample_rate, gcfg)) {
      gsum += *g;
      ++gn;
    }
  }
  if (gn > 0) q.gne = gsum / static_cast<double>(gn);
  return q;
}

}  // namespace voxsae::dsp
