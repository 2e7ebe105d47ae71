#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxsae/analysis/stats.hpp"
#include "voxsae/core/error.hpp"
#include "voxsae/dsp/stft.hpp"
#include "voxsae/io/csv.hpp"

namespace voxsae::analysis {

struct AnticorrConfig {
  std::size_t smooth_window_frames = 5;
  double active_threshold_rel = 0.05;
  std::size_t max_lag_frames = 0;

  void validate() const {
    if (smooth_window_frames < 1) throw ConfigError("anticorr: smooth window must be >= 1");
    if (!(active_threshold_rel > 0.0 && active_threshold_rel < 1.0)) throw ConfigError("anticorr: threshold must be in (0,1)");
  }
};

struct XcorrResult {
  std::optional<double> lag0;                 // undefined when either binary series is constant
  std::vector<std::optional<double>> by_lag;  // lags -max_lag..max_lag (empty when max_lag = 0)
  std::vector<int> attention_active, energy_active;
};

/// 1 where x > rel * max(x).
inline std::vector<int> binarize_rel(std::span<const double> x, double rel) {
  const double mx = x.empty() ? 0.0 : *std::max_element(x.begin(), x.end());
  std::vector<int> b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) b[i] = x[i] > rel * mx ? 1 : 0;
  return b;
}

/// Pearson correlation of a[t] with b[t + lag] over the overlap.
inline std::optional<double> lagged_pearson(std::span<const int> a, std::span<const int> b, long lag) {
  std::vector<double> x, y;
  const long n = static_cast<long>(a.size());
  for (long t = 0; t < n; ++t) {
    const long u = t + lag;
    if (u < 0 || u >= n) continue;
    x.push_back(a[static_cast<std::size_t>(t)]);
    y.push_back(b[static_cast<std::size_t>(u)]);
  }
  return pearson(x, y);
}

/// Moving-average smoothing, binarization at a fraction of each signal's max,
/// then Pearson correlation of the binary series (lag 0, plus an optional sweep).
inline XcorrResult attention_energy_xcorr(std::span<const double> attention, std::span<const double> energy,
                                          const AnticorrConfig& cfg = {}) {
  cfg.validate();
  if (attention.size() != energy.size()) {
    throw InputError("attention_energy_xcorr: attention has " + std::to_string(attention.size()) +
                     " frames, energy has " + std::to_string(energy.size()));
  }
  if (attention.size() < cfg.smooth_window_frames) throw InputError("attention_energy_xcorr: fewer frames than the smoothing window");
  XcorrResult r;
  r.attention_active = binarize_rel(dsp::moving_average(attention, cfg.smooth_window_frames), cfg.active_threshold_rel);
  r.energy_active = binarize_rel(dsp::moving_average(energy, cfg.smooth_window_frames), cfg.active_threshold_rel);
  r.lag0 = lagged_pearson(r.attention_active, r.energy_active, 0);
  if (cfg.max_lag_frames > 0) {
    const long L = static_cast<long>(cfg.max_lag_frames);
    for (long lag = -L; lag <= L; ++lag) r.by_lag.push_back(lagged_pearson(r.attention_active, r.energy_active, lag));
  }
  return r;
}

/// Per-sample trace file: frame,attention,energy.
inline std::string trace_csv(std::span<const double> attention, std::span<const double> energy) {
  if (attention.size() != energy.size()) throw DimensionError("trace: attention and energy lengths differ");
  io::CsvWriter w({"frame", "attention", "energy"});
  for (std::size_t t = 0; t < attention.size(); ++t) {
    w.row_strings({std::to_string(t), io::format_double(attention[t]), io::format_double(energy[t])});
  }
  return w.str();
}

struct Trace {
  std::vector<double> attention, energy;
};

inline Trace read_trace(const io::CsvTable& t, const std::string& name = "trace") {
  for (const char* c : {"frame", "attention", "energy"}) {
    if (!t.has_column(c)) throw InputError(name + ": missing column '" + std::string(c) + "'");
  }
  Trace out;
  const std::size_t fc = t.column("frame"), ac = t.column("attention"), ec = t.column("energy");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string where = name + ":" + std::to_string(r + 2);
    if (t.rows[r][fc] != std::to_string(r)) throw InputError(where + ": frames must be 0,1,2,... in order");
    const auto a = io::parse_cell(t.rows[r][ac], where), e = io::parse_cell(t.rows[r][ec], where);
    if (!a || !e) throw InputError(where + ": empty attention or energy");
    out.attention.push_back(*a);
    out.energy.push_back(*e);
  }
  return out;
}

}  // namespace voxsae::analysis
