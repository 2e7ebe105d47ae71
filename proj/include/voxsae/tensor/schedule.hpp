#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "voxsae/core/error.hpp"

namespace voxsae {

enum class LrShape { WarmupCosine, Constant };

struct LrSchedule {
  double peak_lr = 1e-4;
  std::uint64_t warmup_steps = 64;
  std::uint64_t total_steps = 640;
  LrShape shape = LrShape::WarmupCosine;

  void validate() const {
    if (warmup_steps > total_steps) throw ConfigError("lr schedule: warmup_steps > total_steps");
    if (!(peak_lr >= 0.0)) throw ConfigError("lr schedule: peak_lr must be >= 0");
  }
};

/// Linear ramp 0 -> peak over the warm-up, then cosine decay peak -> 0 at
/// total_steps. Steps past total_steps clamp to the final value (0).
inline double lr_at(const LrSchedule& s, std::uint64_t step) {
  if (s.shape == LrShape::Constant) return s.peak_lr;
  if (step > s.total_steps) step = s.total_steps;
  if (step < s.warmup_steps) {
    return s.peak_lr * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  }
  const std::uint64_t decay_len = s.total_steps - s.warmup_steps;
  if (decay_len == 0) return s.peak_lr;
  const double progress =
      static_cast<double>(step - s.warmup_steps) / static_cast<double>(decay_len);
  return s.peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

inline LrShape parse_lr_shape(const std::string& s) {
  if (s == "warmup_cosine") return LrShape::WarmupCosine;
  if (s == "constant") return LrShape::Constant;
  throw ConfigError("unknown lr shape '" + s + "' (expected warmup_cosine|constant)");
}

inline const char* to_string(LrShape s) {
  return s == LrShape::Constant ? "constant" : "warmup_cosine";
}

}  // namespace voxsae
