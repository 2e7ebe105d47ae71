#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/core/metadata.hpp"

namespace voxsae::detector {

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  void add(bool predicted_pd, bool actual_pd) {
    if (predicted_pd && actual_pd) ++tp;
    else if (predicted_pd) ++fp;
    else if (actual_pd) ++fn;
    else ++tn;
  }
  /// F1 with PD as the positive class; undefined when the slice has no positives.
  std::optional<double> f1() const {
    if (tp + fn == 0) return std::nullopt;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  }
  std::size_t total() const { return tp + fp + tn + fn; }
};

struct EvalResult {
  Confusion overall;
  std::map<Language, Confusion> per_language;

  std::optional<double> f1() const { return overall.f1(); }
  std::optional<double> f1(Language l) const {
    const auto it = per_language.find(l);
    if (it == per_language.end()) return std::nullopt;
    return it->second.f1();
  }
};

/// Scores probabilities against labels with threshold prob >= 0.5 -> PD.
inline EvalResult score_predictions(std::span<const double> probs, std::span<const SampleMeta> metas) {
  if (probs.size() != metas.size()) throw DimensionError("evaluate: probability and metadata counts differ");
  if (probs.empty()) throw InputError("evaluate: empty dataset");
  EvalResult r;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool pred = probs[i] >= 0.5;
    const bool actual = metas[i].label == Label::PD;
    r.overall.add(pred, actual);
    r.per_language[metas[i].language].add(pred, actual);
  }
  return r;
}

}  // namespace voxsae::detector
