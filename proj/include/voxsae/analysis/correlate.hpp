#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxsae/analysis/stats.hpp"
#include "voxsae/core/error.hpp"
#include "voxsae/core/rng.hpp"
#include "voxsae/io/csv.hpp"
#include "voxsae/tensor/matrix.hpp"

namespace voxsae::analysis {

/// One sample per speaker, picked uniformly within each speaker. Speakers are
/// visited in sorted id order; the returned row indices are ascending.
inline std::vector<std::size_t> per_speaker_subsample(std::span<const std::string> speaker_ids, Rng& rng) {
  std::map<std::string, std::vector<std::size_t>> by_speaker;
  for (std::size_t i = 0; i < speaker_ids.size(); ++i) by_speaker[speaker_ids[i]].push_back(i);
  std::vector<std::size_t> out;
  for (const auto& [spk, rows] : by_speaker) out.push_back(rows[rng.uniform_index(rows.size())]);
  std::sort(out.begin(), out.end());
  return out;
}

/// Samples x named feature columns; missing cells are empty optionals.
struct FeatureMatrix {
  std::vector<std::string> sample_ids;
  std::vector<std::string> speaker_ids;
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> columns;  // one per name, length = samples

  std::size_t n_samples() const { return sample_ids.size(); }
  void validate() const {
    if (speaker_ids.size() != sample_ids.size()) throw DimensionError("feature matrix: speaker ids misaligned");
    if (columns.size() != names.size()) throw DimensionError("feature matrix: column count != name count");
    std::map<std::string, int> seen;
    for (const auto& n : names) {
      if (seen[n]++) throw InputError("feature matrix: duplicate column '" + n + "'");
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c].size() != sample_ids.size()) throw DimensionError("feature matrix: column '" + names[c] + "' has wrong length");
    }
  }
};

inline const std::vector<std::string>& metadata_columns() {
  static const std::vector<std::string> cols = {"sample_id", "speaker_id", "label", "language", "sex"};
  return cols;
}

/// Feature CSV -> FeatureMatrix: sample_id and speaker_id are required, the
/// remaining metadata columns are dropped and every other column is numeric.
inline FeatureMatrix feature_matrix_from_csv(const io::CsvTable& t, const std::string& name = "features") {
  for (const char* c : {"sample_id", "speaker_id"}) {
    if (!t.has_column(c)) throw InputError(name + ": missing column '" + std::string(c) + "'");
  }
  FeatureMatrix fm;
  const std::size_t id_col = t.column("sample_id"), spk_col = t.column("speaker_id");
  for (const auto& row : t.rows) {
    fm.sample_ids.push_back(row[id_col]);
    fm.speaker_ids.push_back(row[spk_col]);
  }
  const auto& meta = metadata_columns();
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (std::find(meta.begin(), meta.end(), t.header[c]) != meta.end()) continue;
    fm.names.push_back(t.header[c]);
    std::vector<std::optional<double>> col;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      col.push_back(io::parse_cell(t.rows[r][c], name + ":" + std::to_string(r + 2) + " column " + t.header[c]));
    }
    fm.columns.push_back(std::move(col));
  }
  fm.validate();
  return fm;
}

struct ReportRow {
  std::size_t entry = 0;
  std::string feature;
  double rho = 0.0;
  double p_raw = 1.0;
  double p_adj = 1.0;
  std::size_t n_used = 0;
  std::optional<double> prediction_rho;
};

struct SkippedTest {
  std::size_t entry = 0;
  std::string feature;  // empty when the whole entry was skipped
  std::string reason;
};

struct CorrelationReport {
  std::vector<ReportRow> rows;
  std::vector<SkippedTest> skipped;
  std::uint64_t seed = 0;
  std::size_t total_tests = 0;  // m = K x features
  std::vector<std::size_t> subsample;
};

struct CorrelateOptions {
  POptions p{};
  bool subsample_per_speaker = true;
};

/// Rows of `activations` (ids `act_ids`) aligned to the feature matrix by
/// sample id. Any id present on one side only is an input error.
inline std::vector<std::size_t> align_rows(std::span<const std::string> act_ids, const FeatureMatrix& fm) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < act_ids.size(); ++i) {
    if (!pos.emplace(act_ids[i], i).second) throw InputError("duplicate activation id '" + act_ids[i] + "'");
  }
  std::vector<std::string> offenders;
  std::vector<std::size_t> map(fm.n_samples());
  std::map<std::string, bool> used;
  for (std::size_t r = 0; r < fm.n_samples(); ++r) {
    const auto it = pos.find(fm.sample_ids[r]);
    if (it == pos.end()) {
      offenders.push_back(fm.sample_ids[r] + " (features only)");
    } else {
      map[r] = it->second;
      used[it->first] = true;
    }
  }
  for (const auto& id : act_ids) {
    if (!used.count(id)) offenders.push_back(id + " (activations only)");
  }
  if (!offenders.empty()) {
    std::string msg = "misaligned sample ids: ";
    for (std::size_t i = 0; i < offenders.size() && i < 10; ++i) msg += (i ? ", " : "") + offenders[i];
    if (offenders.size() > 10) msg += ", ... (" + std::to_string(offenders.size()) + " total)";
    throw InputError(msg);
  }
  return map;
}

/// Spearman grid between every dictionary entry and every feature on a
/// per-speaker subsample, Bonferroni-adjusted over the full grid. Also
/// correlates each entry with the model prediction on the same subsample.
inline CorrelationReport correlate_dictionary(const Matrix& activations, std::span<const std::string> act_ids,
                                              std::span<const double> predictions, const FeatureMatrix& fm,
                                              std::uint64_t seed, const CorrelateOptions& opt = {}) {
  fm.validate();
  if (activations.rows() != act_ids.size()) throw DimensionError("correlate: activation rows != id count");
  if (!predictions.empty() && predictions.size() != act_ids.size()) throw DimensionError("correlate: prediction count != id count");
  if (activations.cols() == 0 || fm.names.empty()) throw InputError("correlate: need at least one entry and one feature");
  const auto act_row = align_rows(act_ids, fm);

  CorrelationReport rep;
  rep.seed = seed;
  const std::size_t K = activations.cols();
  rep.total_tests = K * fm.names.size();
  Rng rng(seed);
  if (opt.subsample_per_speaker) {
    rep.subsample = per_speaker_subsample(fm.speaker_ids, rng);
  } else {
    rep.subsample.resize(fm.n_samples());
    std::iota(rep.subsample.begin(), rep.subsample.end(), 0);
  }
  Rng perm_rng(mix_seed(seed, 101));

  for (std::size_t k = 0; k < K; ++k) {
    std::vector<std::optional<double>> act;
    std::vector<double> act_plain, pred;
    for (std::size_t r : rep.subsample) {
      act.push_back(activations(act_row[r], k));
      act_plain.push_back(activations(act_row[r], k));
      if (!predictions.empty()) pred.push_back(predictions[act_row[r]]);
    }
    const bool constant = std::all_of(act_plain.begin(), act_plain.end(), [&](double v) { return v == act_plain[0]; });
    if (constant) {
      rep.skipped.push_back({k, "", "zero activation variance on the subsample"});
      continue;
    }
    std::optional<double> pred_rho;
    if (!pred.empty()) pred_rho = spearman(act_plain, pred);
    for (std::size_t c = 0; c < fm.names.size(); ++c) {
      std::vector<std::optional<double>> feat;
      for (std::size_t r : rep.subsample) feat.push_back(fm.columns[c][r]);
      const auto ps = drop_missing(act, feat);
      const auto rho = spearman(ps.x, ps.y);
      if (!rho || ps.x.size() < 4) {
        rep.skipped.push_back({k, fm.names[c], ps.x.size() < 4 ? "fewer than 4 complete pairs" : "zero variance"});
        continue;
      }
      const auto pv = spearman_p(ps.x, ps.y, *rho, opt.p, &perm_rng);
      rep.rows.push_back({k, fm.names[c], *rho, pv.p, bonferroni(pv.p, rep.total_tests), ps.x.size(), pred_rho});
    }
  }
  std::sort(rep.rows.begin(), rep.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (std::abs(a.rho) != std::abs(b.rho)) return std::abs(a.rho) > std::abs(b.rho);
    if (a.entry != b.entry) return a.entry < b.entry;
    return a.feature < b.feature;
  });
  return rep;
}

inline std::string report_csv(const CorrelationReport& rep) {
  io::CsvWriter w({"entry", "feature", "rho", "p_raw", "p_adj", "n_used", "prediction_rho", "seed"});
  for (const auto& r : rep.rows) {
    w.row_strings({std::to_string(r.entry), r.feature, io::format_double(r.rho), io::format_double(r.p_raw),
                   io::format_double(r.p_adj), std::to_string(r.n_used), io::format_optional(r.prediction_rho),
                   std::to_string(rep.seed)});
  }
  return w.str();
}

}  // namespace voxsae::analysis
