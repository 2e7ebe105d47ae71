#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voxsae/analysis/stats.hpp"
#include "voxsae/core/error.hpp"
#include "voxsae/io/csv.hpp"

namespace voxsae::analysis {

struct CovariateResult {
  std::optional<double> rho;
  PValue p;
  std::size_t n_subjects = 0;
};

/// Averages scores per subject, then Spearman against a per-subject covariate.
/// Samples of subjects without a covariate are ignored.
inline CovariateResult subject_covariate_corr(std::span<const double> scores, std::span<const std::string> subjects,
                                              const std::map<std::string, double>& covariate, const POptions& opt = {}) {
  if (scores.size() != subjects.size()) throw DimensionError("covariate: score count != subject count");
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!covariate.count(subjects[i])) continue;
    auto& a = acc[subjects[i]];
    a.first += scores[i];
    ++a.second;
  }
  std::vector<std::string> missing;
  for (const auto& [subj, v] : covariate) {
    if (!acc.count(subj)) missing.push_back(subj);
  }
  if (!missing.empty()) {
    std::string msg = "covariate: subjects without samples: ";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += (i ? ", " : "") + missing[i];
    throw InputError(msg);
  }
  if (acc.size() < 4) throw InputError("covariate: need at least 4 subjects, got " + std::to_string(acc.size()));
  std::vector<double> mean_score, cov;
  for (const auto& [subj, a] : acc) {
    mean_score.push_back(a.first / static_cast<double>(a.second));
    cov.push_back(covariate.at(subj));
  }
  CovariateResult r;
  r.n_subjects = acc.size();
  r.rho = spearman(mean_score, cov);
  if (r.rho) {
    POptions o = opt;
    if (o.method == PMethod::Permutation) o.method = PMethod::TApprox;
    r.p = spearman_p(mean_score, cov, *r.rho, o);
  }
  return r;
}

/// Reads `subject_id,covariate_name,value` rows for one covariate name
/// (or the only name present when `name` is empty).
inline std::map<std::string, double> read_covariates(const io::CsvTable& t, const std::string& name = "") {
  const auto ci = t.column("subject_id"), cn = t.column("covariate_name"), cv = t.column("value");
  std::string chosen = name;
  if (chosen.empty()) {
    for (const auto& row : t.rows) {
      if (chosen.empty()) chosen = row[cn];
      else if (row[cn] != chosen) throw InputError("covariate CSV holds several covariates; select one by name");
    }
  }
  std::map<std::string, double> out;
  for (const auto& row : t.rows) {
    if (row[cn] != chosen) continue;
    const auto v = io::parse_cell(row[cv], "covariate value");
    if (!v) continue;
    if (!out.emplace(row[ci], *v).second) throw InputError("covariate CSV: duplicate subject '" + row[ci] + "'");
  }
  if (out.empty()) throw InputError("covariate CSV: no rows for covariate '" + chosen + "'");
  return out;
}

}  // namespace voxsae::analysis
