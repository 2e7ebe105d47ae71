#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <vector>

#include "voxsae/analysis/attention.hpp"
#include "voxsae/analysis/correlate.hpp"
#include "voxsae/analysis/covariate.hpp"
#include "voxsae/analysis/stats.hpp"
#include "voxsae/core/rng.hpp"

using namespace voxsae;
using namespace voxsae::analysis;

namespace {

// O(n^2) rank oracle: 1 + #smaller + (#equal others)/2.
std::vector<double> brute_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0.0, eq = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) less += 1.0;
      else if (x[j] == x[i] && j != i) eq += 1.0;
    }
    r[i] = 1.0 + less + eq / 2.0;
  }
  return r;
}

double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto a = brute_ranks(x), b = brute_ranks(y);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n, mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb, double whole,
               double eps, int depth) {
  const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm), right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps) return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

// Two-sided t-test p by integrating the Student-t density from 0 to |t|.
double t_two_sided_oracle(double t, double dof) {
  const double c = std::exp(std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0)) / std::sqrt(dof * std::numbers::pi);
  auto pdf = [&](double u) { return c * std::pow(1.0 + u * u / dof, -(dof + 1.0) / 2.0); };
  const double a = 0.0, b = std::abs(t);
  const double fa = pdf(a), fb = pdf(b), fm = pdf(0.5 * (a + b));
  const double half = simpson(pdf, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 1e-13, 50);
  return 1.0 - 2.0 * half;
}

std::vector<double> random_vec(std::size_t n, Rng& rng, bool ties) {
  std::vector<double> v(n);
  for (double& x : v) x = ties ? static_cast<double>(rng.uniform_index(5)) : rng.normal();
  return v;
}

FeatureMatrix feature_matrix(const std::vector<std::string>& ids, const std::vector<std::string>& spk,
                             const std::map<std::string, std::vector<double>>& cols) {
  FeatureMatrix fm;
  fm.sample_ids = ids;
  fm.speaker_ids = spk;
  for (const auto& [name, v] : cols) {
    fm.names.push_back(name);
    std::vector<std::optional<double>> c(v.begin(), v.end());
    fm.columns.push_back(c);
  }
  return fm;
}

}  // namespace

TEST(Spearman, MonotoneIdentities) {
  const std::vector<double> x{0.3, 1.5, -2.0, 4.0, 0.9};
  std::vector<double> y, z;
  for (double v : x) {
    y.push_back(std::exp(v));
    z.push_back(-v);
  }
  EXPECT_DOUBLE_EQ(*spearman(x, y), 1.0);
  EXPECT_DOUBLE_EQ(*spearman(x, z), -1.0);
}

TEST(Spearman, TiedHandCaseMatchesBruteForce) {
  const std::vector<double> x{1, 2, 2, 4}, y{10, 20, 30, 40};
  EXPECT_EQ(average_ranks(x), (std::vector<double>{1, 2.5, 2.5, 4}));
  EXPECT_NEAR(*spearman(x, y), brute_spearman(x, y), 1e-12);
  EXPECT_NEAR(*spearman(x, y), 0.9486832980505138, 1e-12);
}

TEST(Spearman, MatchesBruteForceOracleOnRandomVectors) {
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + rng.uniform_index(40);
    const bool ties = trial % 2 == 0;
    const auto x = random_vec(n, rng, ties), y = random_vec(n, rng, ties);
    const auto r = spearman(x, y);
    const auto rx = brute_ranks(x), ry = brute_ranks(y);
    const bool constant = std::all_of(rx.begin(), rx.end(), [&](double v) { return v == rx[0]; }) ||
                          std::all_of(ry.begin(), ry.end(), [&](double v) { return v == ry[0]; });
    if (constant) {
      EXPECT_FALSE(r.has_value());
      continue;
    }
    ASSERT_TRUE(r.has_value());
    EXPECT_NEAR(*r, brute_spearman(x, y), 1e-12);
  }
}

TEST(Spearman, UndefinedCasesAreFlagged) {
  EXPECT_FALSE(spearman(std::vector<double>{1, 2}, std::vector<double>{3, 4}).has_value());
  EXPECT_FALSE(spearman(std::vector<double>{1, 1, 1, 1}, std::vector<double>{1, 2, 3, 4}).has_value());
  EXPECT_THROW(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), DimensionError);
}

TEST(Spearman, RankInvarianceUnderMonotoneTransforms) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_vec(20, rng, trial % 3 == 0), y = random_vec(20, rng, false);
    std::vector<double> fx, gy;
    for (double v : x) fx.push_back(std::atan(v) * 3.0 + 7.0);
    for (double v : y) gy.push_back(v * v * v);
    const auto a = spearman(x, y), b = spearman(fx, gy);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) {
      EXPECT_NEAR(*a, *b, 1e-12);
    }
  }
}

TEST(SpearmanPValue, TApproximationCases) {
  EXPECT_DOUBLE_EQ(spearman_pvalue(0.0, 30).p, 1.0);
  const auto one = spearman_pvalue(1.0, 30);
  EXPECT_EQ(one.p, 0.0);
  EXPECT_TRUE(one.exact);
  const double t = 0.8 * std::sqrt(28.0 / (1.0 - 0.64));
  EXPECT_NEAR(spearman_pvalue(0.8, 30).p, t_two_sided_oracle(t, 28.0), 1e-6);
  EXPECT_NEAR(spearman_pvalue(-0.8, 30).p, spearman_pvalue(0.8, 30).p, 1e-15);
  EXPECT_THROW(spearman_pvalue(0.5, 3), InputError);
}

TEST(SpearmanPValue, TApproximationMatchesQuadratureAcrossGrid) {
  for (std::size_t n : {4u, 10u, 32u, 100u}) {
    for (double rho : {0.05, 0.3, 0.6, 0.9, 0.99}) {
      const double dof = static_cast<double>(n - 2);
      const double t = rho * std::sqrt(dof / (1.0 - rho * rho));
      EXPECT_NEAR(spearman_pvalue(rho, n).p, t_two_sided_oracle(t, dof), 1e-6) << n << " " << rho;
    }
  }
}

TEST(SpearmanPValue, EdgeworthTracksExactNullAtTen) {
  // Exact null of S = sum d^2 over all 10! permutations.
  const int n = 10;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::map<int, double> count;
  double total = 0.0;
  do {
    int s = 0;
    for (int i = 0; i < n; ++i) s += (perm[i] - i) * (perm[i] - i);
    count[s] += 1.0;
    total += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double n3 = n * (n * n - 1.0);
  for (int s : {20, 40, 60, 80, 100, 120}) {
    double le = 0.0;
    for (const auto& [k, c] : count) {
      if (k <= s) le += c;
    }
    const double exact_two_sided = std::min(1.0, 2.0 * le / total);
    const double rho = 1.0 - 6.0 * s / n3;
    const double p = spearman_pvalue_edgeworth(rho, n).p;
    EXPECT_NEAR(p, exact_two_sided, 0.005) << "S = " << s;
    EXPECT_LT(std::abs(p - exact_two_sided), std::abs(spearman_pvalue(rho, n).p - exact_two_sided) + 0.005);
  }
}

TEST(SpearmanPValue, PermutationAgreesWithTApproximationAtModerateN) {
  Rng rng(9);
  std::vector<double> x(30), y(30);
  for (std::size_t i = 0; i < 30; ++i) {
    x[i] = rng.normal();
    y[i] = 0.5 * x[i] + rng.normal();
  }
  const double rho = *spearman(x, y);
  Rng prng(1);
  const auto perm = spearman_pvalue_permutation(x, y, 20000, prng);
  EXPECT_NEAR(perm.p, spearman_pvalue(rho, 30).p, 0.01);
}

TEST(SpearmanPValue, AutoChoosesByTiesAndSize) {
  Rng rng(2);
  const auto x = random_vec(12, rng, false), y = random_vec(12, rng, false);
  const double rho = *spearman(x, y);
  const POptions autop{PMethod::Auto};
  EXPECT_EQ(spearman_p(x, y, rho, {}).p, spearman_pvalue(rho, 12).p);  // default is the t-approximation
  EXPECT_EQ(spearman_p(x, y, rho, autop).p, spearman_pvalue_edgeworth(rho, 12).p);
  auto xt = x;
  xt[1] = xt[0];
  const double rt = *spearman(xt, y);
  EXPECT_EQ(spearman_p(xt, y, rt, autop).p, spearman_pvalue(rt, 12).p);
  EXPECT_EQ(parse_pmethod("t"), PMethod::TApprox);
  EXPECT_THROW(parse_pmethod("magic"), ConfigError);
}

TEST(Bonferroni, Cases) {
  EXPECT_DOUBLE_EQ(bonferroni(1e-25, 2112), 2.112e-22);
  EXPECT_LT(bonferroni(1e-25, 2112), 1e-20);
  EXPECT_DOUBLE_EQ(bonferroni(0.01, 1), 0.01);
  EXPECT_DOUBLE_EQ(bonferroni(0.01, 200), 1.0);
  EXPECT_THROW(bonferroni(0.5, 0), InputError);
  double prev = 0.0;
  for (double p = 0.0; p <= 1.0; p += 0.01) {
    const double a = bonferroni(p, 7);
    EXPECT_GE(a, prev);
    EXPECT_LE(a, 1.0);
    EXPECT_GE(bonferroni(p, 8), a);
    prev = a;
  }
}

TEST(Subsample, OneSamplePerSpeaker) {
  const std::vector<std::string> single{"c", "a", "b"};
  Rng rng(1);
  EXPECT_EQ(per_speaker_subsample(single, rng), (std::vector<std::size_t>{0, 1, 2}));
  std::vector<std::string> spk;
  for (int s = 0; s < 32; ++s) {
    for (int k = 0; k < 3; ++k) spk.push_back("spk" + std::to_string(s));
  }
  const auto sub = per_speaker_subsample(spk, rng);
  EXPECT_EQ(sub.size(), 32u);
  std::map<std::string, int> seen;
  for (auto i : sub) ++seen[spk[i]];
  for (const auto& [s, c] : seen) EXPECT_EQ(c, 1);
  Rng a(5), b(5);
  EXPECT_EQ(per_speaker_subsample(spk, a), per_speaker_subsample(spk, b));
}

TEST(Subsample, TwoSampleSpeakerIsFair) {
  const std::vector<std::string> spk{"x", "x", "y"};
  Rng rng(3);
  int first = 0;
  for (int i = 0; i < 1000; ++i) first += per_speaker_subsample(spk, rng)[0] == 0 ? 1 : 0;
  EXPECT_NEAR(first / 1000.0, 0.5, 0.05);
}

TEST(CorrelateDictionary, PlantedIdentityTopsReport) {
  Rng rng(4);
  const std::size_t n = 40, K = 3;
  Matrix act(n, K);
  for (double& v : act.data()) v = rng.normal();
  std::vector<std::string> ids, spk;
  std::vector<double> copy, noise, pred;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("s" + std::to_string(i));
    spk.push_back("p" + std::to_string(i / 2));
    copy.push_back(act(i, 1));
    noise.push_back(rng.normal());
    pred.push_back(rng.uniform());
  }
  const auto fm = feature_matrix(ids, spk, {{"copy", copy}, {"noise", noise}});
  const auto rep = correlate_dictionary(act, ids, pred, fm, 11);
  EXPECT_EQ(rep.total_tests, 6u);
  EXPECT_EQ(rep.subsample.size(), 20u);
  ASSERT_FALSE(rep.rows.empty());
  EXPECT_EQ(rep.rows[0].entry, 1u);
  EXPECT_EQ(rep.rows[0].feature, "copy");
  EXPECT_DOUBLE_EQ(rep.rows[0].rho, 1.0);
  EXPECT_EQ(rep.rows[0].n_used, 20u);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) EXPECT_GE(std::abs(rep.rows[i - 1].rho), std::abs(rep.rows[i].rho));
  for (const auto& r : rep.rows) {
    EXPECT_DOUBLE_EQ(r.p_adj, bonferroni(r.p_raw, 6));
    EXPECT_TRUE(r.prediction_rho.has_value());
  }
  // Pure function of (inputs, seed).
  EXPECT_EQ(report_csv(rep), report_csv(correlate_dictionary(act, ids, pred, fm, 11)));
  const std::string csv = report_csv(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "entry,feature,rho,p_raw,p_adj,n_used,prediction_rho,seed");
}

TEST(CorrelateDictionary, MisalignedIdsAreListed) {
  Matrix act(3, 1, 0.0);
  act(0, 0) = 1;
  act(1, 0) = 2;
  const std::vector<std::string> ids{"a", "b", "c"};
  const auto fm = feature_matrix({"a", "b", "zz"}, {"1", "2", "3"}, {{"f", {1.0, 2.0, 3.0}}});
  try {
    correlate_dictionary(act, ids, {}, fm, 0);
    FAIL();
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("zz"), std::string::npos);
    EXPECT_NE(msg.find("c (activations only)"), std::string::npos);
  }
}

TEST(CorrelateDictionary, ZeroVarianceAndMissingAreSkippedWithReasons) {
  const std::size_t n = 10;
  Matrix act(n, 2);
  std::vector<std::string> ids, spk;
  std::vector<double> f;
  for (std::size_t i = 0; i < n; ++i) {
    act(i, 0) = 5.0;  // dead entry
    act(i, 1) = static_cast<double>(i);
    ids.push_back(std::to_string(i));
    spk.push_back(std::to_string(i));
    f.push_back(static_cast<double>(i * i));
  }
  auto fm = feature_matrix(ids, spk, {{"sq", f}, {"sparse", f}});
  ASSERT_EQ(fm.names[0], "sparse");
  for (std::size_t i = 0; i < 7; ++i) fm.columns[0][i] = std::nullopt;
  const auto rep = correlate_dictionary(act, ids, {}, fm, 0);
  EXPECT_EQ(rep.total_tests, 4u);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].feature, "sq");
  EXPECT_FALSE(rep.rows[0].prediction_rho.has_value());
  ASSERT_EQ(rep.skipped.size(), 2u);
  EXPECT_EQ(rep.skipped[0].entry, 0u);
  EXPECT_NE(rep.skipped[0].reason.find("variance"), std::string::npos);
  EXPECT_NE(rep.skipped[1].reason.find("fewer than 4"), std::string::npos);
}

TEST(CorrelateDictionary, CoupledFeatureIsSignificantAfterAdjustment) {
  Rng rng(8);
  const std::size_t speakers = 32, per = 3, K = 8, n = speakers * per;
  Matrix act(n, K);
  for (double& v : act.data()) v = rng.normal();
  std::vector<std::string> ids, spk;
  std::map<std::string, std::vector<double>> cols;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("s" + std::to_string(i));
    spk.push_back("p" + std::to_string(i / per));
  }
  for (int f = 0; f < 10; ++f) {
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = f == 0 ? act(i, 5) + 0.2 * rng.normal() : rng.normal();
    cols["f" + std::to_string(f)] = c;
  }
  const auto rep = correlate_dictionary(act, ids, {}, feature_matrix(ids, spk, cols), 3);
  EXPECT_EQ(rep.rows[0].entry, 5u);
  EXPECT_EQ(rep.rows[0].feature, "f0");
  EXPECT_LT(rep.rows[0].p_adj, 0.01);
}

TEST(AttentionXcorr, ComplementaryAndIdenticalMasks) {
  std::vector<double> att, energy;
  for (int t = 0; t < 60; ++t) {
    const bool on = (t / 15) % 2 == 0;
    att.push_back(on ? 1.0 : 0.0);
    energy.push_back(on ? 0.0 : 1.0);
  }
  AnticorrConfig cfg;
  cfg.smooth_window_frames = 1;
  EXPECT_DOUBLE_EQ(*attention_energy_xcorr(att, energy, cfg).lag0, -1.0);
  EXPECT_DOUBLE_EQ(*attention_energy_xcorr(att, att, cfg).lag0, 1.0);
}

TEST(AttentionXcorr, ConstantSeriesIsUndefined) {
  const std::vector<double> flat(20, 0.3), ramp = [] {
    std::vector<double> r(20);
    std::iota(r.begin(), r.end(), 0.0);
    return r;
  }();
  EXPECT_FALSE(attention_energy_xcorr(flat, ramp).lag0.has_value());
  EXPECT_THROW(attention_energy_xcorr(flat, std::vector<double>(19, 1.0)), InputError);
  EXPECT_THROW(attention_energy_xcorr(std::vector<double>(3, 1.0), std::vector<double>(3, 1.0)), InputError);
}

TEST(AttentionXcorr, InvariantUnderPositiveRescalingAndLagCurve) {
  Rng rng(12);
  std::vector<double> att(80), energy(80), att_s(80), energy_s(80);
  for (std::size_t t = 0; t < 80; ++t) {
    att[t] = rng.uniform() * (t > 30 && t < 50 ? 1.0 : 0.01);
    energy[t] = rng.uniform() * (t > 30 && t < 50 ? 0.01 : 1.0);
    att_s[t] = 7.5 * att[t];
    energy_s[t] = 0.02 * energy[t];
  }
  AnticorrConfig cfg;
  cfg.max_lag_frames = 3;
  const auto a = attention_energy_xcorr(att, energy, cfg), b = attention_energy_xcorr(att_s, energy_s, cfg);
  EXPECT_EQ(*a.lag0, *b.lag0);
  EXPECT_LT(*a.lag0, -0.5);
  ASSERT_EQ(a.by_lag.size(), 7u);
  EXPECT_EQ(*a.by_lag[3], *a.lag0);
}

TEST(Covariate, IdentityAveragingAndRefusal) {
  const std::vector<std::string> subj{"a", "a", "b", "b", "c", "c", "d", "d", "e", "e"};
  const std::vector<double> scores{1, 3, 5, 7, 2, 2, 10, 0, 8, 9};
  std::map<std::string, double> cov{{"a", 2}, {"b", 6}, {"c", 2}, {"d", 5}, {"e", 8.5}};
  const auto r = subject_covariate_corr(scores, subj, cov);
  EXPECT_DOUBLE_EQ(*r.rho, 1.0);
  EXPECT_EQ(r.n_subjects, 5u);
  // Precomputed means give the same answer.
  const std::vector<std::string> s2{"a", "b", "c", "d", "e"};
  const std::vector<double> means{2, 6, 2, 5, 8.5};
  EXPECT_EQ(*subject_covariate_corr(means, s2, cov).rho, *r.rho);
  std::map<std::string, double> few{{"a", 1}, {"b", 2}, {"c", 3}};
  EXPECT_THROW(subject_covariate_corr(scores, subj, few), InputError);
  std::map<std::string, double> orphan = cov;
  orphan["zz"] = 1.0;
  EXPECT_THROW(subject_covariate_corr(scores, subj, orphan), InputError);
}

TEST(Covariate, NullCovariateRarelyCorrelates) {
  Rng rng(21);
  int big = 0;
  for (int draw = 0; draw < 200; ++draw) {
    std::vector<std::string> subj;
    std::vector<double> scores;
    std::map<std::string, double> cov;
    for (int s = 0; s < 32; ++s) {
      const std::string id = "s" + std::to_string(s);
      cov[id] = rng.normal();
      for (int k = 0; k < 2; ++k) {
        subj.push_back(id);
        scores.push_back(rng.normal());
      }
    }
    if (std::abs(*subject_covariate_corr(scores, subj, cov).rho) >= 0.5) ++big;
  }
  EXPECT_LE(big, 10);
}

TEST(Covariate, CsvReaderSelectsCovariate) {
  const auto t = io::parse_csv("subject_id,covariate_name,value\na,putamen,1.5\nb,putamen,2\na,age,60\n");
  const auto m = read_covariates(t, "putamen");
  EXPECT_EQ(m.size(), 2u);
  EXPECT_DOUBLE_EQ(m.at("b"), 2.0);
  EXPECT_THROW(read_covariates(t), InputError);
  EXPECT_THROW(read_covariates(t, "nothing"), InputError);
}

TEST(FeatureCsv, MetadataDroppedAndEmptyCellsMissing) {
  const auto t = io::parse_csv(
      "sample_id,speaker_id,label,language,sex,f0_mean,jitter\n"
      "a,s1,PD,EN,F,120.5,\n"
      "b,s2,HC,IT,M,98,0.01\n");
  const auto fm = feature_matrix_from_csv(t);
  EXPECT_EQ(fm.sample_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(fm.speaker_ids, (std::vector<std::string>{"s1", "s2"}));
  EXPECT_EQ(fm.names, (std::vector<std::string>{"f0_mean", "jitter"}));
  EXPECT_DOUBLE_EQ(*fm.columns[0][0], 120.5);
  EXPECT_FALSE(fm.columns[1][0].has_value());
  EXPECT_DOUBLE_EQ(*fm.columns[1][1], 0.01);
}

TEST(FeatureCsv, RejectsMissingIdsAndBadCells) {
  EXPECT_THROW(feature_matrix_from_csv(io::parse_csv("sample_id,f\na,1\n")), InputError);
  EXPECT_THROW(feature_matrix_from_csv(io::parse_csv("sample_id,speaker_id,f\na,s,abc\n")), InputError);
  EXPECT_THROW(feature_matrix_from_csv(io::parse_csv("sample_id,speaker_id,f,f\na,s,1,2\n")), InputError);
}

TEST(TraceCsv, RoundTripsAndChecksFrames) {
  const std::vector<double> att = {0.25, 0.5, 0.25}, en = {1.0, 0.0, 3.5e-7};
  const std::string text = trace_csv(att, en);
  EXPECT_EQ(text.substr(0, text.find('\n')), "frame,attention,energy");
  const auto back = read_trace(io::parse_csv(text));
  EXPECT_EQ(back.attention, att);
  EXPECT_EQ(back.energy, en);
  EXPECT_THROW(trace_csv(att, std::vector<double>{1.0}), DimensionError);
  EXPECT_THROW(read_trace(io::parse_csv("frame,attention,energy\n0,1,1\n2,1,1\n")), InputError);
  EXPECT_THROW(read_trace(io::parse_csv("frame,attention,energy\n0,,1\n")), InputError);
  EXPECT_THROW(read_trace(io::parse_csv("frame,attention\n0,1\n")), InputError);
}
