#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "voxsae/io/csv.hpp"
#include "voxsae/io/manifest.hpp"
#include "voxsae/io/sbem.hpp"
#include "voxsae/io/wav.hpp"
#include "voxsae/synth/corpus.hpp"
#include "voxsae/synth/signals.hpp"

using namespace voxsae;
using namespace voxsae::synth;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("voxsae_synth_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SynthConfig small_cfg() {
  SynthConfig c;
  c.n_speakers = 8;
  c.samples_per_speaker = 3;
  c.N = 16;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(SynthCorpus, DirectionsAreOrthonormal) {
  Rng rng(1);
  const Matrix d = orthonormal_rows(6, 20, rng);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      double dot = 0.0;
      for (std::size_t n = 0; n < 20; ++n) dot += d(i, n) * d(j, n);
      EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-12);
    }
  }
  EXPECT_THROW(orthonormal_rows(21, 20, rng), ConfigError);
}

TEST(SynthCorpus, ShapesSpansAndFactorRule) {
  const auto c = generate_corpus(small_cfg());
  ASSERT_EQ(c.samples.size(), 24u);
  std::set<std::string> ids;
  for (const auto& s : c.samples) {
    const std::size_t T = s.seq.frames.rows();
    EXPECT_GE(T, 40u);
    EXPECT_LE(T, 80u);
    EXPECT_EQ(s.seq.frames.cols(), 16u);
    EXPECT_EQ(s.energy.size(), T);
    EXPECT_LE(s.span_start + s.span_len, T);
    const double frac = static_cast<double>(s.span_len) / static_cast<double>(T);
    EXPECT_GE(frac, 0.3 - 0.5 / 40.0);
    EXPECT_LE(frac, 0.5 + 0.5 / 40.0);
    EXPECT_EQ(s.factors[0] > 0.0, s.seq.meta.label == Label::PD);
    for (double f : s.factors) EXPECT_TRUE(f == 0.0 || (f >= 2.0 && f <= 4.0));
    for (std::size_t t = 0; t < T; ++t) {
      const bool in_span = t >= s.span_start && t < s.span_start + s.span_len;
      if (in_span) EXPECT_LT(s.energy[t], 0.031);
      else EXPECT_GE(s.energy[t], 0.5);
    }
    EXPECT_TRUE(ids.insert(s.seq.meta.id).second);
  }
}

TEST(SynthCorpus, PooledTruthIsSpanMean) {
  const auto c = generate_corpus(small_cfg());
  const auto& s = c.samples[3];
  for (std::size_t n = 0; n < 16; ++n) {
    double m = 0.0;
    for (std::size_t t = s.span_start; t < s.span_start + s.span_len; ++t) m += s.seq.frames(t, n);
    EXPECT_NEAR(s.pooled_truth[n], m / static_cast<double>(s.span_len), 1e-12);
  }
  // The span mean sits near offset + planted direction mix.
  const std::size_t spk = 1;
  double err = 0.0;
  for (std::size_t n = 0; n < 16; ++n) {
    double planted = c.speaker_offsets(spk, n);
    for (std::size_t j = 0; j < 4; ++j) planted += s.factors[j] * c.directions(j, n);
    err = std::max(err, std::abs(planted - s.pooled_truth[n]));
  }
  EXPECT_LT(err, 0.15);
}

TEST(SynthCorpus, AllCellsPopulatedAndDeterministic) {
  const auto a = generate_corpus(small_cfg()), b = generate_corpus(small_cfg());
  std::map<std::string, int> cells;
  for (const auto& s : a.samples) {
    ++cells[std::string(to_string(s.seq.meta.sex)) + to_string(s.seq.meta.label) + to_string(s.seq.meta.language)];
  }
  EXPECT_EQ(cells.size(), 8u);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].seq.frames.data(), b.samples[i].seq.frames.data());
    EXPECT_EQ(a.samples[i].energy, b.samples[i].energy);
  }
  auto other = small_cfg();
  other.seed = 6;
  EXPECT_NE(generate_corpus(other).samples[0].seq.frames.data(), a.samples[0].seq.frames.data());
}

TEST(SynthCorpus, RandomLabelRuleDecouplesFactor) {
  auto cfg = small_cfg();
  cfg.n_speakers = 32;
  cfg.label_rule = LabelRule::Random;
  const auto c = generate_corpus(cfg);
  int agree = 0;
  for (const auto& s : c.samples) agree += (s.factors[0] > 0.0) == (s.seq.meta.label == Label::PD) ? 1 : 0;
  EXPECT_GT(agree, 20);
  EXPECT_LT(agree, static_cast<int>(c.samples.size()) - 20);
  EXPECT_EQ(parse_label_rule("random"), LabelRule::Random);
  EXPECT_THROW(parse_label_rule("coin"), ConfigError);
  auto bad = small_cfg();
  bad.label_factor = 4;
  EXPECT_THROW(generate_corpus(bad), ConfigError);
}

TEST(SynthCorpus, WrittenFilesRoundTripBitwise) {
  const auto c = generate_corpus(small_cfg());
  const auto dir = fresh_dir("emb");
  write_embedding_corpus(dir, c);
  const auto m = io::read_manifest(dir / "manifest.jsonl");
  ASSERT_EQ(m.size(), c.samples.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& e = m.entries[i];
    EXPECT_EQ(e.meta.id, c.samples[i].seq.meta.id);
    const Matrix frames = io::read_sbem(m.resolve(e.path));
    // float32 storage: exact after rounding through float.
    for (std::size_t k = 0; k < frames.data().size(); ++k) {
      EXPECT_EQ(frames.data()[k], static_cast<double>(static_cast<float>(c.samples[i].seq.frames.data()[k])));
    }
    ASSERT_TRUE(e.energy.has_value());
    EXPECT_EQ(io::read_sbem(m.resolve(*e.energy)).cols(), 1u);
  }
  const auto planted = io::read_csv(dir / "planted.csv");
  EXPECT_TRUE(planted.has_column("factor_3"));
  EXPECT_EQ(planted.rows.size(), c.samples.size());
  // Writing twice yields identical bytes.
  const auto again = fresh_dir("emb2");
  write_embedding_corpus(again, c);
  EXPECT_EQ(io::read_file_bytes(dir / "manifest.jsonl"), io::read_file_bytes(again / "manifest.jsonl"));
  EXPECT_EQ(io::read_file_bytes(dir / m.entries[0].path), io::read_file_bytes(again / m.entries[0].path));
}

TEST(SynthWav, CorpusHasGapAndWritesWav) {
  WavSynthConfig cfg;
  cfg.n_speakers = 4;
  cfg.samples_per_speaker = 1;
  cfg.duration_s = 1.0;
  const auto c = generate_wav_corpus(cfg);
  ASSERT_EQ(c.waves.size(), 4u);
  for (const auto& w : c.waves) {
    EXPECT_EQ(w.size(), 16000u);
    // middle of the recording is inside the gap for any gap >= 0.2 s
    EXPECT_EQ(w.samples[8000], 0.0);
    for (double v : w.samples) EXPECT_LE(std::abs(v), 1.0);
  }
  const auto dir = fresh_dir("wav");
  write_wav_corpus(dir, c);
  const auto m = io::read_manifest(dir / "manifest.jsonl");
  EXPECT_EQ(m.entries[2].kind, io::SampleKind::Wav);
  const auto w = io::read_wav(m.resolve(m.entries[2].path));
  EXPECT_EQ(w.size(), c.waves[2].size());
}

TEST(TestSignal, KindsAndUnknown) {
  const auto s = test_signal("sine", {{"freq_hz", 200.0}, {"duration_s", 0.5}}, 0);
  EXPECT_EQ(s.size(), 8000u);
  EXPECT_NEAR(s.samples[20], 0.8 * std::sin(2.0 * std::numbers::pi * 200.0 * 20.0 / 16000.0), 1e-12);
  const auto g = test_signal("tone_gap_tone", {{"tone_s", 0.1}, {"gap_s", 0.2}}, 0);
  EXPECT_EQ(g.size(), 6400u);
  EXPECT_EQ(g.samples[2400], 0.0);
  EXPECT_EQ(test_signal("noise", {}, 3).samples, test_signal("noise", {}, 3).samples);
  EXPECT_NE(test_signal("noise", {}, 3).samples, test_signal("noise", {}, 4).samples);
  EXPECT_EQ(test_signal("am_sine", {}, 0).size(), 16000u);
  EXPECT_EQ(test_signal("sine_plus_noise", {}, 0).size(), 16000u);
  EXPECT_THROW(test_signal("chirp", {}, 0), InputError);
}
