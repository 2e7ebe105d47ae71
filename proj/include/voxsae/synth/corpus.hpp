#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/core/metadata.hpp"
#include "voxsae/core/rng.hpp"
#include "voxsae/detector/head.hpp"
#include "voxsae/io/csv.hpp"
#include "voxsae/io/manifest.hpp"
#include "voxsae/io/sbem.hpp"
#include "voxsae/io/wav.hpp"
#include "voxsae/synth/signals.hpp"
#include "voxsae/tensor/matrix.hpp"

namespace voxsae::synth {

enum class LabelRule {
  Factor,  // PD speakers carry the label factor, HC speakers never do
  Random,  // per-sample coin flip, independent of the frames
};

inline LabelRule parse_label_rule(const std::string& s) {
  if (s == "factor") return LabelRule::Factor;
  if (s == "random") return LabelRule::Random;
  throw ConfigError("label_rule must be factor or random, got '" + s + "'");
}
inline const char* to_string(LabelRule r) { return r == LabelRule::Random ? "random" : "factor"; }

struct SynthConfig {
  std::size_t n_speakers = 32;
  std::size_t samples_per_speaker = 32;
  std::size_t t_min = 40;
  std::size_t t_max = 80;
  double span_min_frac = 0.3;  // planted span covers this fraction of T ...
  double span_max_frac = 0.5;  // ... up to this
  std::size_t N = 64;
  std::size_t k_factors = 4;
  double factor_sparsity = 0.75;  // P(factor active) per sample
  double intensity_min = 2.0;
  double intensity_max = 4.0;
  LabelRule label_rule = LabelRule::Factor;
  std::size_t label_factor = 0;
  double noise_std = 0.1;       // inside the planted span
  double speech_level = 1.0;    // frame noise outside the span
  double speaker_std = 0.05;    // per-speaker offset
  double pause_energy = 0.02;   // energy trace level inside the span
  std::uint64_t seed = 0;

  void validate() const {
    if (n_speakers < 1 || samples_per_speaker < 1) throw ConfigError("synth: need at least one speaker and sample");
    if (t_min < 2 || t_max < t_min) throw ConfigError("synth: need 2 <= t_min <= t_max");
    if (!(span_min_frac > 0.0 && span_min_frac <= span_max_frac && span_max_frac <= 1.0)) {
      throw ConfigError("synth: need 0 < span_min_frac <= span_max_frac <= 1");
    }
    if (N < 1) throw ConfigError("synth: N must be >= 1");
    if (k_factors > N) throw ConfigError("synth: k_factors must be <= N");
    if (!(factor_sparsity >= 0.0 && factor_sparsity <= 1.0)) throw ConfigError("synth: factor_sparsity must be in [0,1]");
    if (!(intensity_min > 0.0 && intensity_max >= intensity_min)) throw ConfigError("synth: need 0 < intensity_min <= intensity_max");
    if (label_rule == LabelRule::Factor && label_factor >= k_factors) {
      throw ConfigError("synth: label_rule factor needs label_factor < k_factors (use label_rule = random with k_factors = 0)");
    }
    if (noise_std < 0.0 || speech_level < 0.0 || speaker_std < 0.0 || pause_energy < 0.0) {
      throw ConfigError("synth: noise levels must be >= 0");
    }
  }
};

struct SynthSample {
  detector::EmbeddingSequence seq;
  std::vector<double> energy;   // per-frame, low inside the span
  std::vector<double> factors;  // planted intensities, k entries
  std::size_t span_start = 0, span_len = 0;
  std::vector<double> pooled_truth;  // mean frame over the span
};

struct SynthCorpus {
  SynthConfig cfg;
  Matrix directions;  // k x N, orthonormal rows
  Matrix speaker_offsets;
  std::vector<SynthSample> samples;

  /// samples x N span means, the pooled-level structure.
  Matrix pooled_truth() const {
    Matrix m(samples.size(), cfg.N);
    for (std::size_t i = 0; i < samples.size(); ++i) std::copy(samples[i].pooled_truth.begin(), samples[i].pooled_truth.end(), m.row(i).begin());
    return m;
  }
  Matrix factor_matrix() const {
    Matrix m(samples.size(), cfg.k_factors);
    for (std::size_t i = 0; i < samples.size(); ++i) std::copy(samples[i].factors.begin(), samples[i].factors.end(), m.row(i).begin());
    return m;
  }
  std::vector<detector::EmbeddingSequence> sequences() const {
    std::vector<detector::EmbeddingSequence> out;
    for (const auto& s : samples) out.push_back(s.seq);
    return out;
  }
};

/// k x N rows with unit norm and mutual orthogonality (Gram-Schmidt, two passes).
inline Matrix orthonormal_rows(std::size_t k, std::size_t N, Rng& rng) {
  if (k > N) throw ConfigError("cannot draw " + std::to_string(k) + " orthonormal directions in dimension " + std::to_string(N));
  Matrix D(k, N);
  for (std::size_t j = 0; j < k; ++j) {
    auto r = D.row(j);
    double nrm = 0.0;
    while (nrm < 1e-8) {
      for (double& v : r) v = rng.normal();
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < j; ++i) {
          const auto q = D.row(i);
          const double d = dot(q, r);
          for (std::size_t c = 0; c < N; ++c) r[c] -= d * q[c];
        }
      }
      nrm = norm2(r);
    }
    for (double& v : r) v /= nrm;
  }
  return D;
}

/// Speaker s: sex alternates every speaker, label every two, language every four,
/// so every sex x label cell is populated from four speakers on.
inline SampleMeta speaker_meta(std::size_t s) {
  SampleMeta m;
  m.speaker = "spk" + std::to_string(s);
  m.sex = s % 2 == 0 ? Sex::M : Sex::F;
  m.label = (s / 2) % 2 == 0 ? Label::PD : Label::HC;
  m.language = (s / 4) % 2 == 0 ? Language::Fr : Language::En;
  return m;
}

inline std::string sample_id(std::size_t s, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%03zu_%03zu", s, i);
  return buf;
}

/// Frames are speaker offset + speech-level noise, except for one contiguous
/// span holding offset + sum_j c_j d_j + small noise. Each sample draws from
/// its own derived seed, so generation order does not matter.
inline SynthCorpus generate_corpus(const SynthConfig& cfg) {
  cfg.validate();
  SynthCorpus c;
  c.cfg = cfg;
  Rng dir_rng(mix_seed(cfg.seed, 0xD1EC7));
  c.directions = orthonormal_rows(cfg.k_factors, cfg.N, dir_rng);
  c.speaker_offsets = Matrix(cfg.n_speakers, cfg.N);
  for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
    Rng r(mix_seed(cfg.seed, 0x5BEA0000 + s));
    for (double& v : c.speaker_offsets.row(s)) v = cfg.speaker_std * r.normal();
  }
  for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
    const SampleMeta spk = speaker_meta(s);
    const auto off = c.speaker_offsets.row(s);
    for (std::size_t i = 0; i < cfg.samples_per_speaker; ++i) {
      const std::size_t index = s * cfg.samples_per_speaker + i;
      Rng r(mix_seed(cfg.seed, index));
      SynthSample out;
      out.seq.meta = spk;
      out.seq.meta.id = sample_id(s, i);
      const std::size_t T = static_cast<std::size_t>(r.uniform_int(static_cast<long>(cfg.t_min), static_cast<long>(cfg.t_max)));
      const double frac = r.uniform(cfg.span_min_frac, cfg.span_max_frac);
      const std::size_t L = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(frac * static_cast<double>(T))), 1, T);
      const std::size_t start = static_cast<std::size_t>(r.uniform_int(0, static_cast<long>(T - L)));
      out.span_start = start;
      out.span_len = L;

      out.factors.assign(cfg.k_factors, 0.0);
      for (std::size_t j = 0; j < cfg.k_factors; ++j) {
        const bool on = r.bernoulli(cfg.factor_sparsity);
        const double a = r.uniform(cfg.intensity_min, cfg.intensity_max);
        out.factors[j] = on ? a : 0.0;
      }
      if (cfg.label_rule == LabelRule::Factor) {
        const double a = r.uniform(cfg.intensity_min, cfg.intensity_max);
        out.factors[cfg.label_factor] = spk.label == Label::PD ? a : 0.0;
      } else {
        out.seq.meta.label = r.bernoulli(0.5) ? Label::PD : Label::HC;
      }

      std::vector<double> planted(cfg.N, 0.0);
      for (std::size_t j = 0; j < cfg.k_factors; ++j) {
        const auto d = c.directions.row(j);
        for (std::size_t n = 0; n < cfg.N; ++n) planted[n] += out.factors[j] * d[n];
      }
      out.seq.frames = Matrix(T, cfg.N);
      out.energy.assign(T, 0.0);
      out.pooled_truth.assign(cfg.N, 0.0);
      for (std::size_t t = 0; t < T; ++t) {
        auto row = out.seq.frames.row(t);
        const bool in_span = t >= start && t < start + L;
        for (std::size_t n = 0; n < cfg.N; ++n) {
          row[n] = in_span ? off[n] + planted[n] + cfg.noise_std * r.normal() : off[n] + cfg.speech_level * r.normal();
        }
        out.energy[t] = (in_span ? cfg.pause_energy : cfg.speech_level) * r.uniform(0.5, 1.5);
        if (in_span) {
          for (std::size_t n = 0; n < cfg.N; ++n) out.pooled_truth[n] += row[n] / static_cast<double>(L);
        }
      }
      c.samples.push_back(std::move(out));
    }
  }
  return c;
}

/// Relative layout: manifest.jsonl, emb/<id>.sbem, energy/<id>.sbem,
/// planted.csv (feature-CSV shaped: metadata then factor_j columns).
inline void write_embedding_corpus(const std::filesystem::path& dir, const SynthCorpus& c) {
  std::vector<io::ManifestEntry> entries;
  std::vector<std::string> header = {"sample_id", "speaker_id", "label", "language", "sex"};
  for (std::size_t j = 0; j < c.cfg.k_factors; ++j) header.push_back("factor_" + std::to_string(j));
  io::CsvWriter planted(header);
  for (const auto& s : c.samples) {
    io::ManifestEntry e;
    e.meta = s.seq.meta;
    e.kind = io::SampleKind::Embedding;
    e.path = "emb/" + s.seq.meta.id + ".sbem";
    e.energy = "energy/" + s.seq.meta.id + ".sbem";
    io::write_sbem(dir / e.path, s.seq.frames);
    io::write_sbem(dir / *e.energy, Matrix(s.energy.size(), 1, s.energy));
    entries.push_back(std::move(e));
    std::vector<std::string> row = {s.seq.meta.id, s.seq.meta.speaker, to_string(s.seq.meta.label),
                                    to_string(s.seq.meta.language), to_string(s.seq.meta.sex)};
    for (double f : s.factors) row.push_back(io::format_double(f));
    planted.row_strings(row);
  }
  io::write_manifest(dir / "manifest.jsonl", entries);
  planted.save(dir / "planted.csv");
}

struct WavSynthConfig {
  std::size_t n_speakers = 8;
  std::size_t samples_per_speaker = 4;
  double duration_s = 2.0;
  double gap_min_s = 0.2;
  double gap_max_s = 0.8;
  double pd_noise_snr_db = 5.0;   // PD: breathier voice
  double hc_noise_snr_db = 25.0;
  double sample_rate = dsp::kDefaultSampleRate;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_speakers < 1 || samples_per_speaker < 1) throw ConfigError("synth wav: need at least one speaker and sample");
    if (!(duration_s > 0.2)) throw ConfigError("synth wav: duration_s must exceed 0.2");
    if (!(gap_min_s >= 0.0 && gap_max_s >= gap_min_s && gap_max_s < duration_s)) throw ConfigError("synth wav: bad gap range");
    if (!(sample_rate > 0.0)) throw ConfigError("synth wav: sample_rate must be > 0");
  }
};

struct WavCorpus {
  std::vector<SampleMeta> metas;
  std::vector<dsp::Waveform> waves;
};

/// Two voiced segments (vibrato-free harmonic tone with a speaker F0) around a
/// silent gap; PD samples get more aspiration noise.
inline WavCorpus generate_wav_corpus(const WavSynthConfig& cfg) {
  cfg.validate();
  WavCorpus c;
  for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
    SampleMeta spk = speaker_meta(s);
    Rng sr_rng(mix_seed(cfg.seed, 0x5BEA0000 + s));
    const double f0 = spk.sex == Sex::M ? sr_rng.uniform(100.0, 140.0) : sr_rng.uniform(180.0, 240.0);
    for (std::size_t i = 0; i < cfg.samples_per_speaker; ++i) {
      Rng r(mix_seed(cfg.seed, s * cfg.samples_per_speaker + i));
      SampleMeta m = spk;
      m.id = sample_id(s, i);
      const double gap = r.uniform(cfg.gap_min_s, cfg.gap_max_s);
      const double tone = (cfg.duration_s - gap) / 2.0;
      const double f = f0 * r.uniform(0.97, 1.03);
      dsp::Waveform w{std::vector<double>(n_samples(cfg.duration_s, cfg.sample_rate), 0.0), cfg.sample_rate};
      const std::size_t n_tone = n_samples(tone, cfg.sample_rate), n_gap = n_samples(gap, cfg.sample_rate);
      std::vector<double> voiced(n_tone), noise(n_tone);
      for (int seg = 0; seg < 2; ++seg) {
        for (std::size_t k = 0; k < n_tone; ++k) {
          const double t = static_cast<double>(k) / cfg.sample_rate;
          voiced[k] = 0.5 * std::sin(2.0 * std::numbers::pi * f * t) + 0.2 * std::sin(4.0 * std::numbers::pi * f * t) +
                      0.1 * std::sin(6.0 * std::numbers::pi * f * t);
          noise[k] = r.normal();
        }
        const double snr = m.label == Label::PD ? cfg.pd_noise_snr_db : cfg.hc_noise_snr_db;
        const auto mixed = dsp::mix_at_snr(voiced, noise, snr);
        const std::size_t off = seg == 0 ? 0 : n_tone + n_gap;
        for (std::size_t k = 0; k < n_tone && off + k < w.size(); ++k) w.samples[off + k] = mixed[k];
      }
      dsp::clip_unit(w.samples);
      c.metas.push_back(m);
      c.waves.push_back(std::move(w));
    }
  }
  return c;
}

/// manifest.jsonl plus wav/<id>.wav (float32).
inline void write_wav_corpus(const std::filesystem::path& dir, const WavCorpus& c) {
  std::vector<io::ManifestEntry> entries;
  for (std::size_t i = 0; i < c.metas.size(); ++i) {
    io::ManifestEntry e;
    e.meta = c.metas[i];
    e.kind = io::SampleKind::Wav;
    e.path = "wav/" + c.metas[i].id + ".wav";
    io::write_wav(dir / e.path, c.waves[i]);
    entries.push_back(std::move(e));
  }
  io::write_manifest(dir / "manifest.jsonl", entries);
}

}  // namespace voxsae::synth
