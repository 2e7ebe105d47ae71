#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "voxsae/core/rng.hpp"
#include "voxsae/dsp/augment.hpp"
#include "voxsae/dsp/encoder.hpp"
#include "voxsae/dsp/features.hpp"
#include "voxsae/dsp/pause.hpp"
#include "voxsae/dsp/pitch.hpp"
#include "voxsae/dsp/spectral.hpp"
#include "voxsae/dsp/stft.hpp"
#include "voxsae/synth/signals.hpp"

using namespace voxsae;
using namespace voxsae::dsp;

namespace {

double db(double power_ratio) { return 10.0 * std::log10(power_ratio); }

Waveform scaled(const Waveform& w, double g) {
  Waveform out = w;
  for (double& v : out.samples) v *= g;
  return out;
}

}  // namespace

// ---- framing / stft

TEST(Stft, LayoutMatchesFrameCount) {
  const auto L = frame_layout(16000, 16000, {});
  EXPECT_EQ(L.window, 400u);
  EXPECT_EQ(L.hop, 160u);
  EXPECT_EQ(L.fft_size, 512u);
  EXPECT_EQ(L.n_frames, 1u + (16000u - 400u) / 160u);
}

TEST(Stft, ZeroSignalGivesZeroFrames) {
  const auto s = stft_magnitude(synth::silence(0.2));
  EXPECT_EQ(s.n_bins(), 257u);
  for (double v : s.frames.data()) EXPECT_EQ(v, 0.0);
}

TEST(Stft, DcConcentratesInBinZero) {
  Waveform w{std::vector<double>(4000, 0.5), 16000};
  const auto s = stft_magnitude(w);
  for (std::size_t t = 0; t < s.n_frames(); ++t) {
    const auto row = s.frames.row(t);
    EXPECT_EQ(std::max_element(row.begin(), row.end()) - row.begin(), 0);
  }
}

TEST(Stft, BinCenterSinePeaksAtItsBin) {
  const std::size_t k = 37;
  const auto s = stft_magnitude(synth::sine(k * 16000.0 / 512.0, 0.3));
  for (std::size_t t = 0; t < s.n_frames(); ++t) {
    const auto row = s.frames.row(t);
    EXPECT_EQ(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()), k);
  }
}

TEST(Stft, TooShortSignalIsInputError) {
  EXPECT_THROW(stft_magnitude(Waveform{std::vector<double>(100, 0.1), 16000}), InputError);
}

TEST(Stft, MagnitudesNonNegative) {
  Rng rng(3);
  const auto s = stft_magnitude(synth::white_noise(0.3, 0.2, rng));
  for (double v : s.frames.data()) EXPECT_GE(v, 0.0);
}

// ---- spectral stats

TEST(SpectralStats, FlatSpectrum) {
  const std::vector<double> flat(257, 0.3);
  const auto s = spectral_stats(flat, 31.25);
  ASSERT_TRUE(s.defined);
  EXPECT_NEAR(s.flatness, 1.0, 1e-12);
  EXPECT_NEAR(s.crest, 1.0, 1e-12);
  EXPECT_NEAR(s.entropy, 1.0, 1e-12);
  EXPECT_NEAR(s.centroid, 128 * 31.25, 1e-9);
}

TEST(SpectralStats, PointMass) {
  std::vector<double> m(257, 0.0);
  m[40] = 2.0;
  const auto s = spectral_stats(m, 31.25);
  ASSERT_TRUE(s.defined);
  EXPECT_EQ(s.flatness, 0.0);
  EXPECT_NEAR(s.entropy, 0.0, 1e-12);
  EXPECT_NEAR(s.centroid, 40 * 31.25, 1e-9);
  EXPECT_EQ(s.spread, 0.0);
  EXPECT_FALSE(s.skew.has_value());
  EXPECT_FALSE(s.kurtosis.has_value());
}

TEST(SpectralStats, TwoBinHandComputed) {
  // Masses 1 and 3 at bins 0 and 2 (bin width 10 Hz): p = {.25, 0, .75}.
  const std::vector<double> m = {1.0, 0.0, 3.0};
  const auto s = spectral_stats(m, 10.0);
  EXPECT_NEAR(s.centroid, 15.0, 1e-12);
  EXPECT_NEAR(s.spread, std::sqrt(0.25 * 225 + 0.75 * 25), 1e-12);
  const double sd = std::sqrt(75.0);
  EXPECT_NEAR(*s.skew, (0.25 * -3375 + 0.75 * 125) / (sd * sd * sd), 1e-12);
  EXPECT_NEAR(*s.kurtosis, (0.25 * 50625 + 0.75 * 625) / (75.0 * 75.0), 1e-12);
  const double h = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));
  EXPECT_NEAR(s.entropy, h / std::log(3.0), 1e-12);
  EXPECT_NEAR(s.crest, 3.0 / (4.0 / 3.0), 1e-12);
}

TEST(SpectralStats, AllZeroFrameIsMissing) {
  const std::vector<double> z(10, 0.0);
  EXPECT_FALSE(spectral_stats(z, 1.0).defined);
}

TEST(SpectralStats, FlatnessAndEntropyGainInvariant) {
  Rng rng(4);
  std::vector<double> m(257);
  for (double& v : m) v = std::abs(rng.normal()) + 1e-3;
  std::vector<double> m2 = m;
  for (double& v : m2) v *= 7.5;
  const auto a = spectral_stats(m, 31.25), b = spectral_stats(m2, 31.25);
  EXPECT_NEAR(a.flatness, b.flatness, 1e-12);
  EXPECT_NEAR(a.entropy, b.entropy, 1e-12);
}

TEST(SpectralStats, WhiteNoiseIsFlat) {
  Rng rng(11);
  const auto f = extract_features(synth::white_noise(1.0, 0.2, rng));
  EXPECT_GE(*f.vocal.get("spectral_flatness"), 0.9);
}

TEST(SpectralStats, SineIsNotFlat) {
  const auto f = extract_features(synth::sine(440, 1.0));
  EXPECT_LT(*f.vocal.get("spectral_flatness"), 0.1);
  EXPECT_GE(*f.vocal.get("spectral_crest"), 1.0);
}

TEST(SpectralStats, UtteranceFlatnessGainInvariant) {
  Rng rng(12);
  const auto w = synth::white_noise(0.5, 0.1, rng);
  const auto a = extract_features(w), b = extract_features(scaled(w, 3.0));
  EXPECT_NEAR(*a.vocal.get("spectral_flatness"), *b.vocal.get("spectral_flatness"), 1e-9);
  EXPECT_NEAR(*a.vocal.get("spectral_entropy"), *b.vocal.get("spectral_entropy"), 1e-9);
}

// ---- spectral flux

TEST(SpectralFlux, IdenticalFramesGiveZero) {
  Matrix s(5, 8, 0.7);
  EXPECT_EQ(spectral_flux(s), 0.0);
}

TEST(SpectralFlux, TwoFrameHandValue) {
  Matrix s(2, 16, 0.0);
  for (std::size_t f = 0; f < 16; ++f) s(1, f) = 1.0;
  EXPECT_DOUBLE_EQ(spectral_flux(s), 0.5);
}

TEST(SpectralFlux, UniformAttentionEqualsUnweightedExactly) {
  Rng rng(5);
  Matrix s(9, 12);
  for (double& v : s.data()) v = std::abs(rng.normal());
  const std::vector<double> ones_t(9, 1.0), ones_t1(8, 1.0);
  EXPECT_EQ(spectral_flux(s, ones_t), spectral_flux(s));
  EXPECT_EQ(spectral_flux(s, ones_t1), spectral_flux(s));
}

TEST(SpectralFlux, WeightedHandComputed) {
  // Three frames, F = 2; diffs: (1,1) then (2,0).
  const Matrix s{{0, 0}, {1, 1}, {3, 1}};
  const std::vector<double> a = {0.5, 2.0, 9.0};  // last weight unused
  const double expected = (1.0 / 3.0) * (0.5 / 2.0 * 2.0 + 2.0 / 2.0 * 4.0);
  EXPECT_DOUBLE_EQ(spectral_flux(s, a), expected);
  EXPECT_DOUBLE_EQ(spectral_flux(s, std::vector<double>{0.5, 2.0}), expected);
}

TEST(SpectralFlux, LengthMismatchIsInputError) {
  Matrix s(6, 4, 1.0);
  EXPECT_THROW(spectral_flux(s, std::vector<double>(4, 1.0)), InputError);
  EXPECT_THROW(spectral_flux(s, std::vector<double>(7, 1.0)), InputError);
  EXPECT_THROW(spectral_flux(Matrix(1, 4, 1.0)), InputError);
  EXPECT_THROW(spectral_flux(s, std::vector<double>{1, 1, 1, -1, 1, 1}), InputError);
}

// ---- mel / mfcc

TEST(Mel, ScaleRoundTrip) {
  for (double hz : {0.0, 100.0, 1000.0, 7999.0}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
  EXPECT_NEAR(hz_to_mel(1000.0), 1000.0, 0.5);
}

TEST(Mel, EveryFilterNonEmpty) {
  const Matrix fb = mel_filterbank(80, 512, 16000);
  for (std::size_t m = 0; m < fb.rows(); ++m) {
    const auto r = fb.row(m);
    EXPECT_GT(*std::max_element(r.begin(), r.end()), 0.0) << "band " << m;
  }
}

TEST(Mfcc, DctOfConstantVanishes) {
  const std::vector<double> c(26, -3.2);
  for (std::size_t k = 1; k <= 4; ++k) EXPECT_NEAR(dct2_coeff(c, k), 0.0, 1e-12);
  EXPECT_NEAR(dct2_coeff(c, 0), -3.2 * std::sqrt(26.0), 1e-12);
}

TEST(Mfcc, DctMatchesOrthonormalMatrix) {
  // Orthonormal DCT-II preserves the norm.
  Rng rng(8);
  std::vector<double> x(26);
  for (double& v : x) v = rng.normal();
  double e_in = 0.0, e_out = 0.0;
  for (double v : x) e_in += v * v;
  for (std::size_t k = 0; k < 26; ++k) e_out += std::pow(dct2_coeff(x, k), 2);
  EXPECT_NEAR(e_in, e_out, 1e-9);
}

TEST(Mfcc, SilenceGivesZeroCoefficients) {
  const auto s = stft_magnitude(synth::silence(0.1));
  const Matrix c = mfcc(s);
  ASSERT_EQ(c.cols(), 4u);
  for (double v : c.data()) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(Mfcc, IdenticalFramesIdenticalRows) {
  Matrix frames(2, 257);
  Rng rng(2);
  for (std::size_t k = 0; k < 257; ++k) frames(0, k) = frames(1, k) = std::abs(rng.normal());
  FramedSpectra s;
  s.frames = frames;
  s.fft_size = 512;
  const Matrix c = mfcc(s);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(c(0, k), c(1, k));
}

TEST(Mfcc, GainOnlyShiftsC0) {
  Rng rng(3);
  const auto w = synth::sine_plus_noise(300, 0.3, 10.0, rng);
  const Matrix a = mfcc(stft_magnitude(w)), b = mfcc(stft_magnitude(scaled(w, 2.0)));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-8);
}

TEST(Mfcc, TooFewBinsRejected) {
  FramedSpectra s;
  s.frames = Matrix(3, 9, 1.0);
  s.fft_size = 16;
  EXPECT_THROW(mfcc(s), InputError);
}

// ---- pitch / voice quality

TEST(Pitch, SineTracksFrequency) {
  const auto tr = f0_autocorrelation(synth::sine(100.0, 1.0));
  ASSERT_GT(tr.size(), 4u);
  for (std::size_t t = 1; t + 1 < tr.size(); ++t) {
    ASSERT_TRUE(tr.voiced[t]);
    EXPECT_NEAR(tr.f0_hz[t], 100.0, 1.0);
  }
}

TEST(Pitch, SineTracksAcrossRange) {
  for (double f : {75.0, 137.0, 220.0, 310.0}) {
    const auto tr = f0_autocorrelation(synth::sine(f, 0.5));
    for (std::size_t t = 1; t + 1 < tr.size(); ++t) EXPECT_NEAR(tr.f0_hz[t], f, f * 0.01) << f;
  }
}

TEST(Pitch, WhiteNoiseMostlyUnvoiced) {
  Rng rng(21);
  const auto tr = f0_autocorrelation(synth::white_noise(2.0, 0.2, rng));
  EXPECT_LT(static_cast<double>(tr.n_voiced()) / tr.size(), 0.2);
}

TEST(Pitch, SilenceIsUnvoiced) {
  const auto tr = f0_autocorrelation(synth::silence(0.5));
  EXPECT_EQ(tr.n_voiced(), 0u);
}

TEST(Pitch, FrameTooShortForFminRejected) {
  PitchConfig cfg;
  cfg.f_min = 30.0;  // two periods = 66 ms > 40 ms frame
  EXPECT_THROW(f0_autocorrelation(synth::sine(100, 0.5), cfg), InputError);
}

TEST(VoiceQuality, CleanSine) {
  const auto w = synth::sine(100.0, 1.0);
  const auto q = voice_quality(w, f0_autocorrelation(w));
  ASSERT_TRUE(q.jitter_local && q.shimmer_local && q.hnr_db);
  EXPECT_LT(*q.jitter_local, 0.005);
  EXPECT_LT(*q.shimmer_local, 0.01);
  EXPECT_GT(*q.hnr_db, 20.0);
}

TEST(VoiceQuality, ZeroDbNoiseHnrNearZero) {
  Rng rng(31);
  const auto w = synth::sine_plus_noise(150.0, 2.0, 0.0, rng);
  const auto q = voice_quality(w, f0_autocorrelation(w));
  ASSERT_TRUE(q.hnr_db);
  EXPECT_NEAR(*q.hnr_db, 0.0, 3.0);
}

TEST(VoiceQuality, AmplitudeModulationRaisesShimmer) {
  const auto plain = synth::am_sine(120.0, 1.0, 0.0, 5.0);
  const auto mod = synth::am_sine(120.0, 1.0, 0.2, 5.0);
  const auto qp = voice_quality(plain, f0_autocorrelation(plain));
  const auto qm = voice_quality(mod, f0_autocorrelation(mod));
  ASSERT_TRUE(qp.shimmer_local && qm.shimmer_local);
  EXPECT_GT(*qm.shimmer_local, *qp.shimmer_local);
}

TEST(VoiceQuality, UnvoicedSignalAllMissing) {
  const auto w = synth::silence(0.5);
  const auto q = voice_quality(w, f0_autocorrelation(w));
  EXPECT_FALSE(q.hnr_db || q.jitter_local || q.shimmer_local || q.gne);
}

TEST(VoiceQuality, GneHigherForPulseTrainThanNoise) {
  // Glottal-like excitation: impulses every 8 ms through a short decaying resonance.
  Waveform pulses{std::vector<double>(16000, 0.0), 16000};
  for (std::size_t i = 0; i < pulses.size(); i += 128) pulses.samples[i] = 0.9;
  std::vector<double> y(pulses.size(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = pulses.samples[i] + (i >= 1 ? 1.6 * std::cos(0.3) * y[i - 1] : 0.0) - (i >= 2 ? 0.64 * y[i - 2] : 0.0);
  }
  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  for (double& v : y) v *= 0.8 / peak;
  const Waveform voiced{y, 16000};
  const auto tr = f0_autocorrelation(voiced);
  const auto qv = voice_quality(voiced, tr);
  ASSERT_TRUE(qv.gne);

  Rng rng(4);
  const auto noise = synth::white_noise(1.0, 0.2, rng);
  std::vector<double> g;
  for (std::size_t t = 0; t + 1 < 90; t += 5) {
    if (const auto v = gne_frame(std::span<const double>(noise.samples).subspan(t * 160, 640), 16000)) g.push_back(*v);
  }
  ASSERT_FALSE(g.empty());
  double gm = 0.0;
  for (double v : g) gm += v;
  gm /= g.size();
  EXPECT_GT(*qv.gne, gm);
  EXPECT_GE(*qv.gne, 0.0);
  EXPECT_LE(*qv.gne, 1.0);
}

TEST(Lpc, RecoversAr2Coefficients) {
  Rng rng(7);
  std::vector<double> x(20000, 0.0);
  for (std::size_t i = 2; i < x.size(); ++i) x[i] = 1.2 * x[i - 1] - 0.5 * x[i - 2] + rng.normal();
  const auto a = lpc(x, 2);
  EXPECT_NEAR(a[1], -1.2, 0.03);
  EXPECT_NEAR(a[2], 0.5, 0.03);
}

// ---- pause stats

TEST(Pause, ContinuousToneHasNoPauses) {
  const auto p = pause_stats(synth::sine(200, 2.0));
  EXPECT_EQ(p.pauses_over_1s, 0u);
  EXPECT_EQ(p.longest_pause_s, 0.0);
  EXPECT_EQ(p.nonspeech_ratio, 0.0);
}

TEST(Pause, GapLengthWithinOneHop) {
  const auto p = pause_stats(synth::tone_gap_tone(200, 1.0, 1.5));
  EXPECT_NEAR(p.longest_pause_s, 1.5, 0.010);
  EXPECT_EQ(p.pauses_over_1s, 1u);
  EXPECT_NEAR(p.total_nonspeech_s, p.longest_pause_s, 1e-12);
  EXPECT_NEAR(p.nonspeech_ratio, p.total_nonspeech_s / 3.5, 1e-12);
}

TEST(Pause, AllSilence) {
  const auto p = pause_stats(synth::silence(2.3));
  EXPECT_DOUBLE_EQ(p.nonspeech_ratio, 1.0);
  EXPECT_DOUBLE_EQ(p.longest_pause_s, 2.3);
  EXPECT_DOUBLE_EQ(p.total_nonspeech_s, 2.3);
  EXPECT_EQ(p.pauses_over_1s, 1u);
}

TEST(Pause, ShortPauseNotCounted) {
  const auto p = pause_stats(synth::tone_gap_tone(200, 0.5, 0.4));
  EXPECT_NEAR(p.longest_pause_s, 0.4, 0.010);
  EXPECT_EQ(p.pauses_over_1s, 0u);
}

TEST(Pause, InvariantsOnRandomLayouts) {
  Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    Waveform w{{}, 16000};
    const int segs = 1 + static_cast<int>(rng.uniform_index(5));
    for (int s = 0; s < segs; ++s) {
      const double len = rng.uniform(0.05, 1.4);
      const bool loud = rng.bernoulli(0.5);
      const auto n = synth::n_samples(len, 16000);
      for (std::size_t i = 0; i < n; ++i) w.samples.push_back(loud ? 0.5 * std::sin(0.07 * i) : 0.0);
    }
    const auto p = pause_stats(w);
    EXPECT_LE(p.longest_pause_s, p.total_nonspeech_s + 1e-12);
    EXPECT_LE(p.total_nonspeech_s, w.duration_s() + 1e-12);
    EXPECT_GE(p.nonspeech_ratio, 0.0);
    EXPECT_LE(p.nonspeech_ratio, 1.0);
  }
}

TEST(MedianFilter, RemovesIsolatedSpike) {
  const std::vector<double> x = {0, 0, 0, 9, 0, 0, 0};
  const auto y = median_filter(x, 5);
  for (double v : y) EXPECT_EQ(v, 0.0);
}

TEST(MedianFilter, PreservesStepEdge) {
  const std::vector<double> x = {0, 0, 0, 0, 1, 1, 1, 1};
  EXPECT_EQ(median_filter(x, 5), x);
}

// ---- augmentation

TEST(Augment, ZeroProbabilityIsBitIdentical) {
  Rng rng(1);
  const auto w = synth::sine(300, 0.5, 0.99);
  AugmentConfig cfg;
  cfg.apply_probability = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto out = augment(w, cfg, rng);
    ASSERT_EQ(out.samples, w.samples);
  }
}

TEST(Augment, MixHitsRequestedSnr) {
  Rng rng(2);
  const auto w = synth::sine(300, 1.0, 0.3);
  std::vector<double> noise(w.size());
  for (double& v : noise) v = rng.normal();
  const auto mixed = mix_at_snr(w.samples, noise, 10.0);
  std::vector<double> diff(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) diff[i] = mixed[i] - w.samples[i];
  EXPECT_NEAR(db(mean_power(w.samples) / mean_power(diff)), 10.0, 0.5);
}

TEST(Augment, NotchAttenuatesProbeTone) {
  const auto probe = synth::sine(1000.0, 1.0, 0.5);
  const auto y = design_notch(1000.0, 16000, 30.0).apply(probe.samples);
  // Skip the filter transient.
  const std::span<const double> in_tail(probe.samples.data() + 8000, 8000), out_tail(y.data() + 8000, 8000);
  EXPECT_GE(db(mean_power(in_tail) / mean_power(out_tail)), 20.0);
}

TEST(Augment, NotchPassesDistantTone) {
  const auto probe = synth::sine(3000.0, 0.5, 0.5);
  const auto y = design_notch(1000.0, 16000, 30.0).apply(probe.samples);
  const std::span<const double> in_tail(probe.samples.data() + 4000, 4000), out_tail(y.data() + 4000, 4000);
  EXPECT_NEAR(db(mean_power(in_tail) / mean_power(out_tail)), 0.0, 0.1);
}

TEST(Augment, AppliedDrawsWithinRanges) {
  Rng rng(3);
  AugmentConfig cfg;
  cfg.apply_probability = 1.0;
  const auto w = synth::sine(200, 0.3, 0.9);
  for (int i = 0; i < 30; ++i) {
    AugmentRecord rec;
    const auto out = augment(w, cfg, rng, &rec);
    ASSERT_TRUE(rec.applied);
    EXPECT_GE(rec.snr_db, 0.0);
    EXPECT_LE(rec.snr_db, 15.0);
    EXPECT_GE(rec.notch_hz.size(), 2u);
    EXPECT_LE(rec.notch_hz.size(), 5u);
    for (double f : rec.notch_hz) {
      EXPECT_GE(f, 100.0);
      EXPECT_LE(f, 0.9 * 8000.0);
    }
    for (double v : out.samples) ASSERT_TRUE(v >= -1.0 && v <= 1.0);
  }
}

TEST(Augment, DeterministicGivenSeed) {
  const auto w = synth::sine(200, 0.3, 0.5);
  AugmentConfig cfg;
  Rng a(99), b(99);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(augment(w, cfg, a).samples, augment(w, cfg, b).samples);
}

TEST(Augment, ApplyRateMatchesProbability) {
  Rng rng(4);
  AugmentConfig cfg;
  cfg.apply_probability = 0.9;
  const auto w = synth::sine(200, 0.05, 0.5);
  int applied = 0;
  for (int i = 0; i < 1000; ++i) {
    AugmentRecord rec;
    augment(w, cfg, rng, &rec);
    applied += rec.applied;
  }
  EXPECT_NEAR(applied / 1000.0, 0.9, 0.03);
}

TEST(Augment, InvalidConfigRejected) {
  AugmentConfig cfg;
  cfg.apply_probability = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.notch_count_min = 6;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.noise_source = NoiseSource::Bank;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Augment, NoiseBankSource) {
  Rng rng(5);
  AugmentConfig cfg;
  cfg.apply_probability = 1.0;
  cfg.noise_source = NoiseSource::Bank;
  cfg.noise_bank = {std::vector<double>(100, 0.0)};
  for (std::size_t i = 0; i < 100; ++i) cfg.noise_bank[0][i] = std::sin(0.9 * i);
  const auto out = augment(synth::sine(200, 0.2, 0.3), cfg, rng);
  EXPECT_EQ(out.size(), synth::n_samples(0.2, 16000));
}

// ---- encoder / resampling / features

TEST(Encoder, SilenceAtLogFloor) {
  const Matrix e = filterbank_encoder(synth::silence(0.3));
  EXPECT_EQ(e.cols(), 80u);
  for (double v : e.data()) EXPECT_DOUBLE_EQ(v, std::log(kLogFloor));
}

TEST(Encoder, FrameCountMatchesStft) {
  const auto w = synth::sine(300, 0.77);
  EXPECT_EQ(filterbank_encoder(w).rows(), stft_magnitude(w).n_frames());
}

TEST(Encoder, LouderToneHasMoreEnergy) {
  const Matrix quiet = filterbank_encoder(synth::sine(440, 0.5, 0.1));
  const Matrix loud = filterbank_encoder(synth::sine(440, 0.5, 0.6));
  auto total = [](const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += std::exp(v);
    return s;
  };
  EXPECT_GT(total(loud), total(quiet));
}

TEST(Resample, LengthAndFrequencyPreserved) {
  const auto w = synth::sine(200.0, 1.0, 0.5, 22050.0);
  const auto r = resample_linear(w, 16000.0);
  EXPECT_EQ(r.size(), 16000u);
  EXPECT_EQ(r.sample_rate, 16000.0);
  const auto tr = f0_autocorrelation(r);
  EXPECT_NEAR(tr.f0_hz[10], 200.0, 2.0);
}

TEST(Features, SynthesizedSignalsNeverNaN) {
  Rng rng(13);
  const std::vector<Waveform> signals = {synth::sine(150, 1.0), synth::white_noise(1.0, 0.3, rng),
                                         synth::silence(0.6), synth::tone_gap_tone(120, 0.4, 1.2),
                                         synth::am_sine(180, 0.8, 0.3, 4.0),
                                         synth::sine_plus_noise(200, 0.7, 3.0, rng)};
  for (const auto& w : signals) {
    const auto f = extract_features(w);
    for (const auto& v : f.row()) {
      if (v) {
        EXPECT_TRUE(std::isfinite(*v));
      }
    }
    EXPECT_EQ(f.row().size(), feature_columns().size());
  }
}

TEST(Features, SilenceMarksVoiceFeaturesMissing) {
  const auto f = extract_features(synth::silence(0.5));
  EXPECT_FALSE(f.vocal.get("f0_mean"));
  EXPECT_FALSE(f.vocal.get("hnr_db"));
  EXPECT_FALSE(f.vocal.get("spectral_centroid"));
  EXPECT_DOUBLE_EQ(f.pause.nonspeech_ratio, 1.0);
}

TEST(Features, DeterministicAndInvariantsHold) {
  const auto w = synth::am_sine(160, 1.0, 0.2, 5.0);
  const auto a = extract_features(w), b = extract_features(w);
  EXPECT_EQ(a.row(), b.row());
  EXPECT_GE(*a.vocal.get("spectral_flatness"), 0.0);
  EXPECT_LE(*a.vocal.get("spectral_flatness"), 1.0);
  EXPECT_GE(*a.vocal.get("spectral_crest"), 1.0);
  EXPECT_GE(*a.vocal.get("jitter_local"), 0.0);
  EXPECT_GE(*a.vocal.get("shimmer_local"), 0.0);
  EXPECT_NEAR(*a.vocal.get("f0_mean"), 160.0, 2.0);
}

TEST(Features, AttentionFluxColumn) {
  const auto w = synth::am_sine(160, 0.5, 0.2, 5.0);
  const auto T = stft_magnitude(w).n_frames();
  const auto f = extract_features(w, {}, std::vector<double>(T, 1.0));
  EXPECT_EQ(f.vocal.get("spectral_flux_attn"), f.vocal.get("spectral_flux"));
  EXPECT_EQ(f.row(true).size(), feature_columns(true).size());
}
