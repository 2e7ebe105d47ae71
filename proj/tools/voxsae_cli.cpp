// voxsae command-line entry point.
//
// Every command reads optional `--config FILE` (flat `key = value`, one
// [section] per command) plus `--set key=value` overrides, and writes its
// artifacts and a resolved run.json into `--out DIR`.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "voxsae/analysis/attention.hpp"
#include "voxsae/analysis/correlate.hpp"
#include "voxsae/analysis/covariate.hpp"
#include "voxsae/core/parallel.hpp"
#include "voxsae/detector/checkpoint.hpp"
#include "voxsae/detector/train.hpp"
#include "voxsae/dsp/encoder.hpp"
#include "voxsae/dsp/features.hpp"
#include "voxsae/io/checkpoint.hpp"
#include "voxsae/io/config.hpp"
#include "voxsae/io/csv.hpp"
#include "voxsae/io/manifest.hpp"
#include "voxsae/io/sbem.hpp"
#include "voxsae/io/wav.hpp"
#include "voxsae/sae/substitute.hpp"
#include "voxsae/sae/train.hpp"
#include "voxsae/synth/corpus.hpp"
#include "voxsae/tensor/gradcheck.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace voxsae;

namespace {

// Bumped whenever any CSV/JSON layout written here changes.
constexpr int kFormatVersion = 1;

const std::set<std::string> kCommands = {"synth",     "extract-features", "train-detector", "export-pooled",
                                         "train-sae", "sweep-sae",        "correlate",      "attention-report",
                                         "gradcheck"};

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  bool force = false;
  std::size_t jobs = 1;
};

void add_common(CLI::App* sub, Common& c, bool with_jobs = false) {
  sub->add_option("--config", c.config, "config file with a [" + sub->get_name() + "] section")->check(CLI::ExistingFile);
  sub->add_option("--set", c.sets, "override one config key (key=value), repeatable");
  sub->add_option("-o,--out", c.out, "output directory")->required();
  sub->add_flag("--force", c.force, "overwrite an existing non-empty output directory");
  if (with_jobs) sub->add_option("-j,--jobs", c.jobs, "worker threads (outputs do not depend on this)")->check(CLI::PositiveNumber);
}

/// Config file section for `command`, then --set overrides. Sections for
/// other commands are allowed (one file can hold them all); unknown section
/// names are not.
void resolve_config(io::ConfigBinder& b, const std::string& command, const Common& c) {
  if (!c.config.empty()) {
    for (const auto& [name, kv] : io::read_config(c.config)) {
      if (!name.empty() && !kCommands.count(name)) throw ConfigError(c.config + ": unknown section [" + name + "]");
      if (name.empty() || name == command) b.apply(kv);
    }
  }
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    b.set(io::trim(s.substr(0, eq)), io::trim(s.substr(eq + 1)));
  }
}

fs::path prepare_out(const Common& c) {
  const fs::path dir(c.out);
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw InputError(c.out + " exists and is not a directory");
    if (!fs::is_empty(dir) && !c.force) throw InputError(c.out + " is not empty (use --force to overwrite)");
  }
  fs::create_directories(dir);
  return dir;
}

void write_snapshot(const fs::path& dir, const std::string& command, const io::ConfigBinder& b, const json& inputs,
                    std::uint64_t seed) {
  json j;
  j["format_version"] = kFormatVersion;
  j["command"] = command;
  j["seed"] = seed;
  j["inputs"] = inputs;
  j["config"] = b.snapshot();
  io::write_file_text(dir / "run.json", j.dump(2) + "\n");
}

void write_json(const fs::path& p, json j) {
  json out;
  out["format_version"] = kFormatVersion;
  for (auto& [k, v] : j.items()) out[k] = v;
  io::write_file_text(p, out.dump(2) + "\n");
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Sample ids become file names for per-sample traces.
std::string safe_file_stem(const std::string& id) {
  if (id.empty() || id == "." || id == ".." || id.find_first_of("/\\") != std::string::npos) {
    throw InputError("sample id '" + id + "' cannot be used as a file name");
  }
  return id;
}

// ---------------------------------------------------------------- inputs

dsp::Waveform load_wave(const io::Manifest& m, const io::ManifestEntry& e) {
  dsp::Waveform w = io::read_wav(m.resolve(e.path));
  if (!e.start_s && !e.end_s) return w;
  const double start = e.start_s.value_or(0.0);
  const double end = e.end_s.value_or(w.duration_s());
  if (!(start >= 0.0 && end > start)) throw InputError(e.meta.id + ": bad chunk bounds");
  const auto a = static_cast<std::size_t>(std::lround(start * w.sample_rate));
  const auto b = std::min(w.size(), static_cast<std::size_t>(std::lround(end * w.sample_rate)));
  if (a >= b) throw InputError(e.meta.id + ": chunk lies outside the recording");
  return {std::vector<double>(w.samples.begin() + static_cast<std::ptrdiff_t>(a), w.samples.begin() + static_cast<std::ptrdiff_t>(b)),
          w.sample_rate};
}

struct Sample {
  SampleMeta meta;
  Matrix frames;
  std::optional<std::vector<double>> energy;
};

/// Frames for the detector: SBEM as stored, or the filterbank encoder with
/// `encoder_dim` bands for wav entries. Energy from the manifest's energy
/// file, or per-frame RMS for wav entries.
Sample load_sample(const io::Manifest& m, const io::ManifestEntry& e, std::size_t encoder_dim) {
  Sample s;
  s.meta = e.meta;
  if (e.kind == io::SampleKind::Wav) {
    const auto w = load_wave(m, e);
    s.frames = dsp::filterbank_encoder(w, encoder_dim);
    s.energy = dsp::frame_rms(w);
  } else {
    s.frames = io::read_sbem(m.resolve(e.path));
  }
  if (e.energy) {
    const Matrix en = io::read_sbem(m.resolve(*e.energy));
    if (en.cols() != 1 || en.rows() != s.frames.rows()) {
      throw InputError(e.meta.id + ": energy trace must be " + std::to_string(s.frames.rows()) + " x 1, got " + en.shape_string());
    }
    s.energy = en.col(0);
  }
  if (s.frames.rows() == 0) throw InputError(e.meta.id + ": no frames");
  return s;
}

std::vector<Sample> load_samples(const io::Manifest& m, std::size_t encoder_dim, std::size_t jobs) {
  std::vector<Sample> out(m.size());
  parallel_for(m.size(), jobs, [&](std::size_t i) { out[i] = load_sample(m, m.entries[i], encoder_dim); });
  return out;
}

std::vector<detector::EmbeddingSequence> as_sequences(const std::vector<Sample>& s) {
  std::vector<detector::EmbeddingSequence> out;
  for (const auto& x : s) out.push_back({x.meta, x.frames});
  return out;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const Common& c, const std::string& kind) {
  if (kind != "embedding" && kind != "wav") throw ConfigError("--kind must be embedding or wav");
  synth::SynthConfig ec;
  synth::WavSynthConfig wc;
  std::string label_rule = "factor";
  io::ConfigBinder b("synth");
  if (kind == "embedding") {
    b.bind("n_speakers", ec.n_speakers).bind("samples_per_speaker", ec.samples_per_speaker).bind("seed", ec.seed);
    b.bind("t_min", ec.t_min).bind("t_max", ec.t_max).bind("span_min_frac", ec.span_min_frac).bind("span_max_frac", ec.span_max_frac);
    b.bind("N", ec.N).bind("k_factors", ec.k_factors).bind("factor_sparsity", ec.factor_sparsity);
    b.bind("intensity_min", ec.intensity_min).bind("intensity_max", ec.intensity_max);
    b.bind("label_rule", label_rule).bind("label_factor", ec.label_factor);
    b.bind("noise_std", ec.noise_std).bind("speech_level", ec.speech_level).bind("speaker_std", ec.speaker_std);
    b.bind("pause_energy", ec.pause_energy);
  } else {
    b.bind("n_speakers", wc.n_speakers).bind("samples_per_speaker", wc.samples_per_speaker).bind("seed", wc.seed);
    b.bind("duration_s", wc.duration_s).bind("gap_min_s", wc.gap_min_s).bind("gap_max_s", wc.gap_max_s);
    b.bind("pd_noise_snr_db", wc.pd_noise_snr_db).bind("hc_noise_snr_db", wc.hc_noise_snr_db).bind("sample_rate", wc.sample_rate);
  }
  resolve_config(b, "synth", c);
  ec.label_rule = synth::parse_label_rule(label_rule);
  const fs::path dir = prepare_out(c);
  if (kind == "embedding") {
    const auto corpus = synth::generate_corpus(ec);
    synth::write_embedding_corpus(dir, corpus);
    std::cout << "wrote " << corpus.samples.size() << " embedding samples to " << dir.string() << "\n";
  } else {
    const auto corpus = synth::generate_wav_corpus(wc);
    synth::write_wav_corpus(dir, corpus);
    std::cout << "wrote " << corpus.waves.size() << " wav samples to " << dir.string() << "\n";
  }
  write_snapshot(dir, "synth", b, {{"kind", kind}}, kind == "embedding" ? ec.seed : wc.seed);
  return 0;
}

// ---------------------------------------------------------------- extract-features

int cmd_extract_features(const Common& c, const std::string& manifest_path, const std::string& traces_dir) {
  dsp::FeatureConfig fc;
  io::ConfigBinder b("extract-features");
  b.bind("window_s", fc.frames.window_s).bind("hop_s", fc.frames.hop_s);
  b.bind("stats_smoothing_frames", fc.stats_smoothing_frames).bind("n_mfcc", fc.n_mfcc).bind("n_mels", fc.n_mels);
  b.bind("target_rate", fc.target_rate);
  b.bind("f0_min", fc.pitch.f_min).bind("f0_max", fc.pitch.f_max).bind("voicing_threshold", fc.pitch.voicing_threshold);
  b.bind("pause_threshold_rel", fc.pause.energy_threshold_rel).bind("pause_smoothing_frames", fc.pause.smoothing_frames);
  b.bind("long_pause_s", fc.pause.long_pause_s);
  resolve_config(b, "extract-features", c);
  fc.pause.frames = fc.frames;

  const auto m = io::read_manifest(manifest_path);
  for (const auto& e : m.entries) {
    if (e.kind != io::SampleKind::Wav) throw InputError(e.meta.id + ": feature extraction needs wav entries");
  }
  const bool with_attn = !traces_dir.empty();
  std::vector<std::vector<std::optional<double>>> rows(m.size());
  parallel_for(m.size(), c.jobs, [&](std::size_t i) {
    const auto& e = m.entries[i];
    const auto w = load_wave(m, e);
    std::vector<double> attention;
    if (with_attn) {
      const fs::path tp = fs::path(traces_dir) / (safe_file_stem(e.meta.id) + ".csv");
      attention = analysis::read_trace(io::read_csv(tp), tp.string()).attention;
    }
    rows[i] = dsp::extract_features(w, fc, attention).row(with_attn);
  });

  const fs::path dir = prepare_out(c);
  auto header = analysis::metadata_columns();
  for (const auto& k : dsp::feature_columns(with_attn)) header.push_back(k);
  io::CsvWriter csv(header);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& meta = m.entries[i].meta;
    std::vector<std::string> cells = {meta.id, meta.speaker, to_string(meta.label), to_string(meta.language), to_string(meta.sex)};
    for (const auto& v : rows[i]) cells.push_back(io::format_optional(v));
    csv.row_strings(cells);
  }
  csv.save(dir / "features.csv");
  write_snapshot(dir, "extract-features", b, {{"manifest", manifest_path}, {"traces", traces_dir}}, 0);
  std::cout << "wrote " << m.size() << " feature rows to " << (dir / "features.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- train-detector

json eval_json(const detector::EvalResult& ev, std::size_t n) {
  return {{"n_samples", n}, {"f1", opt_json(ev.f1())}, {"f1_fr", opt_json(ev.f1(Language::Fr))}, {"f1_en", opt_json(ev.f1(Language::En))}};
}

/// Held-out speakers: seeded shuffle of the sorted speaker ids, first ceil(frac * S).
std::set<std::string> holdout_speakers(const std::vector<Sample>& data, double frac, std::uint64_t seed) {
  std::set<std::string> uniq;
  for (const auto& s : data) uniq.insert(s.meta.speaker);
  std::vector<std::string> spk(uniq.begin(), uniq.end());
  Rng rng(mix_seed(seed, 21));
  for (std::size_t i = spk.size(); i > 1; --i) std::swap(spk[i - 1], spk[rng.uniform_index(i)]);
  const auto n = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(spk.size())));
  return {spk.begin(), spk.begin() + static_cast<std::ptrdiff_t>(std::min(n, spk.size()))};
}

int cmd_train_detector(const Common& c, const std::string& manifest_path) {
  detector::TrainConfig tc;
  double holdout_fraction = 0.2;
  io::ConfigBinder b("train-detector");
  b.bind("input_dim", tc.head.input_dim).bind("hidden", tc.head.hidden).bind("hidden2", tc.head.hidden2);
  b.bind("dropout_rate", tc.head.dropout_rate).bind("leaky_slope", tc.head.leaky_slope);
  b.bind("lr_peak", tc.lr_peak).bind("epochs", tc.epochs).bind("warmup_epochs", tc.warmup_epochs);
  b.bind("samples_per_epoch", tc.samples_per_epoch).bind("batch", tc.batch);
  b.bind("weight_majority", tc.weight_majority).bind("weight_minority", tc.weight_minority);
  b.bind("augment_prob", tc.augment_prob).bind("standardize_inputs", tc.standardize_inputs);
  b.bind("holdout_fraction", holdout_fraction).bind("seed", tc.seed);
  resolve_config(b, "train-detector", c);
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) throw ConfigError("holdout_fraction must be in [0,1)");

  const auto m = io::read_manifest(manifest_path);
  const auto data = load_samples(m, tc.head.input_dim, c.jobs);
  const auto held = holdout_speakers(data, holdout_fraction, tc.seed);
  std::vector<Sample> train, test;
  for (const auto& s : data) (held.count(s.meta.speaker) ? test : train).push_back(s);
  for (const auto& s : train) {
    if (s.frames.cols() != tc.head.input_dim) {
      throw InputError(s.meta.id + ": frames have " + std::to_string(s.frames.cols()) + " dims, input_dim is " +
                       std::to_string(tc.head.input_dim));
    }
  }

  const bool wav = m.entries.front().kind == io::SampleKind::Wav;
  for (const auto& e : m.entries) {
    if ((e.kind == io::SampleKind::Wav) != wav) throw InputError("manifest mixes wav and embedding entries");
  }
  detector::TrainResult res;
  if (wav) {
    std::vector<detector::WavSample> ws;
    for (const auto& e : m.entries) {
      if (!held.count(e.meta.speaker)) ws.push_back({e.meta, load_wave(m, e)});
    }
    res = detector::train_detector_wav(ws, tc);
  } else {
    const auto seqs = as_sequences(train);
    res = detector::train_detector(seqs, tc);
  }

  const fs::path dir = prepare_out(c);
  json extra;
  extra["seed"] = tc.seed;
  extra["input"] = wav ? "wav-filterbank" : "embedding";
  const auto checksum = io::write_checkpoint(dir / "detector.ckpt", detector::to_checkpoint(res.head, extra));
  json epochs = json::array();
  for (const auto& r : res.history) {
    epochs.push_back({{"epoch", r.epoch}, {"loss", r.mean_loss}, {"f1", opt_json(r.f1)}, {"f1_fr", opt_json(r.f1_fr)}, {"f1_en", opt_json(r.f1_en)}});
  }
  json metrics;
  metrics["epochs"] = epochs;
  metrics["train"] = eval_json(detector::evaluate(res.head, as_sequences(train)), train.size());
  metrics["holdout"] = test.empty() ? json(nullptr) : eval_json(detector::evaluate(res.head, as_sequences(test)), test.size());
  metrics["holdout_speakers"] = held;
  metrics["checkpoint_fnv1a"] = hex64(checksum);
  write_json(dir / "metrics.json", metrics);
  write_snapshot(dir, "train-detector", b, {{"manifest", manifest_path}}, tc.seed);
  const auto& last = res.history.back();
  std::cout << "epoch " << last.epoch << " loss " << last.mean_loss << " train F1 " << opt_json(last.f1).dump()
            << " holdout F1 " << (test.empty() ? std::string("n/a") : metrics["holdout"]["f1"].dump()) << "\n";
  return 0;
}

// ---------------------------------------------------------------- export-pooled

int cmd_export_pooled(const Common& c, const std::string& ckpt_path, const std::string& manifest_path) {
  io::ConfigBinder b("export-pooled");
  resolve_config(b, "export-pooled", c);
  const auto head = detector::from_checkpoint(io::read_checkpoint(ckpt_path));
  const auto m = io::read_manifest(manifest_path);
  io::PooledSet set;
  set.vectors = Matrix(m.size(), head.cfg.hidden);
  std::vector<std::string> traces(m.size());
  parallel_for(m.size(), c.jobs, [&](std::size_t i) {
    const auto s = load_sample(m, m.entries[i], head.cfg.input_dim);
    const auto r = detector::forward(head, s.frames, detector::Mode::Eval);
    std::copy(r.pooled.begin(), r.pooled.end(), set.vectors.row(i).begin());
    io::CsvWriter w({"frame", "attention", "energy"});
    for (std::size_t t = 0; t < r.attention.size(); ++t) {
      w.row_strings({std::to_string(t), io::format_double(r.attention[t]), s.energy ? io::format_double((*s.energy)[t]) : ""});
    }
    traces[i] = w.str();
  });
  for (const auto& e : m.entries) set.ids.push_back(e.meta.id);

  const fs::path dir = prepare_out(c);
  io::write_sbpx(dir / "pooled.sbpx", set);
  fs::create_directories(dir / "traces");
  for (std::size_t i = 0; i < m.size(); ++i) io::write_file_text(dir / "traces" / (safe_file_stem(set.ids[i]) + ".csv"), traces[i]);
  write_snapshot(dir, "export-pooled", b, {{"checkpoint", ckpt_path}, {"manifest", manifest_path}}, 0);
  std::cout << "wrote " << m.size() << " pooled vectors (" << head.cfg.hidden << " dims) to " << (dir / "pooled.sbpx").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- train-sae / sweep-sae

void bind_sae(io::ConfigBinder& b, sae::SaeTrainConfig& sc, std::string& activation) {
  b.bind("K", sc.K).bind("lr", sc.lr).bind("lambda", sc.lambda);
  b.bind("tau_start", sc.schedule.tau_start).bind("tau_end", sc.schedule.tau_end).bind("anneal_steps", sc.schedule.anneal_steps);
  b.bind("steps", sc.steps).bind("batch", sc.batch).bind("holdout_fraction", sc.holdout_fraction);
  b.bind("active_threshold", sc.active_threshold).bind("activation", activation).bind("seed", sc.seed);
}

json stats_json(const sae::CodeStats& s) {
  return {{"fidelity", s.fidelity}, {"mean_active", s.mean_active}, {"mean_mask", s.mean_mask}, {"effective_active", s.effective_active}};
}

int cmd_train_sae(const Common& c, const std::string& pooled_path, const std::string& activation_flag) {
  sae::SaeTrainConfig sc;
  std::string activation = "mask";
  io::ConfigBinder b("train-sae");
  bind_sae(b, sc, activation);
  resolve_config(b, "train-sae", c);
  if (!activation_flag.empty()) b.set("activation", activation_flag);
  sc.activation = sae::parse_activation(activation);

  const auto pooled = io::read_sbpx(pooled_path);
  const auto res = sae::train_sae(pooled.vectors, sc);
  const fs::path dir = prepare_out(c);
  const auto checksum = io::write_checkpoint(dir / "sae.ckpt", sae::to_checkpoint(res.params, sc));
  json metrics;
  metrics["activation"] = activation;
  metrics["lambda"] = sc.lambda;
  metrics["K"] = sc.K;
  metrics["n_train"] = res.train_rows.size();
  metrics["n_holdout"] = res.holdout_rows.size();
  metrics["final_loss"] = res.final_loss;
  metrics["train"] = stats_json(res.train);
  metrics["holdout"] = stats_json(res.holdout);
  metrics["checkpoint_fnv1a"] = hex64(checksum);
  write_json(dir / "metrics.json", metrics);
  write_snapshot(dir, "train-sae", b, {{"pooled", pooled_path}}, sc.seed);
  std::cout << activation << " SAE: held-out fidelity " << res.holdout.fidelity << ", mean active " << res.holdout.mean_active << "\n";
  return 0;
}

int cmd_sweep_sae(const Common& c, const std::string& pooled_path) {
  sae::SaeTrainConfig sc;
  std::string activation = "mask";
  std::vector<double> lambdas = {0.03, 0.01, 0.003, 0.001};
  std::string activations = "mask,relu";
  std::uint64_t n_seeds = 4;
  io::ConfigBinder b("sweep-sae");
  bind_sae(b, sc, activation);
  b.bind("lambdas", lambdas).bind("activations", activations).bind("n_seeds", n_seeds);
  resolve_config(b, "sweep-sae", c);
  if (lambdas.empty() || n_seeds == 0) throw ConfigError("sweep-sae: need at least one lambda and one seed");
  std::vector<sae::Activation> acts;
  {
    std::istringstream in(activations);
    std::string a;
    while (std::getline(in, a, ',')) acts.push_back(sae::parse_activation(io::trim(a)));
  }
  if (acts.empty()) throw ConfigError("sweep-sae: activations is empty");
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < n_seeds; ++s) seeds.push_back(sc.seed + s);

  const auto pooled = io::read_sbpx(pooled_path);
  const auto rows = sae::sweep_sae(pooled.vectors, sc, lambdas, acts, seeds, c.jobs);
  const fs::path dir = prepare_out(c);
  io::CsvWriter runs({"lambda", "activation", "seed", "fidelity", "mean_active", "mean_mask", "effective_active"});
  for (const auto& r : rows) {
    runs.row_strings({io::format_double(r.lambda), sae::to_string(r.activation), std::to_string(r.seed), io::format_double(r.holdout.fidelity),
                      io::format_double(r.holdout.mean_active), io::format_double(r.holdout.mean_mask),
                      io::format_double(r.holdout.effective_active)});
  }
  runs.save(dir / "sweep.csv");
  io::CsvWriter front({"activation", "lambda", "mean_active", "fidelity"});
  for (auto a : acts) {
    for (const auto& p : sae::frontier(rows, a, lambdas)) {
      front.row_strings({sae::to_string(a), io::format_double(p.lambda), io::format_double(p.active), io::format_double(p.fidelity)});
    }
  }
  front.save(dir / "frontier.csv");
  write_snapshot(dir, "sweep-sae", b, {{"pooled", pooled_path}}, sc.seed);
  std::cout << "wrote " << rows.size() << " runs to " << (dir / "sweep.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- correlate

int cmd_correlate(const Common& c, const std::string& sae_path, const std::string& det_path, const std::string& features_path,
                  const std::string& manifest_path, const std::string& covariates_path) {
  std::uint64_t seed = 0;
  std::string p_method = "t";
  std::uint64_t n_permutations = 10000;
  bool subsample = true;
  io::ConfigBinder b("correlate");
  b.bind("seed", seed).bind("p_method", p_method).bind("n_permutations", n_permutations).bind("subsample_per_speaker", subsample);
  resolve_config(b, "correlate", c);
  analysis::CorrelateOptions opt;
  opt.p.method = analysis::parse_pmethod(p_method);
  opt.p.n_permutations = n_permutations;
  opt.subsample_per_speaker = subsample;

  const auto loaded = sae::sae_from_checkpoint(io::read_checkpoint(sae_path));
  const auto head = detector::from_checkpoint(io::read_checkpoint(det_path));
  if (loaded.params.N != head.cfg.hidden) {
    throw InputError("SAE input size " + std::to_string(loaded.params.N) + " differs from detector pooled size " + std::to_string(head.cfg.hidden));
  }
  const auto m = io::read_manifest(manifest_path);
  const auto fm = analysis::feature_matrix_from_csv(io::read_csv(features_path), features_path);

  Matrix acts(m.size(), loaded.params.K);
  std::vector<double> preds(m.size());
  std::vector<std::string> ids, speakers;
  parallel_for(m.size(), c.jobs, [&](std::size_t i) {
    const auto s = load_sample(m, m.entries[i], head.cfg.input_dim);
    const auto r = detector::forward(head, s.frames, detector::Mode::Eval);
    preds[i] = r.prob;
    const auto a = sae::encode_with(loaded.params, loaded.activation, r.pooled, loaded.tau);
    std::copy(a.f.begin(), a.f.end(), acts.row(i).begin());
  });
  for (const auto& e : m.entries) {
    ids.push_back(e.meta.id);
    speakers.push_back(e.meta.speaker);
  }

  const auto rep = analysis::correlate_dictionary(acts, ids, preds, fm, seed, opt);
  const fs::path dir = prepare_out(c);
  io::write_file_text(dir / "report.csv", analysis::report_csv(rep));
  io::CsvWriter skipped({"entry", "feature", "reason"});
  for (const auto& s : rep.skipped) skipped.row_strings({std::to_string(s.entry), s.feature, s.reason});
  skipped.save(dir / "skipped.csv");

  if (!covariates_path.empty()) {
    const auto table = io::read_csv(covariates_path);
    std::set<std::string> names;
    const std::size_t nc = table.column("covariate_name");
    for (const auto& r : table.rows) names.insert(r[nc]);
    io::CsvWriter cov({"covariate", "entry", "rho", "p", "n_subjects"});
    analysis::POptions po = opt.p;
    for (const auto& name : names) {
      const auto values = analysis::read_covariates(table, name);
      for (std::size_t k = 0; k <= loaded.params.K; ++k) {
        const std::vector<double> scores = k < loaded.params.K ? acts.col(k) : preds;
        const auto r = analysis::subject_covariate_corr(scores, speakers, values, po);
        cov.row_strings({name, k < loaded.params.K ? std::to_string(k) : "prediction", io::format_optional(r.rho),
                         r.rho ? io::format_double(r.p.p) : "", std::to_string(r.n_subjects)});
      }
    }
    cov.save(dir / "covariates.csv");
  }
  write_snapshot(dir, "correlate", b,
                 {{"sae", sae_path}, {"detector", det_path}, {"features", features_path}, {"manifest", manifest_path}, {"covariates", covariates_path}},
                 seed);
  std::cout << rep.rows.size() << " of " << rep.total_tests << " tests defined";
  if (!rep.rows.empty()) std::cout << "; top |rho| " << std::abs(rep.rows.front().rho) << " (entry " << rep.rows.front().entry << ", " << rep.rows.front().feature << ")";
  std::cout << "\n";
  if (rep.rows.empty()) throw NumericError("correlate: every statistic is undefined (see skipped.csv)");
  return 0;
}

// ---------------------------------------------------------------- attention-report

int cmd_attention_report(const Common& c, const std::string& det_path, const std::string& manifest_path) {
  analysis::AnticorrConfig ac;
  io::ConfigBinder b("attention-report");
  b.bind("smooth_window_frames", ac.smooth_window_frames).bind("active_threshold_rel", ac.active_threshold_rel);
  b.bind("max_lag_frames", ac.max_lag_frames);
  resolve_config(b, "attention-report", c);
  ac.validate();

  const auto head = detector::from_checkpoint(io::read_checkpoint(det_path));
  const auto m = io::read_manifest(manifest_path);
  std::vector<analysis::XcorrResult> results(m.size());
  std::vector<std::string> traces(m.size());
  parallel_for(m.size(), c.jobs, [&](std::size_t i) {
    const auto s = load_sample(m, m.entries[i], head.cfg.input_dim);
    if (!s.energy) throw InputError(s.meta.id + ": no energy trace (add an \"energy\" file to the manifest entry)");
    const auto r = detector::forward(head, s.frames, detector::Mode::Eval);
    results[i] = analysis::attention_energy_xcorr(r.attention, *s.energy, ac);
    traces[i] = analysis::trace_csv(r.attention, *s.energy);
  });

  const fs::path dir = prepare_out(c);
  std::vector<std::string> header = {"sample_id", "speaker_id", "label", "language", "sex", "xcorr"};
  const long L = static_cast<long>(ac.max_lag_frames);
  if (L > 0) {
    for (long l = -L; l <= L; ++l) header.push_back("lag_" + std::to_string(l));
  }
  io::CsvWriter csv(header);
  std::vector<double> defined;
  fs::create_directories(dir / "traces");
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& meta = m.entries[i].meta;
    std::vector<std::string> row = {meta.id, meta.speaker, to_string(meta.label), to_string(meta.language), to_string(meta.sex),
                                    io::format_optional(results[i].lag0)};
    for (const auto& v : results[i].by_lag) row.push_back(io::format_optional(v));
    csv.row_strings(row);
    if (results[i].lag0) defined.push_back(*results[i].lag0);
    io::write_file_text(dir / "traces" / (safe_file_stem(meta.id) + ".csv"), traces[i]);
  }
  csv.save(dir / "anticorr.csv");
  json summary;
  summary["n_samples"] = m.size();
  summary["n_defined"] = defined.size();
  if (!defined.empty()) {
    std::vector<double> sorted = defined;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    summary["mean"] = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
    summary["median"] = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    summary["fraction_negative"] = static_cast<double>(std::count_if(sorted.begin(), sorted.end(), [](double v) { return v < 0.0; })) / static_cast<double>(n);
  }
  write_json(dir / "summary.json", summary);
  write_snapshot(dir, "attention-report", b, {{"detector", det_path}, {"manifest", manifest_path}}, 0);
  std::cout << defined.size() << " of " << m.size() << " samples defined";
  if (!defined.empty()) std::cout << "; median xcorr " << summary["median"].get<double>();
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------- gradcheck

struct CheckRow {
  std::string model;
  GradCheckEntry entry;
};

std::vector<CheckRow> run_gradchecks(std::uint64_t seed, bool inject) {
  std::vector<CheckRow> out;
  auto collect = [&](const std::string& model, const GradCheckReport& rep) {
    for (const auto& e : rep.per_tensor) out.push_back({model, e});
  };
  Rng rng(seed);
  auto randn = [&](std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (double& v : m.data()) v = rng.normal();
    return m;
  };

  {  // detector BCE over a small weighted batch, eval mode (no dropout)
    detector::HeadConfig hc;
    hc.input_dim = 6;
    hc.hidden = 5;
    hc.hidden2 = 4;
    detector::ClassifierHead h(hc);
    h.init(rng);
    for (auto* p : h.params()) {
      for (double& v : p->value.data()) v += 0.1 * rng.normal();
    }
    std::vector<Matrix> xs = {randn(3, 6), randn(5, 6), randn(4, 6)};
    const std::vector<double> ys = {1.0, 0.0, 1.0}, ws = {0.7, 1.5, 1.0};
    auto loss = [&] {
      double L = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) L += detector::bce_loss(detector::forward(h, xs[i], detector::Mode::Eval).logit, ys[i], ws[i]);
      return L / static_cast<double>(xs.size());
    };
    h.zero_grad();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto r = detector::forward(h, xs[i], detector::Mode::Eval);
      detector::backward(h, r.cache, detector::bce_grad(r.logit, ys[i], ws[i]) / static_cast<double>(xs.size()));
    }
    if (inject) h.W2.grad.data()[0] += 0.5;
    auto params = h.params();
    collect("detector_bce", finite_diff_check(loss, params, 1e-5));
  }
  for (auto act : {sae::Activation::Mask, sae::Activation::Relu}) {
    sae::SaeParams p(8, 8);
    p.init(rng);
    for (auto* t : p.params()) {
      for (double& v : t->value.data()) v += 0.3 * rng.normal();
    }
    std::vector<std::vector<double>> xs(4, std::vector<double>(8));
    for (auto& x : xs) {
      for (double& v : x) v = rng.normal();
    }
    const double tau = 0.6, lambda = 0.05;
    p.zero_grad();
    for (const auto& x : xs) sae::accumulate_grad(p, x, tau, lambda, act, 1.0 / static_cast<double>(xs.size()));
    auto loss = [&] {
      double L = 0.0;
      for (const auto& x : xs) L += sae::total_loss(x, p, tau, lambda, act).total / static_cast<double>(xs.size());
      return L;
    };
    auto params = p.params();
    collect(std::string("sae_") + sae::to_string(act), finite_diff_check(loss, params, 1e-5));
  }
  return out;
}

int cmd_gradcheck(std::uint64_t seed, bool inject, double tol, const std::string& out_dir, bool force) {
  const auto rows = run_gradchecks(seed, inject);
  io::CsvWriter csv({"model", "tensor", "worst_index", "analytic", "numeric", "rel_error", "pass"});
  bool ok = true;
  std::printf("%-14s %-8s %6s %14s %14s %11s  %s\n", "model", "tensor", "index", "analytic", "numeric", "rel_error", "result");
  for (const auto& r : rows) {
    const bool pass = r.entry.rel_error < tol;
    ok = ok && pass;
    std::printf("%-14s %-8s %6zu %14.6e %14.6e %11.3e  %s\n", r.model.c_str(), r.entry.name.c_str(), r.entry.worst_index,
                r.entry.analytic, r.entry.numeric, r.entry.rel_error, pass ? "ok" : "FAIL");
    csv.row_strings({r.model, r.entry.name, std::to_string(r.entry.worst_index), io::format_double(r.entry.analytic),
                     io::format_double(r.entry.numeric), io::format_double(r.entry.rel_error), pass ? "1" : "0"});
  }
  if (!out_dir.empty()) {
    Common c;
    c.out = out_dir;
    c.force = force;
    const fs::path dir = prepare_out(c);
    csv.save(dir / "gradcheck.csv");
    io::ConfigBinder b("gradcheck");
    write_snapshot(dir, "gradcheck", b, {{"tolerance", tol}, {"inject_error", inject}}, seed);
  }
  std::printf("%s: max relative error %s tolerance %.1e\n", ok ? "PASS" : "FAIL", ok ? "below" : "above", tol);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxsae: attention-pooled speech detector, mask sparse autoencoder and feature correlation pipeline"};
  app.require_subcommand(1);

  Common c;
  std::string kind = "embedding", manifest, traces, checkpoint, pooled, activation, sae_ckpt, features, covariates, gc_out;
  std::uint64_t gc_seed = 0;
  double gc_tol = 1e-4;
  bool gc_inject = false;

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common(synth, c);
  synth->add_option("--kind", kind, "embedding (planted factors) or wav (tone/gap/tone waveforms)")->check(CLI::IsMember({"embedding", "wav"}));

  auto* fx = app.add_subcommand("extract-features", "acoustic feature CSV from a wav manifest");
  add_common(fx, c, true);
  fx->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
  fx->add_option("--traces", traces, "attention traces from export-pooled; adds spectral_flux_attn")->check(CLI::ExistingDirectory);

  auto* td = app.add_subcommand("train-detector", "train the attention-pooled classifier head");
  add_common(td, c, true);
  td->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);

  auto* ep = app.add_subcommand("export-pooled", "pooled vectors and attention traces from a trained detector");
  add_common(ep, c, true);
  ep->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  ep->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);

  auto* ts = app.add_subcommand("train-sae", "train a sparse autoencoder on pooled vectors");
  add_common(ts, c);
  ts->add_option("--pooled", pooled)->required()->check(CLI::ExistingFile);
  ts->add_option("--activation", activation, "mask or relu (overrides config)")->check(CLI::IsMember({"mask", "relu"}));

  auto* sw = app.add_subcommand("sweep-sae", "lambda x activation x seed sweep with frontier CSV");
  add_common(sw, c, true);
  sw->add_option("--pooled", pooled)->required()->check(CLI::ExistingFile);

  auto* co = app.add_subcommand("correlate", "Spearman report between dictionary activations and features");
  add_common(co, c, true);
  co->add_option("--sae", sae_ckpt)->required()->check(CLI::ExistingFile);
  co->add_option("--detector", checkpoint)->required()->check(CLI::ExistingFile);
  co->add_option("--features", features)->required()->check(CLI::ExistingFile);
  co->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
  co->add_option("--covariates", covariates, "subject_id,covariate_name,value CSV")->check(CLI::ExistingFile);

  auto* ar = app.add_subcommand("attention-report", "per-sample attention/energy anticorrelation");
  add_common(ar, c, true);
  ar->add_option("--detector", checkpoint)->required()->check(CLI::ExistingFile);
  ar->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);

  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of every model gradient");
  gc->add_option("--seed", gc_seed);
  gc->add_option("--tolerance", gc_tol);
  gc->add_option("-o,--out", gc_out, "optional directory for gradcheck.csv");
  gc->add_flag("--force", c.force);
  gc->add_flag("--inject-error", gc_inject, "corrupt one analytic gradient (checks the checker)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) return cmd_synth(c, kind);
    if (*fx) return cmd_extract_features(c, manifest, traces);
    if (*td) return cmd_train_detector(c, manifest);
    if (*ep) return cmd_export_pooled(c, checkpoint, manifest);
    if (*ts) return cmd_train_sae(c, pooled, activation);
    if (*sw) return cmd_sweep_sae(c, pooled);
    if (*co) return cmd_correlate(c, sae_ckpt, checkpoint, features, manifest, covariates);
    if (*ar) return cmd_attention_report(c, checkpoint, manifest);
    if (*gc) return cmd_gradcheck(gc_seed, gc_inject, gc_tol, gc_out, c.force);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
