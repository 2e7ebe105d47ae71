#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <json.hpp>

#include "voxsae/detector/evaluate.hpp"
#include "voxsae/detector/head.hpp"
#include "voxsae/io/checkpoint.hpp"
#include "voxsae/sae/model.hpp"
#include "voxsae/sae/train.hpp"

namespace voxsae::sae {

struct SubstitutionScore {
  std::optional<double> f1_original, f1_substituted;
  double abs_drop = 0.0;  // |F1_original - F1_substituted|, as a fraction
  std::vector<double> prob_original, prob_substituted;
};

/// Runs the head once normally and once with the SAE reconstruction spliced in after pooling.
inline SubstitutionScore substitute_and_score(const detector::ClassifierHead& head, const SaeParams& p, Activation act,
                                              double tau, std::span<const detector::EmbeddingSequence> data) {
  if (p.N != head.cfg.hidden) {
    throw DimensionError("substitute: SAE width " + std::to_string(p.N) + " != pooled width " +
                         std::to_string(head.cfg.hidden));
  }
  SubstitutionScore s;
  std::vector<SampleMeta> metas;
  for (const auto& d : data) {
    const auto fr = detector::forward(head, d.frames, detector::Mode::Eval);
    const auto a = encode_with(p, act, fr.pooled, tau);
    const auto x_hat = decode(p, a.f);
    s.prob_original.push_back(fr.prob);
    s.prob_substituted.push_back(detector::sigmoid(detector::head_from_pooled(head, x_hat, detector::Mode::Eval, nullptr)));
    metas.push_back(d.meta);
  }
  s.f1_original = detector::score_predictions(s.prob_original, metas).f1();
  s.f1_substituted = detector::score_predictions(s.prob_substituted, metas).f1();
  if (s.f1_original && s.f1_substituted) s.abs_drop = std::abs(*s.f1_original - *s.f1_substituted);
  return s;
}

inline io::Checkpoint to_checkpoint(const SaeParams& p, const SaeTrainConfig& cfg,
                                    nlohmann::ordered_json extra = nlohmann::ordered_json::object()) {
  io::Checkpoint ck;
  for (const auto* t : p.params()) ck.tensors.push_back({t->name, t->value});
  nlohmann::ordered_json c;
  c["model"] = "sae";
  c["format_version"] = io::kCheckpointVersion;
  c["N"] = p.N;
  c["K"] = p.K;
  c["activation"] = to_string(cfg.activation);
  c["lambda"] = cfg.lambda;
  c["lr"] = cfg.lr;
  c["tau_start"] = cfg.schedule.tau_start;
  c["tau_end"] = cfg.schedule.tau_end;
  c["anneal_steps"] = cfg.schedule.anneal_steps;
  c["steps"] = cfg.steps;
  c["batch"] = cfg.batch;
  c["holdout_fraction"] = cfg.holdout_fraction;
  c["active_threshold"] = cfg.active_threshold;
  c["seed"] = cfg.seed;
  c["adam_beta1"] = cfg.adam.beta1;
  c["adam_beta2"] = cfg.adam.beta2;
  c["adam_epsilon"] = cfg.adam.epsilon;
  for (const auto& [k, v] : extra.items()) c[k] = v;
  ck.config = c;
  return ck;
}

struct LoadedSae {
  SaeParams params;
  Activation activation;
  double tau;
};

inline LoadedSae sae_from_checkpoint(const io::Checkpoint& ck) {
  if (ck.config.value("model", "") != "sae") throw InputError("checkpoint is not an SAE checkpoint");
  LoadedSae out{SaeParams(ck.config.at("N").get<std::size_t>(), ck.config.at("K").get<std::size_t>()),
                parse_activation(ck.config.at("activation").get<std::string>()), ck.config.at("tau_end").get<double>()};
  for (auto* t : out.params.params()) {
    const Matrix& v = ck.get(t->name);
    if (!v.same_shape(t->value)) throw InputError("checkpoint tensor '" + t->name + "' has shape " + v.shape_string());
    t->value = v;
  }
  return out;
}

}  // namespace voxsae::sae
