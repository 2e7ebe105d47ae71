#pragma once

#include <json.hpp>

#include "voxsae/detector/head.hpp"
#include "voxsae/io/checkpoint.hpp"

namespace voxsae::detector {

inline io::Checkpoint to_checkpoint(const ClassifierHead& h, nlohmann::ordered_json extra = nlohmann::ordered_json::object()) {
  io::Checkpoint ck;
  for (const auto* p : h.params()) ck.tensors.push_back({p->name, p->value});
  ck.tensors.push_back({"in_mean", Matrix::column(h.in_mean)});
  ck.tensors.push_back({"in_scale", Matrix::column(h.in_scale)});
  nlohmann::ordered_json c;
  c["model"] = "detector";
  c["format_version"] = io::kCheckpointVersion;
  c["input_dim"] = h.cfg.input_dim;
  c["hidden"] = h.cfg.hidden;
  c["hidden2"] = h.cfg.hidden2;
  c["dropout_rate"] = h.cfg.dropout_rate;
  c["leaky_slope"] = h.cfg.leaky_slope;
  for (const auto& [k, v] : extra.items()) c[k] = v;
  ck.config = c;
  return ck;
}

inline ClassifierHead from_checkpoint(const io::Checkpoint& ck) {
  if (ck.config.value("model", "") != "detector") throw InputError("checkpoint is not a detector checkpoint");
  HeadConfig hc;
  hc.input_dim = ck.config.at("input_dim").get<std::size_t>();
  hc.hidden = ck.config.at("hidden").get<std::size_t>();
  hc.hidden2 = ck.config.at("hidden2").get<std::size_t>();
  hc.dropout_rate = ck.config.at("dropout_rate").get<double>();
  hc.leaky_slope = ck.config.at("leaky_slope").get<double>();
  ClassifierHead h(hc);
  for (auto* p : h.params()) {
    const Matrix& v = ck.get(p->name);
    if (!v.same_shape(p->value)) throw InputError("checkpoint tensor '" + p->name + "' has shape " + v.shape_string());
    p->value = v;
  }
  const Matrix& mean = ck.get("in_mean");
  const Matrix& scale = ck.get("in_scale");
  if (mean.size() != hc.input_dim || scale.size() != hc.input_dim) throw InputError("checkpoint: bad standardizer shape");
  h.in_mean = mean.data();
  h.in_scale = scale.data();
  return h;
}

}  // namespace voxsae::detector
