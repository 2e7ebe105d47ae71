#pragma once

#include <string>
#include <utility>

#include "voxsae/tensor/matrix.hpp"

namespace voxsae {

/// A trainable tensor and its accumulated gradient.
struct ParamTensor {
  std::string name;
  Matrix value;
  Matrix grad;

  ParamTensor() = default;
  ParamTensor(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad.fill(0.0); }
};

}  // namespace voxsae
