#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spikebench/error.hpp"
#include "spikebench/model.hpp"
#include "spikebench/rng.hpp"

namespace spikebench {

// Dense ReLU MLP with seeded synthetic parameters: weights uniform in
// +-sqrt(6 / fan_in), biases uniform in +-0.05, every value rounded to float32
// so a written model reads back identically. `sizes` is {inputs, hidden...,
// outputs}.
inline DnnModel generate_toy_model(std::span<const int> sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw InvalidInput("toy model needs an input size and at least one layer");
  for (int s : sizes)
    if (s < 1) throw InvalidInput("layer sizes must be positive");
  Rng rng(seed);
  auto draw = [&](double bound) {
    return static_cast<double>(static_cast<float>((2.0 * rng.uniform() - 1.0) * bound));
  };
  DnnModel dnn;
  dnn.input_shape = {sizes[0]};
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    DenseLayer d;
    d.name = "fc" + std::to_string(l);
    d.in_features = sizes[l - 1];
    d.out_features = sizes[l];
    const double bound = std::sqrt(6.0 / d.in_features);
    d.weight.resize(static_cast<std::size_t>(d.in_features) * d.out_features);
    for (double& w : d.weight) w = draw(bound);
    d.bias.resize(static_cast<std::size_t>(d.out_features));
    for (double& b : d.bias) b = draw(0.05);
    dnn.layers.emplace_back(std::move(d));
  }
  dnn.validate();
  return dnn;
}

}  // namespace spikebench
