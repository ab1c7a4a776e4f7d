#pragma once

#include <random>
#include <string>
#include <vector>

#include "spikebench/spikebench.hpp"

namespace testutil {

using namespace spikebench;

// Dense layer from a row-major out x in weight list.
inline DenseLayer dense(std::string name, int in, int out, std::vector<double> w, std::vector<double> b) {
  DenseLayer d;
  d.name = std::move(name);
  d.in_features = in;
  d.out_features = out;
  d.weight = std::move(w);
  d.bias = std::move(b);
  return d;
}

inline DnnModel mlp(std::vector<DenseLayer> layers) {
  DnnModel m;
  m.input_shape = {layers.front().in_features};
  for (auto& l : layers) m.layers.emplace_back(std::move(l));
  m.validate();
  return m;
}

// Random MLP: weights N(0, 0.6 / sqrt(fan_in)), biases in [-0.02, 0.02].
inline DnnModel random_mlp(std::vector<int> sizes, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> w(0.0, 1.0);
  std::uniform_real_distribution<double> b(-0.02, 0.02);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    std::vector<double> wt(static_cast<std::size_t>(sizes[l - 1]) * sizes[l]), bs(sizes[l]);
    for (auto& x : wt) x = w(gen) * 0.6 / std::sqrt(sizes[l - 1]);
    for (auto& x : bs) x = b(gen);
    layers.push_back(dense("fc" + std::to_string(l), sizes[l - 1], sizes[l], wt, bs));
  }
  return mlp(std::move(layers));
}

inline std::vector<double> random_input(int n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = u(gen);
  return x;
}

inline const char* data_dir() { return SPIKEBENCH_DATA_DIR; }

inline Dataset bundled_mnist() {
  const std::string d = data_dir();
  return load_idx(d + "/mnist1k-images.idx3", d + "/mnist1k-labels.idx1");
}

inline DnnModel fixture_mlp() { return read_dnn(std::string(data_dir()) + "/mlp.snnx.json"); }

}  // namespace testutil
