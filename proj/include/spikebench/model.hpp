#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spikebench/coding.hpp"
#include "spikebench/error.hpp"
#include "spikebench/neuron.hpp"
#include "spikebench/scale_plan.hpp"

namespace spikebench {

struct DenseLayer {
  std::string name;
  int in_features = 0;
  int out_features = 0;
  std::vector<double> weight;  // out x in, row-major
  std::vector<double> bias;    // out

  int input_size() const { return in_features; }
  int output_size() const { return out_features; }
  double w(int out, int in) const { return weight[static_cast<std::size_t>(out) * in_features + in]; }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Input and output are flattened channel-major (c, y, x).
struct Conv2dLayer {
  std::string name;
  int in_channels = 0, in_height = 0, in_width = 0;
  int out_channels = 0;
  int kernel_h = 0, kernel_w = 0;
  int stride = 1;
  int padding = 0;
  std::vector<double> weight;  // out_c x in_c x kh x kw
  std::vector<double> bias;    // out_c

  int out_height() const { return (in_height + 2 * padding - kernel_h) / stride + 1; }
  int out_width() const { return (in_width + 2 * padding - kernel_w) / stride + 1; }
  int input_size() const { return in_channels * in_height * in_width; }
  int output_size() const { return out_channels * out_height() * out_width(); }
  double w(int oc, int ic, int ky, int kx) const {
    return weight[((static_cast<std::size_t>(oc) * in_channels + ic) * kernel_h + ky) * kernel_w + kx];
  }
  friend bool operator==(const Conv2dLayer&, const Conv2dLayer&) = default;
};

using Layer = std::variant<DenseLayer, Conv2dLayer>;

inline int input_size(const Layer& l) {
  return std::visit([](const auto& x) { return x.input_size(); }, l);
}
inline int output_size(const Layer& l) {
  return std::visit([](const auto& x) { return x.output_size(); }, l);
}
inline const std::string& layer_name(const Layer& l) {
  return std::visit([](const auto& x) -> const std::string& { return x.name; }, l);
}
inline std::vector<double>& layer_weights(Layer& l) {
  return std::visit([](auto& x) -> std::vector<double>& { return x.weight; }, l);
}
inline std::vector<double>& layer_bias(Layer& l) {
  return std::visit([](auto& x) -> std::vector<double>& { return x.bias; }, l);
}
inline const std::vector<double>& layer_weights(const Layer& l) {
  return std::visit([](const auto& x) -> const std::vector<double>& { return x.weight; }, l);
}
inline const std::vector<double>& layer_bias(const Layer& l) {
  return std::visit([](const auto& x) -> const std::vector<double>& { return x.bias; }, l);
}

// Feedforward network with ReLU between layers and a linear output layer.
struct DnnModel {
  std::vector<int> input_shape;
  std::vector<Layer> layers;

  int input_size() const {
    return std::accumulate(input_shape.begin(), input_shape.end(), 1, std::multiplies<>());
  }
  int output_size() const { return layers.empty() ? 0 : spikebench::output_size(layers.back()); }

  void validate() const {
    if (layers.empty()) throw InvalidInput("model has no layers");
    if (input_shape.empty()) throw InvalidInput("model has no input shape");
    int size = input_size();
    for (const auto& layer : layers) {
      const auto& name = layer_name(layer);
      if (const auto* conv = std::get_if<Conv2dLayer>(&layer)) {
        if (conv->in_channels < 1 || conv->out_channels < 1 || conv->kernel_h < 1 || conv->kernel_w < 1 ||
            conv->stride < 1 || conv->padding < 0 || conv->out_height() < 1 || conv->out_width() < 1)
          throw ShapeMismatch("layer '" + name + "' has an invalid convolution geometry");
        if (conv->weight.size() != static_cast<std::size_t>(conv->out_channels) * conv->in_channels *
                                       conv->kernel_h * conv->kernel_w ||
            conv->bias.size() != static_cast<std::size_t>(conv->out_channels))
          throw ShapeMismatch("layer '" + name + "' parameter sizes do not match its shape");
      } else {
        const auto& dense = std::get<DenseLayer>(layer);
        if (dense.in_features < 1 || dense.out_features < 1 ||
            dense.weight.size() != static_cast<std::size_t>(dense.in_features) * dense.out_features ||
            dense.bias.size() != static_cast<std::size_t>(dense.out_features))
          throw ShapeMismatch("layer '" + name + "' parameter sizes do not match its shape");
      }
      if (spikebench::input_size(layer) != size)
        throw ShapeMismatch("layer '" + name + "' expects " + std::to_string(spikebench::input_size(layer)) +
                            " inputs but receives " + std::to_string(size));
      for (double v : layer_weights(layer))
        if (!std::isfinite(v)) throw InvalidInput("layer '" + name + "' has a non-finite weight");
      for (double v : layer_bias(layer))
        if (!std::isfinite(v)) throw InvalidInput("layer '" + name + "' has a non-finite bias");
      size = spikebench::output_size(layer);
    }
  }
};

// Firing-window start of every spiking layer (input encoding first) for
// ttfs/ttas: each layer fires only after the previous one has finished,
// including its burst tail and the one-step synaptic delay.
inline std::vector<int> default_window_offsets(const CodingConfig& cfg, std::size_t spiking_layers) {
  std::vector<int> offsets(spiking_layers, 0);
  if (!is_temporal(cfg.scheme)) return offsets;
  const int stride = cfg.timesteps + cfg.burst_length() - 1;
  for (std::size_t l = 0; l < spiking_layers; ++l) offsets[l] = static_cast<int>(l) * stride;
  return offsets;
}

// Converted network. Weights are the DNN weights with any ScalePlan folded in;
// spiking layers are the input encoding plus every hidden layer, the output
// layer only integrates.
struct SnnModel {
  DnnModel net;
  CodingConfig coding;
  std::vector<double> thresholds;   // one per layer; the output entry is unused
  std::vector<int> window_offsets;  // one per spiking layer, ttfs/ttas only
  std::optional<ScalePlan> applied_plan;

  std::size_t num_layers() const { return net.layers.size(); }
  std::size_t spiking_layers() const { return net.layers.size(); }

  ResetMode reset_mode() const {
    return is_temporal(coding.scheme) ? ResetMode::phasic_burst(coding.burst_length())
                                      : ResetMode::subtract_threshold();
  }

  // Length of every spike train in the network.
  int total_steps() const {
    if (!is_temporal(coding.scheme)) return coding.timesteps;
    int end = 0;
    for (int off : window_offsets) end = std::max(end, off + coding.timesteps + coding.burst_length() - 1);
    return end;
  }

  void validate() const {
    net.validate();
    coding.validate();
    if (thresholds.size() != net.layers.size())
      throw InvalidConfig("need one threshold per layer");
    for (double th : thresholds)
      if (!std::isfinite(th) || !(th > 0.0)) throw InvalidConfig("thresholds must be finite and > 0");
    if (is_temporal(coding.scheme)) {
      if (window_offsets.size() != spiking_layers())
        throw InvalidConfig("need one window offset per spiking layer");
      for (int off : window_offsets)
        if (off < 0) throw InvalidConfig("window offsets must be >= 0");
    }
    if (applied_plan) applied_plan->validate();
  }
};

// Copies the DNN parameters and attaches thresholds (one value for every
// layer, or one per layer).
inline SnnModel convert(const DnnModel& dnn, const CodingConfig& cfg, std::span<const double> thetas) {
  dnn.validate();
  cfg.validate();
  SnnModel snn;
  snn.net = dnn;
  snn.coding = cfg;
  if (thetas.size() == 1)
    snn.thresholds.assign(dnn.layers.size(), thetas[0]);
  else if (thetas.size() == dnn.layers.size())
    snn.thresholds.assign(thetas.begin(), thetas.end());
  else
    throw InvalidConfig("expected 1 or " + std::to_string(dnn.layers.size()) + " thresholds, got " +
                        std::to_string(thetas.size()));
  snn.window_offsets = default_window_offsets(cfg, snn.spiking_layers());
  snn.validate();
  return snn;
}

inline SnnModel convert(const DnnModel& dnn, const CodingConfig& cfg) {
  const double theta = cfg.theta;
  return convert(dnn, cfg, std::span<const double>(&theta, 1));
}

}  // namespace spikebench
