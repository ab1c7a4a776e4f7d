#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "spikebench/error.hpp"
#include "spikebench/model.hpp"

namespace spikebench {

// Affine part of one layer, no activation.
inline std::vector<double> apply_layer(const Layer& layer, std::span<const double> x) {
  if (static_cast<int>(x.size()) != input_size(layer))
    throw ShapeMismatch("layer '" + layer_name(layer) + "' expects " + std::to_string(input_size(layer)) +
                        " inputs, got " + std::to_string(x.size()));
  if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
    std::vector<double> y(dense->bias);
    for (int o = 0; o < dense->out_features; ++o) {
      const double* row = dense->weight.data() + static_cast<std::size_t>(o) * dense->in_features;
      double acc = 0.0;
      for (int i = 0; i < dense->in_features; ++i) acc += row[i] * x[i];
      y[o] += acc;
    }
    return y;
  }
  const auto& conv = std::get<Conv2dLayer>(layer);
  const int oh = conv.out_height(), ow = conv.out_width();
  std::vector<double> y(static_cast<std::size_t>(conv.output_size()));
  for (int oc = 0; oc < conv.out_channels; ++oc)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double acc = conv.bias[oc];
        for (int ic = 0; ic < conv.in_channels; ++ic)
          for (int ky = 0; ky < conv.kernel_h; ++ky) {
            const int iy = oy * conv.stride - conv.padding + ky;
            if (iy < 0 || iy >= conv.in_height) continue;
            for (int kx = 0; kx < conv.kernel_w; ++kx) {
              const int ix = ox * conv.stride - conv.padding + kx;
              if (ix < 0 || ix >= conv.in_width) continue;
              acc += conv.w(oc, ic, ky, kx) * x[(static_cast<std::size_t>(ic) * conv.in_height + iy) * conv.in_width + ix];
            }
          }
        y[(static_cast<std::size_t>(oc) * oh + oy) * ow + ox] = acc;
      }
  return y;
}

struct ForwardResult {
  std::vector<double> logits;
  std::vector<std::vector<double>> activations;  // post-ReLU, one per hidden layer
};

// Reference forward pass: affine + ReLU on every hidden layer, linear output.
inline ForwardResult dnn_forward(const DnnModel& dnn, std::span<const double> input) {
  if (static_cast<int>(input.size()) != dnn.input_size())
    throw ShapeMismatch("input has " + std::to_string(input.size()) + " values, model expects " +
                        std::to_string(dnn.input_size()));
  ForwardResult out;
  std::vector<double> x(input.begin(), input.end());
  for (std::size_t l = 0; l < dnn.layers.size(); ++l) {
    x = apply_layer(dnn.layers[l], x);
    if (l + 1 < dnn.layers.size()) {
      for (double& v : x) v = std::max(v, 0.0);
      out.activations.push_back(x);
    }
  }
  out.logits = std::move(x);
  return out;
}

}  // namespace spikebench
