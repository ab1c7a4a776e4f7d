#pragma once

#include <cmath>

#include "spikebench/coding.hpp"
#include "spikebench/error.hpp"
#include "spikebench/model.hpp"
#include "spikebench/scale_plan.hpp"

namespace spikebench {

namespace detail {

inline void check_scaled(const Layer& layer, std::size_t l) {
  for (double w : layer_weights(layer))
    if (!std::isfinite(w)) throw NumericFailure("scaled weights overflow in layer '" + layer_name(layer) + "'", int(l));
  for (double b : layer_bias(layer))
    if (!std::isfinite(b)) throw NumericFailure("scaled biases overflow in layer '" + layer_name(layer) + "'", int(l));
}

}  // namespace detail

// W' = C W on every layer (biases too unless scale_biases is false).
// Thresholds are left alone.
inline SnnModel scale_weights(SnnModel model, double C, bool scale_biases = true) {
  if (!std::isfinite(C)) throw InvalidInput("scale factor must be finite");
  if (!(C > 0.0)) throw InvalidInput("scale factor must be > 0");
  if (C == 1.0) return model;
  for (std::size_t l = 0; l < model.net.layers.size(); ++l) {
    auto& layer = model.net.layers[l];
    for (double& w : layer_weights(layer)) w *= C;
    if (scale_biases)
      for (double& b : layer_bias(layer)) b *= C;
    detail::check_scaled(layer, l);
  }
  return model;
}

// Folds C * C_A into the weights of every affected layer and C into its
// biases (when plan.scale_biases), then records the plan. A model carries at
// most one plan.
inline SnnModel apply_plan(SnnModel model, const ScalePlan& plan) {
  plan.validate();
  if (model.applied_plan) throw InvalidConfig("model already has a scale plan applied");
  const double weight_factor = plan.C * plan.C_A;
  for (std::size_t l = 0; l < model.net.layers.size(); ++l) {
    if (!plan.affects(l)) continue;
    auto& layer = model.net.layers[l];
    if (weight_factor != 1.0)
      for (double& w : layer_weights(layer)) w *= weight_factor;
    if (plan.scale_biases && plan.C != 1.0)
      for (double& b : layer_bias(layer)) b *= plan.C;
    detail::check_scaled(layer, l);
  }
  model.applied_plan = plan;
  return model;
}

// Plan for a coding config: C from the deletion probability (auto), a fixed
// value (manual) or 1 (off); C_A from the ttas burst length.
inline ScalePlan make_plan(const CodingConfig& cfg, ScaleProvenance mode, double p, double manual_C = 1.0) {
  ScalePlan plan;
  plan.provenance = mode;
  plan.C_A = ttas_factor(cfg);
  switch (mode) {
    case ScaleProvenance::off: plan.C = 1.0; break;
    case ScaleProvenance::auto_from_p: plan.C = choose_scale_factor(p); break;
    case ScaleProvenance::manual: plan.C = manual_C; break;
  }
  plan.validate();
  return plan;
}

}  // namespace spikebench
