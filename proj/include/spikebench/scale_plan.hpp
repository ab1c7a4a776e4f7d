#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "spikebench/error.hpp"
#include "spikebench/neuron.hpp"

namespace spikebench {

enum class ScaleProvenance { off, auto_from_p, manual };

inline std::string_view to_string(ScaleProvenance p) {
  switch (p) {
    case ScaleProvenance::off: return "off";
    case ScaleProvenance::auto_from_p: return "auto";
    case ScaleProvenance::manual: return "manual";
  }
  return "off";
}

inline ScaleProvenance parse_provenance(std::string_view s) {
  if (s == "off") return ScaleProvenance::off;
  if (s == "auto") return ScaleProvenance::auto_from_p;
  if (s == "manual") return ScaleProvenance::manual;
  throw InvalidConfig("unknown scale provenance '" + std::string(s) + "'");
}

// Weight multipliers folded into a converted model: C compensates expected
// spike deletion, C_A normalizes the PSC sum of a phasic burst.
struct ScalePlan {
  double C = 1.0;
  double C_A = 1.0;
  ScaleProvenance provenance = ScaleProvenance::off;
  bool scale_biases = false;  // when set, biases get C (never C_A)
  // Layers whose weights are scaled; empty means every layer.
  std::vector<bool> layers;

  bool affects(std::size_t layer) const { return layers.empty() || (layer < layers.size() && layers[layer]); }

  void validate() const {
    if (!std::isfinite(C) || !(C > 0.0)) throw InvalidInput("scale factor C must be finite and > 0");
    if (!std::isfinite(C_A) || !(C_A > 0.0) || C_A > 1.0)
      throw InvalidInput("TTAS scale factor C_A must lie in (0, 1]");
  }

  friend bool operator==(const ScalePlan&, const ScalePlan&) = default;
};

enum class ScaleRule {
  inverse,  // C = 1 / (1 - p)
  linear,   // C = 1 + alpha * p
};

// Deletion-compensating weight scale. The inverse rule undoes the expected
// (1 - p) loss exactly.
inline double choose_scale_factor(double p, ScaleRule rule = ScaleRule::inverse, double alpha = 1.0) {
  if (!(p >= 0.0) || p >= 1.0) throw InvalidInput("deletion probability must lie in [0, 1) for scaling");
  if (rule == ScaleRule::linear) return 1.0 + alpha * p;
  return 1.0 / (1.0 - p);
}

// C_A = z(t1) / sum_{k < t_a} z(t1 + k), where z(t) is the PSC a spike sent at
// t delivers. Under the exponential kernel a spike k steps later is worth
// exp(-k / tau) of the first; under the delta kernel every spike is worth one.
inline double ttas_scale_factor(const PscKernel& kernel, int t_a) {
  if (t_a < 1) throw InvalidConfig("burst duration t_a must be at least 1");
  double sum = 0.0;
  for (int k = 0; k < t_a; ++k)
    sum += kernel.kind == PscKernel::Kind::exponential ? kernel.at(k) : 1.0;
  return 1.0 / sum;
}

}  // namespace spikebench
