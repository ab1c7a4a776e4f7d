#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "spikebench/error.hpp"
#include "spikebench/spike_train.hpp"

namespace spikebench {

// Discrete-time (dt = 1) integrate-and-fire state.
struct NeuronState {
  double u = 0.0;
  std::optional<int> t_first;  // first spike time
  int burst_left = 0;          // burst steps remaining after the current one
  bool dead = false;           // silent for the rest of the window

  friend bool operator==(const NeuronState&, const NeuronState&) = default;
};

struct ResetMode {
  enum class Kind { subtract_threshold, to_zero, phasic_burst };

  Kind kind = Kind::subtract_threshold;
  int burst_duration = 1;  // t_a, phasic_burst only

  static ResetMode subtract_threshold() { return {Kind::subtract_threshold, 1}; }
  static ResetMode to_zero() { return {Kind::to_zero, 1}; }
  static ResetMode phasic_burst(int t_a) {
    if (t_a < 1) throw InvalidConfig("phasic burst duration must be at least 1");
    return {Kind::phasic_burst, t_a};
  }
};

// Post-synaptic current kernel. The weight is applied by the caller.
struct PscKernel {
  enum class Kind { delta, exponential };

  Kind kind = Kind::delta;
  double tau = 1.0;

  static PscKernel delta() { return {Kind::delta, 1.0}; }
  static PscKernel exponential(double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau))
      throw InvalidConfig("exponential kernel needs a finite tau > 0");
    return {Kind::exponential, tau};
  }

  // Kernel value `elapsed` steps after the spike.
  double at(int elapsed) const {
    if (elapsed < 0) return 0.0;
    if (kind == Kind::delta) return elapsed == 0 ? 1.0 : 0.0;
    return std::exp(-static_cast<double>(elapsed) / tau);
  }
};

inline NeuronState integrate(NeuronState state, double input_current, double bias) {
  if (!std::isfinite(input_current) || !std::isfinite(bias))
    throw InvalidInput("non-finite input current or bias");
  if (state.dead) return state;
  state.u += input_current + bias;
  return state;
}

inline bool fire_check(const NeuronState& state, double theta, int /*t*/) {
  return !state.dead && state.u >= theta;
}

// Reset after a spike at step t. For phasic_burst the first spike opens a
// window [t_first, t_first + t_a); inside it the potential is held at the
// threshold so the neuron keeps firing while its input is non-negative, and
// once the window is used up the neuron is dead.
inline NeuronState apply_reset(NeuronState state, const ResetMode& mode, double theta, int t) {
  switch (mode.kind) {
    case ResetMode::Kind::subtract_threshold:
      state.u -= theta;
      break;
    case ResetMode::Kind::to_zero:
      state.u = 0.0;
      break;
    case ResetMode::Kind::phasic_burst: {
      if (mode.burst_duration < 1) throw InvalidConfig("phasic burst duration must be at least 1");
      if (!state.t_first) state.t_first = t;
      state.u = theta;
      state.burst_left = std::max(0, *state.t_first + mode.burst_duration - 1 - t);
      if (state.burst_left == 0) state.dead = true;
      break;
    }
  }
  return state;
}

// Per-step countdown for a phasic neuron that did not fire at step t.
inline NeuronState expire_burst(NeuronState state, const ResetMode& mode, int t) {
  if (mode.kind != ResetMode::Kind::phasic_burst || !state.t_first || state.dead) return state;
  state.burst_left = std::max(0, *state.t_first + mode.burst_duration - 1 - t);
  if (state.burst_left == 0) state.dead = true;
  return state;
}

// Number of spikes emitted in one step by a multi-spike (burst-coding) neuron:
// floor(u / theta) capped at `cap`. The caller subtracts count * theta.
inline int burst_fire_count(const NeuronState& state, double theta, int cap) {
  if (state.dead || state.u < theta) return 0;
  const double n = std::floor(state.u / theta);
  return n >= cap ? cap : std::max(1, static_cast<int>(n));
}

// (kernel * train)(t): sum over events at or before t of count * kernel(t - time).
inline double psc_value(const SpikeTrain& train, const PscKernel& kernel, int t) {
  double z = 0.0;
  for (const auto& e : train.events()) {
    if (e.time > t) break;
    z += e.count * kernel.at(t - e.time);
  }
  return z;
}

}  // namespace spikebench
