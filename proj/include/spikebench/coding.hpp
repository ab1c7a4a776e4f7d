#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "spikebench/error.hpp"
#include "spikebench/neuron.hpp"
#include "spikebench/scale_plan.hpp"
#include "spikebench/spike_train.hpp"

namespace spikebench {

enum class Scheme { rate, phase, burst, ttfs, ttas };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::rate: return "rate";
    case Scheme::phase: return "phase";
    case Scheme::burst: return "burst";
    case Scheme::ttfs: return "ttfs";
    case Scheme::ttas: return "ttas";
  }
  return "rate";
}

inline Scheme parse_scheme(std::string_view s) {
  if (s == "rate") return Scheme::rate;
  if (s == "phase") return Scheme::phase;
  if (s == "burst") return Scheme::burst;
  if (s == "ttfs") return Scheme::ttfs;
  if (s == "ttas") return Scheme::ttas;
  throw InvalidConfig("unknown coding scheme '" + std::string(s) + "'");
}

inline bool is_temporal(Scheme s) { return s == Scheme::ttfs || s == Scheme::ttas; }

struct CodingConfig {
  Scheme scheme = Scheme::rate;
  // Window length. For ttfs/ttas this is the per-layer firing window.
  int timesteps = 100;
  double theta = 0.4;
  int phase_period = 8;    // K
  int burst_cap = 5;       // max spikes per step, burst coding
  double tau = 8.0;        // PSC / latency decay constant, ttfs and ttas
  int burst_duration = 1;  // t_a, ttas only
  // Decay constant of the firing threshold theta * exp(-(t - start) / theta_decay)
  // used by ttfs/ttas layers. Unset means tau.
  std::optional<double> theta_decay;

  // Spikes per phasic burst; ttfs is ttas with t_a = 1.
  int burst_length() const {
    return scheme == Scheme::ttas ? burst_duration : 1;
  }

  // Window of an encoded train; ttas bursts may run t_a - 1 steps past T.
  int train_window() const { return timesteps + (is_temporal(scheme) ? burst_length() - 1 : 0); }

  PscKernel kernel() const {
    return is_temporal(scheme) ? PscKernel::exponential(tau) : PscKernel::delta();
  }

  double threshold_decay() const { return theta_decay.value_or(tau); }

  void validate() const {
    if (timesteps < 1) throw InvalidConfig("timesteps must be >= 1");
    if (!std::isfinite(theta) || !(theta > 0.0)) throw InvalidConfig("threshold must be finite and > 0");
    if (scheme == Scheme::phase && phase_period < 2) throw InvalidConfig("phase period must be >= 2");
    if (scheme == Scheme::burst && burst_cap < 1) throw InvalidConfig("burst cap must be >= 1");
    if (scheme == Scheme::ttas && burst_duration < 1) throw InvalidConfig("burst duration must be >= 1");
    if (is_temporal(scheme)) {
      if (!std::isfinite(tau) || !(tau > 0.0)) throw InvalidConfig("tau must be finite and > 0");
      if (theta_decay && (!std::isfinite(*theta_decay) || !(*theta_decay > 0.0)))
        throw InvalidConfig("threshold decay must be finite and > 0");
    }
  }
};

// Thresholds found by the reference threshold search; windows sized for
// MNIST-scale MLPs.
inline CodingConfig default_config(Scheme scheme) {
  CodingConfig cfg;
  cfg.scheme = scheme;
  switch (scheme) {
    case Scheme::rate: cfg.theta = 0.4; break;
    case Scheme::burst: cfg.theta = 0.4; break;
    case Scheme::phase: cfg.theta = 1.2; break;
    case Scheme::ttfs:
    case Scheme::ttas:
      cfg.theta = 0.8;
      cfg.timesteps = 40;
      cfg.tau = 4.0;
      cfg.burst_duration = scheme == Scheme::ttas ? 4 : 1;
      break;
  }
  return cfg;
}

// Synaptic multiplier carried by a spike sent at step t (before the PSC
// kernel): 2^-(1 + t mod K) for phase coding, 1 otherwise. Burst
// multiplicity is applied by the caller as a count.
inline double spike_weight(const CodingConfig& cfg, int t) {
  if (cfg.scheme != Scheme::phase) return 1.0;
  return std::ldexp(1.0, -(1 + t % cfg.phase_period));
}

// C_A for the configured burst length (1 for everything but ttas).
inline double ttas_factor(const CodingConfig& cfg) {
  if (cfg.scheme != Scheme::ttas) return 1.0;
  return ttas_scale_factor(cfg.kernel(), cfg.burst_duration);
}

// Encodes a normalized value in [0, 1].
//   rate:  N = round(v T) evenly spaced spikes
//   phase: weighted spikes, greedy binary expansion of v restarted every K
//          steps with the remainder carried over (MSB first in each period);
//          a trailing partial period carries its share of v
//   burst: N = round(v T / theta) unit spikes spread evenly, up to burst_cap
//          per step, each worth theta
//   ttfs/ttas: first spike at round(-tau ln v) clipped to [0, T), followed by
//          t_a - 1 further spikes for ttas; v = 0 gives no spike
inline SpikeTrain encode(double value, const CodingConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(value) || value < 0.0 || value > 1.0)
    throw InvalidInput("encode expects a value in [0, 1], got " + std::to_string(value));
  const int T = cfg.timesteps;
  SpikeTrain train(cfg.train_window());
  switch (cfg.scheme) {
    case Scheme::rate: {
      const std::int64_t n = std::llround(value * T);
      for (std::int64_t k = 0; k < n; ++k) train.add(static_cast<int>((2 * k + 1) * T / (2 * n)));
      break;
    }
    case Scheme::phase: {
      const int K = cfg.phase_period;
      double residual = 0.0;
      for (int t = 0; t < T; ++t) {
        if (t % K == 0) residual += value * std::min(K, T - t) / K;
        const double w = spike_weight(cfg, t);
        if (residual >= w) {
          train.add(t);
          residual -= w;
        }
      }
      break;
    }
    case Scheme::burst: {
      const std::int64_t n = std::min<std::int64_t>(std::llround(value * T / cfg.theta),
                                                    static_cast<std::int64_t>(cfg.burst_cap) * T);
      for (std::int64_t t = 0; t < T; ++t) {
        const auto c = static_cast<int>((t + 1) * n / T - t * n / T);
        if (c > 0) train.add(static_cast<int>(t), c);
      }
      break;
    }
    case Scheme::ttfs:
    case Scheme::ttas: {
      if (value == 0.0) break;
      const double latency = std::round(-cfg.tau * std::log(value));
      const int t_first = static_cast<int>(std::clamp(latency, 0.0, static_cast<double>(T - 1)));
      for (int k = 0; k < cfg.burst_length(); ++k) train.add(t_first + k);
      break;
    }
  }
  return train;
}

// Inverse of encode.
//   rate: N / T; phase: sum of slot weights / (T / K); burst: theta N / T;
//   ttfs: exp(-t_first / tau), 0 if silent;
//   ttas: C_A * sum over spikes of exp(-t / tau).
inline double decode(const SpikeTrain& train, const CodingConfig& cfg) {
  cfg.validate();
  const double T = cfg.timesteps;
  switch (cfg.scheme) {
    case Scheme::rate:
      return static_cast<double>(train.total()) / T;
    case Scheme::phase: {
      double sum = 0.0;
      for (const auto& e : train.events()) sum += e.count * spike_weight(cfg, e.time);
      return sum / (T / cfg.phase_period);
    }
    case Scheme::burst:
      return cfg.theta * static_cast<double>(train.total()) / T;
    case Scheme::ttfs:
      if (train.empty()) return 0.0;
      return std::exp(-train.events().front().time / cfg.tau);
    case Scheme::ttas: {
      double sum = 0.0;
      for (const auto& e : train.events()) sum += e.count * std::exp(-e.time / cfg.tau);
      return ttas_factor(cfg) * sum;
    }
  }
  return 0.0;
}

// Argmax of the accumulated output-layer potentials, lowest index on ties.
inline int output_layer_readout(std::span<const double> potentials) {
  if (potentials.empty()) throw InvalidInput("readout needs at least one class");
  int best = 0;
  for (std::size_t i = 1; i < potentials.size(); ++i)
    if (potentials[i] > potentials[best]) best = static_cast<int>(i);
  return best;
}

}  // namespace spikebench
