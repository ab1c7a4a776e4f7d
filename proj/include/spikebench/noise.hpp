#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "spikebench/error.hpp"
#include "spikebench/rng.hpp"
#include "spikebench/spike_train.hpp"

namespace spikebench {

// Dynamic spike noise applied to inter-layer spike trains. Deletion runs
// before jitter when both are active.
struct NoiseConfig {
  double p = 0.0;       // deletion probability
  double sigma = 0.0;   // jitter standard deviation, timesteps
  std::uint64_t seed = 0;
  // Which spiking layers' outgoing trains are noised (index 0 is the input
  // encoding). Empty means all of them.
  std::vector<bool> layer_mask;

  bool active() const { return p > 0.0 || sigma > 0.0; }
  bool applies_to(std::size_t layer) const {
    return layer_mask.empty() || (layer < layer_mask.size() && layer_mask[layer]);
  }

  void validate() const {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidConfig("deletion probability must lie in [0, 1]");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidConfig("jitter sigma must be finite and >= 0");
  }
};

// One Bernoulli deletion draw: the spike is removed when uniform < p.
inline bool spike_deleted(Rng& rng, double p) { return rng.uniform() < p; }

// Number of survivors out of `count` unit spikes.
inline int surviving_count(Rng& rng, int count, double p) {
  if (p <= 0.0) return count;
  if (p >= 1.0) return 0;
  int kept = 0;
  for (int i = 0; i < count; ++i) kept += spike_deleted(rng, p) ? 0 : 1;
  return kept;
}

// Quantized Gaussian offset, rounded half away from zero.
inline int jitter_offset(Rng& rng, double sigma) {
  if (sigma <= 0.0) return 0;
  return static_cast<int>(std::round(sigma * rng.normal()));
}

inline SpikeTrain delete_spikes(const SpikeTrain& train, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("deletion probability must lie in [0, 1]");
  SpikeTrain out(train.window());
  for (const auto& e : train.events()) {
    const int kept = surviving_count(rng, e.count, p);
    if (kept > 0) out.add(e.time, kept);
  }
  return out;
}

// Moves every unit spike by a quantized N(0, sigma^2) offset and clamps the
// result to [0, T - 1]; counts are preserved.
inline SpikeTrain jitter_spikes(const SpikeTrain& train, double sigma, int T, Rng& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("jitter sigma must be finite and >= 0");
  if (T < 1) throw InvalidInput("jitter window must be >= 1");
  if (sigma == 0.0) return train;
  SpikeTrain out(T);
  for (const auto& e : train.events())
    for (int i = 0; i < e.count; ++i) out.add(std::clamp(e.time + jitter_offset(rng, sigma), 0, T - 1));
  return out;
}

inline double expected_psc_after_deletion(double Z, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("deletion probability must lie in [0, 1]");
  return (1.0 - p) * Z;
}

}  // namespace spikebench
