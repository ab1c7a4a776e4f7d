#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "spikebench/coding.hpp"
#include "spikebench/dataset.hpp"
#include "spikebench/error.hpp"
#include "spikebench/model.hpp"
#include "spikebench/neuron.hpp"
#include "spikebench/noise.hpp"
#include "spikebench/parallel.hpp"
#include "spikebench/rng.hpp"

namespace spikebench {

// One spike event of a whole layer: `count` spikes of `neuron` at `time`.
struct RasterEvent {
  int time = 0;
  int neuron = 0;
  int count = 1;

  friend bool operator==(const RasterEvent&, const RasterEvent&) = default;
};

// Layer spike trains, sorted by time.
using Raster = std::vector<RasterEvent>;

struct SimOptions {
  bool keep_trains = false;  // record every spiking layer's emitted raster
};

struct SimResult {
  int predicted = 0;
  // Per spiking layer (input encoding first): spikes delivered to the next
  // layer after noise, and spikes emitted before noise.
  std::vector<std::int64_t> spike_counts;
  std::vector<std::int64_t> emitted_counts;
  std::int64_t total_spikes = 0;
  // Decoded activation of every hidden layer, then the output layer.
  std::vector<std::vector<double>> activations;
  std::vector<double> mean_activations;
  std::vector<double> output;  // decoded output potentials
  int elapsed_timesteps = 0;
  int latency = 0;  // first step after which the readout no longer changes
  std::vector<Raster> trains;  // emitted rasters, only with keep_trains
};

namespace detail {

// Stable counting sort by time.
inline void sort_by_time(Raster& raster, int steps) {
  if (std::is_sorted(raster.begin(), raster.end(),
                     [](const RasterEvent& a, const RasterEvent& b) { return a.time < b.time; }))
    return;
  std::vector<std::size_t> start(static_cast<std::size_t>(steps) + 1, 0);
  for (const auto& e : raster) ++start[static_cast<std::size_t>(e.time) + 1];
  for (int t = 0; t < steps; ++t) start[t + 1] += start[t];
  Raster sorted(raster.size());
  for (const auto& e : raster) sorted[start[e.time]++] = e;
  raster.swap(sorted);
}

// Deletion then jitter over a whole layer raster, window [0, steps).
inline void apply_noise(Raster& raster, const NoiseConfig& noise, int steps, Rng& rng) {
  if (noise.p > 0.0) {
    Raster kept;
    kept.reserve(raster.size());
    for (const auto& e : raster) {
      const int n = surviving_count(rng, e.count, noise.p);
      if (n > 0) kept.push_back({e.time, e.neuron, n});
    }
    raster.swap(kept);
  }
  if (noise.sigma > 0.0) {
    Raster moved;
    moved.reserve(raster.size());
    for (const auto& e : raster)
      for (int i = 0; i < e.count; ++i)
        moved.push_back({std::clamp(e.time + jitter_offset(rng, noise.sigma), 0, steps - 1), e.neuron, 1});
    raster.swap(moved);
    sort_by_time(raster, steps);
  }
}

inline std::int64_t count_spikes(const Raster& raster) {
  std::int64_t n = 0;
  for (const auto& e : raster) n += e.count;
  return n;
}

}  // namespace detail

// Discrete-time simulator for a converted network. Layers are processed one
// after another over the full window, which for a feedforward network gives
// the same events as advancing all layers in lockstep: a spike sent at t is
// integrated downstream at t + 1. Noise is applied to each spiking layer's
// complete outgoing train.
class Simulator {
 public:
  explicit Simulator(SnnModel model) : model_(std::move(model)) {
    model_.validate();
    const auto& layers = model_.net.layers;
    transposed_.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
      if (const auto* dense = std::get_if<DenseLayer>(&layers[l])) {
        auto& wt = transposed_[l];
        wt.resize(dense->weight.size());
        for (int o = 0; o < dense->out_features; ++o)
          for (int i = 0; i < dense->in_features; ++i)
            wt[static_cast<std::size_t>(i) * dense->out_features + o] = dense->w(o, i);
      }
    }
  }

  const SnnModel& model() const { return model_; }

  SimResult run(std::span<const double> input, const NoiseConfig& noise, std::uint64_t seed,
                const SimOptions& options = {}) const {
    noise.validate();
    const auto& layers = model_.net.layers;
    if (static_cast<int>(input.size()) != model_.net.input_size())
      throw ShapeMismatch("input has " + std::to_string(input.size()) + " values, model expects " +
                          std::to_string(model_.net.input_size()));

    const int steps = model_.total_steps();
    Rng rng(seed);
    SimResult result;
    result.elapsed_timesteps = steps;

    Raster train = encode_input(input);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      // `train` is the output of spiking layer l, which feeds layers[l].
      result.emitted_counts.push_back(detail::count_spikes(train));
      if (options.keep_trains) result.trains.push_back(train);
      if (noise.active() && noise.applies_to(l)) detail::apply_noise(train, noise, steps, rng);
      result.spike_counts.push_back(detail::count_spikes(train));

      const bool is_output = l + 1 == layers.size();
      LayerOutput out = run_layer(l, train, is_output);
      result.activations.push_back(std::move(out.decoded));
      if (is_output) {
        result.latency = out.latency;
        result.output = result.activations.back();
      } else {
        train = std::move(out.spikes);
      }
    }

    for (auto n : result.spike_counts) result.total_spikes += n;
    for (const auto& a : result.activations) {
      double s = 0.0;
      for (double v : a) s += v;
      result.mean_activations.push_back(a.empty() ? 0.0 : s / static_cast<double>(a.size()));
    }
    result.predicted = output_layer_readout(result.output);
    return result;
  }

 private:
  struct LayerOutput {
    Raster spikes;
    std::vector<double> decoded;
    int latency = 0;
  };

  // Value a spike from spiking layer `source` sent at step t carries, before
  // the synaptic weight.
  double spike_value(std::size_t source, int t) const {
    const auto& cfg = model_.coding;
    const double amplitude = source_amplitude(source);
    switch (cfg.scheme) {
      case Scheme::rate:
      case Scheme::burst:
        return amplitude;
      case Scheme::phase:
        return amplitude * spike_weight(cfg, t);
      case Scheme::ttfs:
      case Scheme::ttas:
        return amplitude * std::exp(-(t - model_.window_offsets[source]) / cfg.tau);
    }
    return amplitude;
  }

  // Activation represented by one unit spike at full weight: 1 for input
  // encodings (theta for burst coding), the layer threshold for hidden layers.
  double source_amplitude(std::size_t source) const {
    if (source == 0) return model_.coding.scheme == Scheme::burst ? model_.coding.theta : 1.0;
    return model_.thresholds[source - 1];
  }

  Raster encode_input(std::span<const double> input) const {
    const auto& cfg = model_.coding;
    const int offset = is_temporal(cfg.scheme) ? model_.window_offsets[0] : 0;
    Raster raster;
    for (std::size_t i = 0; i < input.size(); ++i) {
      const double v = input[i];
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw InvalidInput("input value " + std::to_string(i) + " is outside [0, 1]");
      if (v == 0.0) continue;
      const SpikeTrain train = encode(v, cfg);
      for (const auto& e : train.events())
        raster.push_back({e.time + offset, static_cast<int>(i), e.count});
    }
    detail::sort_by_time(raster, model_.total_steps());
    return raster;
  }

  void scatter(std::size_t l, int source_neuron, double value, std::vector<double>& current) const {
    const auto& layer = model_.net.layers[l];
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      const int n = dense->out_features;
      const double* col = transposed_[l].data() + static_cast<std::size_t>(source_neuron) * n;
      for (int o = 0; o < n; ++o) current[o] += value * col[o];
      return;
    }
    const auto& conv = std::get<Conv2dLayer>(layer);
    const int plane = conv.in_height * conv.in_width;
    const int ic = source_neuron / plane;
    const int iy = (source_neuron % plane) / conv.in_width;
    const int ix = source_neuron % conv.in_width;
    const int oh = conv.out_height(), ow = conv.out_width();
    for (int ky = 0; ky < conv.kernel_h; ++ky) {
      const int ny = iy + conv.padding - ky;
      if (ny < 0 || ny % conv.stride != 0) continue;
      const int oy = ny / conv.stride;
      if (oy >= oh) continue;
      for (int kx = 0; kx < conv.kernel_w; ++kx) {
        const int nx = ix + conv.padding - kx;
        if (nx < 0 || nx % conv.stride != 0) continue;
        const int ox = nx / conv.stride;
        if (ox >= ow) continue;
        for (int oc = 0; oc < conv.out_channels; ++oc)
          current[(static_cast<std::size_t>(oc) * oh + oy) * ow + ox] += value * conv.w(oc, ic, ky, kx);
      }
    }
  }

  std::vector<double> expanded_bias(std::size_t l) const {
    const auto& layer = model_.net.layers[l];
    const auto& bias = layer_bias(layer);
    const int n = output_size(layer);
    std::vector<double> out(static_cast<std::size_t>(n));
    if (const auto* conv = std::get_if<Conv2dLayer>(&layer)) {
      const int plane = conv->out_height() * conv->out_width();
      for (int i = 0; i < n; ++i) out[i] = bias[i / plane];
    } else {
      out = bias;
    }
    return out;
  }

  LayerOutput run_layer(std::size_t l, const Raster& incoming, bool is_output) const {
    const auto& cfg = model_.coding;
    const int n = output_size(model_.net.layers[l]);
    const int steps = model_.total_steps();
    const int T = cfg.timesteps;
    const bool temporal = is_temporal(cfg.scheme);
    const double theta = model_.thresholds[l];
    const ResetMode reset = model_.reset_mode();

    // Bias enters per step (rate, burst), per step spread over the phase
    // period (phase), or once into the initial potential (ttfs, ttas).
    std::vector<double> bias = expanded_bias(l);
    if (cfg.scheme == Scheme::phase)
      for (double& b : bias) b /= cfg.phase_period;

    const int fire_start = temporal && !is_output ? model_.window_offsets[l + 1] : 0;
    const double theta_decay = cfg.threshold_decay();

    std::vector<NeuronState> state(static_cast<std::size_t>(n));
    std::vector<double> current(static_cast<std::size_t>(n));
    std::vector<double> sent(static_cast<std::size_t>(n), 0.0);  // summed value of emitted spikes
    LayerOutput out;
    int readout = -1;

    std::size_t next = 0;
    for (int t = 0; t <= steps; ++t) {
      std::fill(current.begin(), current.end(), 0.0);
      for (; next < incoming.size() && incoming[next].time == t - 1; ++next) {
        const auto& e = incoming[next];
        scatter(l, e.neuron, e.count * spike_value(l, e.time), current);
      }
      const bool bias_step = temporal ? t == 0 : t < T;

      const bool may_fire = !is_output && t < steps;
      double step_theta = theta;
      bool in_window = true;
      if (cfg.scheme == Scheme::phase) {
        step_theta = theta * spike_weight(cfg, t);
      } else if (temporal) {
        step_theta = theta * std::exp(-(t - fire_start) / theta_decay);
        in_window = t >= fire_start && t < fire_start + T;
      }

      for (int j = 0; j < n; ++j) {
        if (!std::isfinite(current[j])) throw NumericFailure("non-finite synaptic current", static_cast<int>(l));
        auto& s = state[j];
        s = integrate(s, current[j], bias_step ? bias[j] : 0.0);
        if (!may_fire) continue;

        switch (cfg.scheme) {
          case Scheme::rate:
          case Scheme::phase:
            if (fire_check(s, step_theta, t)) {
              s = apply_reset(s, reset, step_theta, t);
              out.spikes.push_back({t, j, 1});
              sent[j] += step_theta;
            }
            break;
          case Scheme::burst: {
            const int c = burst_fire_count(s, theta, cfg.burst_cap);
            if (c > 0) {
              s.u -= c * theta;
              out.spikes.push_back({t, j, c});
              sent[j] += c * theta;
            }
            break;
          }
          case Scheme::ttfs:
          case Scheme::ttas: {
            const bool bursting = s.t_first.has_value();
            if (!bursting && !in_window) break;
            if (fire_check(s, step_theta, t)) {
              s = apply_reset(s, reset, step_theta, t);
              out.spikes.push_back({t, j, 1});
              sent[j] += theta * std::exp(-(t - fire_start) / cfg.tau);
            } else {
              s = expire_burst(s, reset, t);
            }
            break;
          }
        }
      }

      if (is_output) {
        int best = 0;
        for (int j = 1; j < n; ++j)
          if (state[j].u > state[best].u) best = j;
        if (best != readout) {
          readout = best;
          out.latency = t;
        }
      }
    }

    for (int j = 0; j < n; ++j)
      if (!std::isfinite(state[j].u)) throw NumericFailure("non-finite membrane potential", static_cast<int>(l));

    out.decoded.resize(static_cast<std::size_t>(n));
    const double periods = static_cast<double>(T) / cfg.phase_period;
    for (int j = 0; j < n; ++j) {
      const double raw = is_output ? state[j].u : sent[j];
      switch (cfg.scheme) {
        case Scheme::rate:
        case Scheme::burst: out.decoded[j] = raw / T; break;
        case Scheme::phase: out.decoded[j] = raw / periods; break;
        case Scheme::ttfs:
        case Scheme::ttas: out.decoded[j] = is_output ? raw : raw * ttas_factor(cfg); break;
      }
    }
    return out;
  }

  SnnModel model_;
  std::vector<std::vector<double>> transposed_;
};

inline SimResult simulate(const SnnModel& model, std::span<const double> input, const NoiseConfig& noise,
                          const SimOptions& options = {}) {
  return Simulator(model).run(input, noise, noise.seed, options);
}

// Seed of one (trial, sample) simulation; the same pair gets the same stream
// under every model and noise level, so conditions are paired.
inline std::uint64_t sample_seed(std::uint64_t seed, std::size_t trial, std::size_t sample) {
  return derive_seed(derive_seed(seed, trial), sample);
}

struct EvalResult {
  double accuracy = 0.0;
  std::vector<double> trial_accuracy;
  double mean_spikes = 0.0;   // per sample, averaged over trials
  double mean_latency = 0.0;  // timesteps
};

inline EvalResult batch_evaluate(const Simulator& sim, const Dataset& data, const NoiseConfig& noise, int trials,
                                 int threads = default_threads()) {
  if (data.size() == 0) throw InvalidInput("dataset is empty");
  if (trials < 1) throw InvalidConfig("trials must be >= 1");
  const std::size_t n = data.size();
  struct Outcome {
    bool correct = false;
    std::int64_t spikes = 0;
    int latency = 0;
  };
  std::vector<Outcome> outcomes(n * static_cast<std::size_t>(trials));
  parallel_for(outcomes.size(), threads, [&](std::size_t k) {
    const std::size_t trial = k / n, i = k % n;
    const SimResult r = sim.run(data.sample(i), noise, sample_seed(noise.seed, trial, i));
    outcomes[k] = {r.predicted == data.labels[i], r.total_spikes, r.latency};
  });

  EvalResult res;
  std::int64_t spikes = 0, latency = 0;
  for (int trial = 0; trial < trials; ++trial) {
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& o = outcomes[trial * n + i];
      correct += o.correct ? 1 : 0;
      spikes += o.spikes;
      latency += o.latency;
    }
    res.trial_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(n));
  }
  double acc = 0.0;
  for (double a : res.trial_accuracy) acc += a;
  const double total = static_cast<double>(n) * trials;
  res.accuracy = acc / trials;
  res.mean_spikes = static_cast<double>(spikes) / total;
  res.mean_latency = static_cast<double>(latency) / total;
  return res;
}

inline EvalResult batch_evaluate(const SnnModel& model, const Dataset& data, const NoiseConfig& noise, int trials,
                                 int threads = default_threads()) {
  return batch_evaluate(Simulator(model), data, noise, trials, threads);
}

struct ThresholdChoice {
  double theta = 0.0;
  double accuracy = 0.0;
  double mean_spikes = 0.0;
};

// Grid search for the layer threshold: highest clean calibration accuracy,
// then fewest spikes, then earliest grid entry.
inline ThresholdChoice threshold_search(const SnnModel& model, const Dataset& calibration, std::span<const double> grid,
                                        int threads = default_threads()) {
  if (grid.empty()) throw InvalidInput("threshold grid is empty");
  if (calibration.size() == 0) throw InvalidInput("calibration batch is empty");
  ThresholdChoice best;
  bool have = false;
  for (double theta : grid) {
    SnnModel candidate = model;
    candidate.coding.theta = theta;
    std::fill(candidate.thresholds.begin(), candidate.thresholds.end(), theta);
    const EvalResult r = batch_evaluate(candidate, calibration, NoiseConfig{}, 1, threads);
    if (!have || r.accuracy > best.accuracy || (r.accuracy == best.accuracy && r.mean_spikes < best.mean_spikes)) {
      best = {theta, r.accuracy, r.mean_spikes};
      have = true;
    }
  }
  return best;
}

}  // namespace spikebench
