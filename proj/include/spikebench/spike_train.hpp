#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <span>
#include <vector>

#include "spikebench/error.hpp"

namespace spikebench {

struct SpikeEvent {
  int time = 0;
  int count = 1;

  friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
};

// Spikes of one neuron over a window [0, window). Events are kept sorted by
// strictly ascending time; several spikes at the same step share one event and
// are recorded as its multiplicity.
class SpikeTrain {
 public:
  SpikeTrain() = default;
  explicit SpikeTrain(int window) : window_(window) {
    if (window < 0) throw InvalidInput("spike train window must be nonnegative");
  }
  SpikeTrain(int window, std::vector<SpikeEvent> events) : SpikeTrain(window) {
    for (const auto& e : events) add(e.time, e.count);
  }

  // Multiset constructor: repeated times merge into one event.
  static SpikeTrain from_times(int window, std::span<const int> times) {
    SpikeTrain train(window);
    for (int t : times) train.add(t);
    return train;
  }
  static SpikeTrain from_times(int window, std::initializer_list<int> times) {
    return from_times(window, std::span<const int>(times.begin(), times.size()));
  }

  void add(int time, int count = 1) {
    if (time < 0 || time >= window_)
      throw InvalidInput("spike time " + std::to_string(time) + " outside window [0, " +
                         std::to_string(window_) + ")");
    if (count < 1) throw InvalidInput("spike multiplicity must be positive");
    if (events_.empty() || events_.back().time < time) {
      events_.push_back({time, count});
      return;
    }
    auto it = std::lower_bound(events_.begin(), events_.end(), time,
                               [](const SpikeEvent& e, int t) { return e.time < t; });
    if (it != events_.end() && it->time == time)
      it->count += count;
    else
      events_.insert(it, {time, count});
  }

  int window() const noexcept { return window_; }
  std::span<const SpikeEvent> events() const noexcept { return events_; }
  bool empty() const noexcept { return events_.empty(); }

  std::int64_t total() const noexcept {
    std::int64_t n = 0;
    for (const auto& e : events_) n += e.count;
    return n;
  }

  // Merge of two trains over the same window (multiset union).
  friend SpikeTrain operator+(SpikeTrain a, const SpikeTrain& b) {
    if (a.window_ != b.window_) throw InvalidInput("spike trains have different windows");
    for (const auto& e : b.events_) a.add(e.time, e.count);
    return a;
  }

  friend bool operator==(const SpikeTrain&, const SpikeTrain&) = default;

 private:
  int window_ = 0;
  std::vector<SpikeEvent> events_;
};

}  // namespace spikebench
