#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "spikebench/error.hpp"

namespace spikebench {

// Labelled samples with pixels normalized to [0, 1], stored row-major.
struct Dataset {
  std::vector<int> shape;  // per-sample shape, e.g. {28, 28}
  std::vector<double> pixels;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t sample_size() const {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }
  std::span<const double> sample(std::size_t i) const {
    return std::span<const double>(pixels).subspan(i * sample_size(), sample_size());
  }

  Dataset head(std::size_t n) const {
    Dataset out;
    out.shape = shape;
    n = std::min(n, size());
    out.pixels.assign(pixels.begin(), pixels.begin() + static_cast<std::ptrdiff_t>(n * sample_size()));
    out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
  }
};

}  // namespace spikebench
