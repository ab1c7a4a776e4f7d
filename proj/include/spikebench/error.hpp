#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spikebench {

// Base of everything the library throws on bad input, bad data or numeric
// blow-up. Programming errors still go through assert.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class UnsupportedLayer : public Error {
 public:
  explicit UnsupportedLayer(const std::string& layer, const std::string& kind)
      : Error("unsupported layer '" + layer + "' of kind '" + kind + "'"),
        layer_(layer) {}
  const std::string& layer() const noexcept { return layer_; }

 private:
  std::string layer_;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file content. `offset` is the byte position where parsing gave up.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Non-finite membrane potential; usually a sign of mis-scaled weights.
class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& what, int layer)
      : Error(what + " (layer " + std::to_string(layer) + ")"), layer_(layer) {}
  int layer() const noexcept { return layer_; }

  // Same failure with `context` prepended to the message.
  NumericFailure with_context(const std::string& context) const {
    return NumericFailure(context + ": " + what(), layer_, 0);
  }

 private:
  NumericFailure(const std::string& full, int layer, int) : Error(full), layer_(layer) {}
  int layer_;
};

}  // namespace spikebench
