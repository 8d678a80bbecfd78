#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xmg {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (binary MIDI, config files, CSV). Carries the byte
/// or line offset where parsing gave up.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

/// A caller violated an operation's preconditions (unsorted notes, class
/// index out of range, bad hyperparameters, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Non-finite values encountered during numeric work (training divergence).
class NumericError : public Error {
public:
  using Error::Error;
};

}  // namespace xmg
