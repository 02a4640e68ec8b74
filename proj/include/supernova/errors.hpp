#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace supernova {

// Malformed input document (edge list, config text).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Out-of-range or unreachable parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller violated an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A single replicated item does not fit in a keeper's quota.
class OversizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Bad experiment configuration (missing file, unknown combination, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace supernova
