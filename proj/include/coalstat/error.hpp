#pragma once

#include <stdexcept>
#include <string>

namespace coalstat {

// Parameter outside the domain of a model family (e.g. Beta alpha >= 2).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Integer arguments out of range or inconsistent with each other.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed model / grid specification or input file.
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation not defined for the requested model variant.
class UnsupportedModelError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Data that cannot be scored, e.g. likelihood -inf on a whole grid.
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Internal consistency failure in an ancestral configuration.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace coalstat
