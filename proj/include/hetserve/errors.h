#pragma once

#include <stdexcept>
#include <string>

namespace hetserve {

// Invalid argument to an operation (distribution parameters, batch out of range, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation called on an object that cannot serve it yet (empty window, untrained predictor).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Catalog / budget / scenario inconsistencies.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed trace or scenario content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A dispatch policy broke the kernel's commitment contract; the run is aborted.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hetserve
