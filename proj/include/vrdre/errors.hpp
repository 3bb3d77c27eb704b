#pragma once

#include <stdexcept>
#include <string>

namespace vrdre {

// Annotation file does not follow the expected schema.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller passed data violating a precondition.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Bad configuration (flag combinations, invalid hyperparameters).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vrdre
