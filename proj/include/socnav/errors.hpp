#pragma once

#include <stdexcept>
#include <string>

namespace socnav {

/// Invalid user input: unknown identifiers, malformed files, violated
/// configuration invariants. Maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while running an otherwise valid configuration. Exit code 2.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace socnav
