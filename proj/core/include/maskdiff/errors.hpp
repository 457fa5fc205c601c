#pragma once

#include <stdexcept>
#include <string>

namespace maskdiff {

// Invalid configuration, malformed input, violated precondition. The CLI
// maps this to exit code 1.
class validation_error : public std::runtime_error {
  public:
    explicit validation_error(const std::string & msg) : std::runtime_error(msg) {}
};

// Non-finite values in a numerical computation (diverged loss, bad
// gradients). The CLI maps this to exit code 2.
class numeric_error : public std::runtime_error {
  public:
    explicit numeric_error(const std::string & msg) : std::runtime_error(msg) {}
};

}  // namespace maskdiff
