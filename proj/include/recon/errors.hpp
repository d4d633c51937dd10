#pragma once

#include <stdexcept>
#include <string>

namespace recon {

// Divergence, non-convergence, non-finite values.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// File and directory failures.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace recon
