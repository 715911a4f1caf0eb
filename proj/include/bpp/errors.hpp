#pragma once

#include <stdexcept>
#include <string>

namespace bpp {

// Bad caller-supplied data: malformed series, out-of-domain arguments,
// inconsistent shapes.  CLI maps this to exit code 2.
struct invalid_input : std::runtime_error {
  explicit invalid_input(const std::string& msg) : std::runtime_error(msg) {}
};

// The algorithm could not proceed numerically: vanished forward mass,
// singular normal equations, non-finite intermediate.  Exit code 3.
struct numeric_failure : std::runtime_error {
  explicit numeric_failure(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem trouble: unreadable input, unwritable output.  Exit code 4.
struct io_failure : std::runtime_error {
  explicit io_failure(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bpp
