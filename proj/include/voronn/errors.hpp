#pragma once

#include <stdexcept>
#include <string>

namespace voronn {

// Bad inputs: malformed files, invalid parameters, degenerate datasets.
// The CLI maps this to exit code 2.
class input_error : public std::runtime_error {
public:
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: spectral division below tolerance, quadrature
// non-convergence. The CLI maps this to exit code 3.
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace voronn
