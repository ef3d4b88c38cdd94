#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace spshape {

using Point = std::array<double, 3>;

// Error taxonomy maps onto the CLI exit codes: config/input errors -> 2,
// solver failures -> 3. Everything else is a plain logic_error (a bug).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DomainError : public std::runtime_error {
public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& msg, double residual = -1.0)
      : std::runtime_error(msg), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

inline double sq(double x) { return x * x; }

}  // namespace spshape
