#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace contlim {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowMajorArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Counts = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Scenario or model parameters violate an invariant.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InstabilityError : public std::runtime_error {
 public:
  InstabilityError(const std::string& what, std::int64_t step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, std::int64_t projected_steps)
      : std::runtime_error(what), projected_steps_(projected_steps) {}
  std::int64_t projected_steps() const { return projected_steps_; }

 private:
  std::int64_t projected_steps_;
};

enum class ModelKind { RandomWalk1d, Network1d, Network2d };

// Hop directions. Axis 0 is s1 (west/east, or left/right in 1D); axis 1 is s2 (south/north).
enum Direction : int { kWest = 0, kEast = 1, kSouth = 2, kNorth = 3 };
inline constexpr Direction kLeft = kWest;
inline constexpr Direction kRight = kEast;

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
inline int dimension_of(ModelKind kind) { return kind == ModelKind::Network2d ? 2 : 1; }

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

}  // namespace contlim
