#pragma once

#include "contlim/chain.hpp"
#include "contlim/core.hpp"
#include "contlim/grid.hpp"
#include "contlim/rng.hpp"

#include <vector>

namespace contlim {

// Recorded normalized states at snapshot step indices (strictly increasing, k = 0 first).
struct Trajectory {
  ModelKind model = ModelKind::Network1d;
  std::vector<std::int64_t> steps;
  std::vector<Eigen::VectorXd> states;
  double dt = 0.0;
  std::int64_t normalization = 1;
  std::int64_t dropped = 0;
};

// Values on a (time x interior node) lattice with piecewise-constant extension: floor in
// time, and per axis the grid point closest to the left in space.
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  SpaceTimeField(GridSpec grid, std::vector<double> times, Eigen::MatrixXd values);

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& times() const { return times_; }
  const Eigen::MatrixXd& values() const { return values_; }

  // Index of the last stored time not after t; DomainError outside [t_first, t_last].
  Eigen::Index time_index(double t) const;
  double evaluate(double t, const Eigen::Vector2d& s) const;
  double evaluate(double t, double s) const { return evaluate(t, Eigen::Vector2d(s, 0.0)); }
  Eigen::VectorXd at_time(double t) const { return values_.row(time_index(t)).transpose(); }

 private:
  GridSpec grid_;
  std::vector<double> times_;
  Eigen::MatrixXd values_;
};

enum class InitMode { Exact, Binomial };

// Exact: round-half-even(M * z0(v(n))). Binomial: Binomial(M, z0(v(n))).
ChainState initial_state(const FieldSpec& z0, std::int64_t capacity, const GridSpec& grid, InitMode mode,
                         RngStream& rng);

std::int64_t default_stride(std::int64_t steps);

// Iterates the chain `steps` times, recording k = 0, every multiple of `stride`, and k = steps.
Trajectory run_chain(const TransitionTable& table, ChainState initial, std::int64_t steps, std::int64_t stride,
                     RngStream& rng);

// x(k+1) = x(k) + scale * f_N(x(k)) with the model's scale (see drift_scale). Throws
// InstabilityError when the state becomes non-finite, negative, or exceeds one in a network model.
Trajectory run_drift_recursion(const TransitionTable& table, const Eigen::VectorXd& initial, std::int64_t steps,
                               std::int64_t stride);

// Times t_k = k * dt.
SpaceTimeField extend_to_field(const Trajectory& trajectory, const GridSpec& grid);

}  // namespace contlim
