#include "contlim/simulate.hpp"

#include "contlim/drift.hpp"

#include <algorithm>
#include <cmath>

namespace contlim {

SpaceTimeField::SpaceTimeField(GridSpec grid, std::vector<double> times, Eigen::MatrixXd values)
    : grid_(std::move(grid)), times_(std::move(times)), values_(std::move(values)) {
  if (Eigen::Index(times_.size()) != values_.rows())
    throw DomainError("field has " + std::to_string(times_.size()) + " times but " +
                      std::to_string(values_.rows()) + " rows");
  if (values_.cols() != grid_.node_count()) throw DomainError("field columns do not match the grid");
  if (!std::is_sorted(times_.begin(), times_.end())) throw DomainError("field times must increase");
}

namespace {

double time_tolerance(double t) { return 1e-12 * std::max(1.0, std::abs(t)); }

// Left-closest lattice index on an axis, 0..N; DomainError outside the closed extent.
int left_index(const Axis& axis, double s) {
  const double h = axis.ds();
  if (s < axis.lo - 1e-9 * h || s > axis.hi + 1e-9 * h)
    throw DomainError("position " + format_double(s) + " outside [" + format_double(axis.lo) + ", " +
                      format_double(axis.hi) + "]");
  const int i = int(std::floor((s - axis.lo) / h + 1e-9));
  return std::clamp(i, 0, axis.interior);
}

}  // namespace

Eigen::Index SpaceTimeField::time_index(double t) const {
  if (times_.empty()) throw DomainError("field has no times");
  const double tol = time_tolerance(t);
  if (t < times_.front() - tol || t > times_.back() + tol)
    throw DomainError("time " + format_double(t) + " outside [" + format_double(times_.front()) + ", " +
                      format_double(times_.back()) + "]");
  const auto it = std::upper_bound(times_.begin(), times_.end(), t + tol);
  return std::max<Eigen::Index>(0, Eigen::Index(it - times_.begin()) - 1);
}

double SpaceTimeField::evaluate(double t, const Eigen::Vector2d& s) const {
  const Eigen::Index k = time_index(t);
  const int n = left_index(grid_.axis(0), s(0));
  int m = 1;
  if (grid_.dimension() == 2) m = left_index(grid_.axis(1), s(1));
  // Cells left of the first interior node belong to the destination, where the value is zero.
  if (n == 0 || m == 0) return 0.0;
  return values_(k, grid_.flat_index(n, m));
}

ChainState initial_state(const FieldSpec& z0, std::int64_t capacity, const GridSpec& grid, InitMode mode,
                         RngStream& rng) {
  if (capacity < 1) throw DomainError("capacity M must be positive");
  ChainState state;
  state.capacity = capacity;
  state.counts.resize(grid.node_count());
  for (Eigen::Index i = 0; i < grid.node_count(); ++i) {
    const double z = eval_field(z0, grid.point_of(i));
    if (!(z >= 0.0 && z <= 1.0))
      throw DomainError("initial condition " + format_double(z) + " outside [0,1] at flat node " +
                        std::to_string(i));
    // nearbyint under the default rounding mode rounds half to even.
    state.counts(i) = mode == InitMode::Exact ? std::int64_t(std::nearbyint(double(capacity) * z))
                                              : rng.binomial(capacity, z);
  }
  return state;
}

std::int64_t default_stride(std::int64_t steps) { return std::max<std::int64_t>(1, (steps + 99) / 100); }

namespace {

void check_run_arguments(std::int64_t steps, std::int64_t stride) {
  if (steps < 0) throw DomainError("step count must be non-negative");
  if (stride < 1) throw DomainError("snapshot stride must be positive");
}

bool is_snapshot(std::int64_t k, std::int64_t steps, std::int64_t stride) { return k % stride == 0 || k == steps; }

}  // namespace

Trajectory run_chain(const TransitionTable& table, ChainState state, std::int64_t steps, std::int64_t stride,
                     RngStream& rng) {
  check_run_arguments(steps, stride);
  check_state(state, table);
  Trajectory trajectory;
  trajectory.model = table.kind;
  trajectory.dt = table.dt;
  trajectory.normalization = state.capacity;
  trajectory.steps.push_back(0);
  trajectory.states.push_back(state.normalized());

  ChainStepper stepper(table);
  for (std::int64_t k = 1; k <= steps; ++k) {
    stepper.advance(state, rng);
    if (is_snapshot(k, steps, stride)) {
      trajectory.steps.push_back(k);
      trajectory.states.push_back(state.normalized());
    }
  }
  trajectory.dropped = state.dropped;
  return trajectory;
}

Trajectory run_drift_recursion(const TransitionTable& table, const Eigen::VectorXd& initial, std::int64_t steps,
                               std::int64_t stride) {
  check_run_arguments(steps, stride);
  const bool network = table.kind != ModelKind::RandomWalk1d;
  detail::check_drift_input(initial, table, table.grid.dimension(), network);

  Trajectory trajectory;
  trajectory.model = table.kind;
  trajectory.dt = table.dt;
  trajectory.normalization = table.capacity;
  trajectory.steps.push_back(0);
  trajectory.states.push_back(initial);

  const double scale = drift_scale(table);
  constexpr double kTolerance = 1e-12;
  DriftEvaluator<double> evaluate(table);
  Eigen::VectorXd x = initial;
  Eigen::VectorXd f(x.size());
  for (std::int64_t k = 1; k <= steps; ++k) {
    evaluate(x, f);
    x += scale * f;
    const double lo = x.minCoeff();
    const double hi = x.maxCoeff();
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo < -kTolerance || (network && hi > 1.0 + kTolerance))
      throw InstabilityError("drift recursion left the admissible range [" + format_double(lo) + ", " +
                                 format_double(hi) + "]",
                             k);
    if (is_snapshot(k, steps, stride)) {
      trajectory.steps.push_back(k);
      trajectory.states.push_back(x);
    }
  }
  return trajectory;
}

SpaceTimeField extend_to_field(const Trajectory& trajectory, const GridSpec& grid) {
  std::vector<double> times;
  times.reserve(trajectory.steps.size());
  Eigen::MatrixXd values(Eigen::Index(trajectory.states.size()), grid.node_count());
  for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
    times.push_back(double(trajectory.steps[i]) * trajectory.dt);
    if (trajectory.states[i].size() != grid.node_count()) throw DomainError("trajectory does not match the grid");
    values.row(Eigen::Index(i)) = trajectory.states[i].transpose();
  }
  return SpaceTimeField(grid, std::move(times), std::move(values));
}

}  // namespace contlim
