#include "contlim/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace contlim {

namespace {

std::optional<AffineField> as_affine(const FieldSpec& field) {
  if (const auto* c = std::get_if<ConstantField>(&field)) return AffineField{c->value, Eigen::Vector2d::Zero()};
  if (const auto* a = std::get_if<AffineField>(&field)) return *a;
  return std::nullopt;
}

bool is_zero_constant(const FieldSpec& field) {
  const auto* c = std::get_if<ConstantField>(&field);
  return c && c->value == 0.0;
}

}  // namespace

FieldSpec field_difference(const FieldSpec& a, const FieldSpec& b, const GridSpec& grid) {
  if (is_zero_constant(b)) return a;
  const auto affine_a = as_affine(a);
  const auto affine_b = as_affine(b);
  if (affine_a && affine_b) {
    if (std::holds_alternative<ConstantField>(a) && std::holds_alternative<ConstantField>(b))
      return ConstantField{affine_a->offset - affine_b->offset};
    return AffineField{affine_a->offset - affine_b->offset, affine_a->slope - affine_b->slope};
  }
  const auto* ga = std::get_if<GaussianField>(&a);
  const auto* gb = std::get_if<GaussianField>(&b);
  if (ga && gb) return GaussianField{ga->amplitude - gb->amplitude};
  if (gb && is_zero_constant(a)) return GaussianField{-gb->amplitude};

  TabulatedField table;
  table.values.resize(grid.node_count());
  for (Eigen::Index i = 0; i < grid.node_count(); ++i) {
    const Eigen::Vector2d s = grid.point_of(i);
    table.values(i) = eval_field(a, s) - eval_field(b, s);
  }
  table.grid = grid;
  return table;
}

PdeProblem PdeProblem::from_model(const ModelParams& params, const GridSpec& grid, double t_end, double dt) {
  PdeProblem problem;
  problem.kind = params.kind;
  problem.grid = grid;
  problem.diffusion = params.diffusion;
  problem.convection[0] = field_difference(params.bias[kWest], params.bias[kEast], grid);
  if (grid.dimension() == 2) problem.convection[1] = field_difference(params.bias[kSouth], params.bias[kNorth], grid);
  problem.source = params.generation;
  problem.initial = params.initial;
  problem.t_end = t_end;
  problem.dt = dt;
  return problem;
}

std::array<AxisCoefficients, 2> sample_coefficients(const PdeProblem& problem) {
  const GridSpec& grid = problem.grid;
  const int dim = grid.dimension();
  const int N1 = grid.count(0);
  const int N2 = dim == 2 ? grid.count(1) : 1;
  const double h = grid.ds();
  std::array<AxisCoefficients, 2> out;

  for (int j = 0; j < dim; ++j) {
    const FieldSpec& b = problem.diffusion[j];
    const FieldSpec& c = problem.convection[j];
    AxisCoefficients& axis = out[j];

    axis.b_node.resize(grid.node_count());
    axis.b_s_node.resize(grid.node_count());
    axis.b_ss_node.resize(grid.node_count());
    for (Eigen::Index i = 0; i < grid.node_count(); ++i) {
      const Eigen::Vector2d s = grid.point_of(i);
      axis.b_node(i) = eval_field(b, s);
      axis.b_s_node(i) = eval_derivative(b, s, j);
      axis.b_ss_node(i) = eval_second_derivative(b, s, j);
    }

    // Face (i + 1/2) along axis j sits between lattice nodes `lower` and `upper`.
    const int face_rows = j == 0 ? N1 + 1 : N1;
    const int face_cols = j == 0 ? N2 : N2 + 1;
    axis.b_face.resize(Eigen::Index(face_rows) * face_cols);
    axis.b_s_face.resize(axis.b_face.size());
    axis.c_face.resize(axis.b_face.size());
    for (int r = 0; r < face_rows; ++r) {
      for (int q = 0; q < face_cols; ++q) {
        const Eigen::Index f = Eigen::Index(r) * face_cols + q;
        Eigen::Vector2d lower, upper;
        if (j == 0) {
          lower = grid.point(r, dim == 2 ? q + 1 : 0);
          upper = grid.point(r + 1, dim == 2 ? q + 1 : 0);
        } else {
          lower = grid.point(r + 1, q);
          upper = grid.point(r + 1, q + 1);
        }
        const Eigen::Vector2d mid = 0.5 * (lower + upper);
        if (is_tabulated(b)) {
          const double bl = eval_field(b, lower), bu = eval_field(b, upper);
          axis.b_face(f) = 0.5 * (bl + bu);
          axis.b_s_face(f) = (bu - bl) / h;
        } else {
          axis.b_face(f) = eval_field(b, mid);
          axis.b_s_face(f) = eval_derivative(b, mid, j);
        }
        axis.c_face(f) = is_tabulated(c) ? 0.5 * (eval_field(c, lower) + eval_field(c, upper)) : eval_field(c, mid);
      }
    }
  }
  return out;
}

double stability_limit(const PdeProblem& problem) {
  const auto coefficients = sample_coefficients(problem);
  const int dim = problem.grid.dimension();
  const double h = problem.grid.ds();
  const double kappa = problem.kind == ModelKind::Network1d ? 4.0 / 3.0 : 1.0;
  double max_b = 0.0;
  double max_c = 0.0;
  for (int j = 0; j < dim; ++j) {
    const auto& axis = coefficients[j];
    max_b = std::max({max_b, axis.b_node.abs().maxCoeff(), axis.b_face.abs().maxCoeff()});
    if (problem.kind == ModelKind::RandomWalk1d)
      max_c = std::max(max_c, (axis.b_s_face + axis.c_face).abs().maxCoeff());
    else
      max_c = std::max(max_c, axis.c_face.abs().maxCoeff() + 2.0 * axis.b_s_node.abs().maxCoeff());
  }
  const double denominator = 2.0 * dim * max_b * kappa + h * max_c;
  if (denominator <= 0.0) return std::numeric_limits<double>::infinity();
  return h * h / denominator;
}

SpaceTimeField solve(const PdeProblem& problem) {
  const GridSpec& grid = problem.grid;
  if (!(problem.t_end > 0.0)) throw ConfigError("PDE end time must be positive");
  if (!(problem.dt > 0.0)) throw ConfigError("PDE time step must be positive");
  const double limit = stability_limit(problem);
  if (problem.dt > limit * (1.0 + 1e-12))
    throw ConfigError("PDE time step " + format_double(problem.dt) + " exceeds the stability limit " +
                      format_double(limit));

  std::vector<double> outputs = problem.output_times;
  if (outputs.empty()) outputs = {0.0, problem.t_end};
  if (!std::is_sorted(outputs.begin(), outputs.end())) throw ConfigError("PDE output times must be sorted");
  const double tol = 1e-12 * std::max(1.0, problem.t_end);
  if (outputs.front() < -tol || outputs.back() > problem.t_end + tol)
    throw ConfigError("PDE output times must lie in [0, t_end]");

  Eigen::VectorXd z(grid.node_count());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z(i) = eval_field(problem.initial, grid.point_of(i));
    if (!(z(i) >= 0.0 && z(i) <= 1.0))
      throw ConfigError("PDE initial condition " + format_double(z(i)) + " outside [0,1]");
  }

  const bool bounded = problem.kind != ModelKind::RandomWalk1d;
  constexpr double kSlack = 1e-6;
  PdeOperator<double> rhs(problem);
  Eigen::VectorXd f(z.size());
  std::int64_t step_count = 0;
  auto advance = [&](double h) {
    rhs(z, f);
    z += h * f;
    ++step_count;
    const double lo = z.minCoeff();
    const double hi = z.maxCoeff();
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo < -kSlack || (bounded && hi > 1.0 + kSlack))
      throw InstabilityError("PDE solution left [" + format_double(-kSlack) + ", 1+" + format_double(kSlack) +
                                 "]: range [" + format_double(lo) + ", " + format_double(hi) + "]",
                             step_count);
  };

  Eigen::MatrixXd values(Eigen::Index(outputs.size()), grid.node_count());
  double t = 0.0;
  for (std::size_t o = 0; o < outputs.size(); ++o) {
    const double remaining = outputs[o] - t;
    if (remaining > 0.0) {
      const auto full = std::int64_t(std::floor(remaining / problem.dt + 1e-9));
      for (std::int64_t k = 0; k < full; ++k) advance(problem.dt);
      const double rest = remaining - double(full) * problem.dt;
      if (rest > 1e-9 * problem.dt) advance(rest);
      t = outputs[o];
    }
    values.row(Eigen::Index(o)) = z.transpose();
  }
  return SpaceTimeField(grid, std::move(outputs), std::move(values));
}

namespace {

// Nearest solver lattice index to s, ties to the lower index.
int nearest_index(const Axis& axis, double s) {
  const double u = (s - axis.lo) / axis.ds();
  return int(std::ceil(u - 0.5 - 1e-9));
}

}  // namespace

SpaceTimeField sample_on_chain_grid(const SpaceTimeField& field, const GridSpec& chain_grid,
                                    const std::vector<double>& times) {
  const GridSpec& solver = field.grid();
  if (solver.dimension() != chain_grid.dimension()) throw DomainError("solver and chain grids differ in dimension");
  for (int a = 0; a < solver.dimension(); ++a) {
    const Axis& s = solver.axis(a);
    const Axis& c = chain_grid.axis(a);
    const double tol = 1e-9 * (c.hi - c.lo);
    if (std::abs(s.lo - c.lo) > tol || std::abs(s.hi - c.hi) > tol)
      throw DomainError("solver and chain grids cover different extents");
  }

  std::vector<Eigen::Index> source(std::size_t(chain_grid.node_count()), -1);
  for (Eigen::Index i = 0; i < chain_grid.node_count(); ++i) {
    const Eigen::Vector2d p = chain_grid.point_of(i);
    const int n = nearest_index(solver.axis(0), p(0));
    const int m = solver.dimension() == 2 ? nearest_index(solver.axis(1), p(1)) : 1;
    const bool inside = n >= 1 && n <= solver.count(0) && (solver.dimension() == 1 || (m >= 1 && m <= solver.count(1)));
    source[std::size_t(i)] = inside ? solver.flat_index(n, m) : -1;
  }

  Eigen::MatrixXd values(Eigen::Index(times.size()), chain_grid.node_count());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Eigen::Index row = field.time_index(times[k]);
    for (Eigen::Index i = 0; i < chain_grid.node_count(); ++i) {
      const Eigen::Index from = source[std::size_t(i)];
      values(Eigen::Index(k), i) = from < 0 ? 0.0 : field.values()(row, from);
    }
  }
  return SpaceTimeField(chain_grid, times, std::move(values));
}

}  // namespace contlim
