#pragma once

#include "contlim/core.hpp"
#include "contlim/grid.hpp"
#include "contlim/simulate.hpp"

#include <array>
#include <vector>

namespace contlim {

// Limiting PDE of one of the chain models, with zero Dirichlet data on the boundary.
//   rw1d:  z_t = (b z_s)_s + ((b_s + c) z)_s
//   net1d: z_t = b ((1-z)(1+3z) z_s)_s + 2(1-z) z_s b_s + z(1-z)^2 b_ss + (c z (1-z)^2)_s + g_p
//   net2d: z_t = sum_j b_j ((1+5z)(1-z)^3 z_j)_j + 2(1-z)^3 z_j b_j' + z(1-z)^4 b_j'' + (c_j z(1-z)^4)_j + g_p
struct PdeProblem {
  ModelKind kind = ModelKind::Network1d;
  GridSpec grid;
  std::array<FieldSpec, 2> diffusion{ConstantField{0.5}, ConstantField{0.5}};
  std::array<FieldSpec, 2> convection{ConstantField{0.0}, ConstantField{0.0}};
  FieldSpec source = ConstantField{0.0};
  FieldSpec initial = ConstantField{0.0};
  double t_end = 1.0;
  double dt = 0.0;
  // Times at which the solution is recorded; empty means {0, t_end}.
  std::vector<double> output_times;

  // c = c_l - c_r in 1D; c1 = c_w - c_e and c2 = c_s - c_n in 2D.
  static PdeProblem from_model(const ModelParams& params, const GridSpec& grid, double t_end, double dt);
};

// a - b, kept analytic when both operands allow it and tabulated on `grid` otherwise.
FieldSpec field_difference(const FieldSpec& a, const FieldSpec& b, const GridSpec& grid);

// Coefficients of one axis sampled at interior nodes and at the faces between
// consecutive lattice nodes along that axis (row-major over the face lattice).
struct AxisCoefficients {
  Eigen::ArrayXd b_node, b_s_node, b_ss_node;
  Eigen::ArrayXd b_face, b_s_face, c_face;
};

std::array<AxisCoefficients, 2> sample_coefficients(const PdeProblem& problem);

// Method-of-lines right-hand side. Fluxes live on faces and use the arithmetic mean of
// the two adjacent values; boundary values are zero.
template <typename Scalar>
class PdeOperator {
 public:
  explicit PdeOperator(const PdeProblem& problem);

  template <typename Derived>
  void operator()(const Eigen::MatrixBase<Derived>& z, Vector<Scalar>& out);

  const GridSpec& grid() const { return grid_; }

 private:
  using Array = RowMajorArray<Scalar>;
  void line_operator(Vector<Scalar>& out);

  struct AxisData {
    Array b_node, b_s_node, b_ss_node, b_face, a_face, c_face;
  };

  ModelKind kind_;
  GridSpec grid_;
  // Scratch buffers reused across calls.
  struct Work {
    Array mean, gradient, flux, convective;
  };

  std::array<AxisData, 2> axes_;
  std::array<Work, 2> work_;
  Array source_;
  Array padded_;
  Array result_, center_, hop_, centered_;
  std::array<Eigen::Array<Scalar, Eigen::Dynamic, 1>, 3> line_buffers_;
};

template <typename Derived>
Vector<typename Derived::Scalar> rhs_rw1d(const Eigen::MatrixBase<Derived>& z, const GridSpec& grid,
                                          const FieldSpec& b, const FieldSpec& c);
template <typename Derived>
Vector<typename Derived::Scalar> rhs_net1d(const Eigen::MatrixBase<Derived>& z, const GridSpec& grid,
                                           const FieldSpec& b, const FieldSpec& c, const FieldSpec& g_p);
template <typename Derived>
Vector<typename Derived::Scalar> rhs_net2d(const Eigen::MatrixBase<Derived>& z, const GridSpec& grid,
                                           const FieldSpec& b1, const FieldSpec& b2, const FieldSpec& c1,
                                           const FieldSpec& c2, const FieldSpec& g_p);

// Largest forward-Euler step admitted: ds^2 / (2 d max(b) kappa + ds max|c_eff|), with
// kappa = 4/3 for net1d and 1 otherwise.
double stability_limit(const PdeProblem& problem);

// Forward Euler from z0 to t_end, landing exactly on every output time. ConfigError when
// dt breaks the stability limit; InstabilityError on non-finite values or values leaving
// [-1e-6, 1 + 1e-6] (network kinds; the random walk only checks the lower bound).
SpaceTimeField solve(const PdeProblem& problem);

// Values at the chain grid's interior nodes (nearest solver node, ties to the lower index)
// and at the requested times (floor in time).
SpaceTimeField sample_on_chain_grid(const SpaceTimeField& field, const GridSpec& chain_grid,
                                    const std::vector<double>& times);

}  // namespace contlim

#include "contlim/pde_impl.hpp"
