#pragma once

// Template definitions for pde.hpp.

namespace contlim {

namespace detail {

template <typename Scalar>
RowMajorArray<Scalar> as_lattice(const Eigen::ArrayXd& flat, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const RowMajorArray<double>>(flat.data(), rows, cols).template cast<Scalar>();
}

}  // namespace detail

template <typename Scalar>
PdeOperator<Scalar>::PdeOperator(const PdeProblem& problem) : kind_(problem.kind), grid_(problem.grid) {
  if (grid_.dimension() != dimension_of(kind_))
    throw ConfigError("PDE " + to_string(kind_) + " needs a " + std::to_string(dimension_of(kind_)) + "D grid");
  const auto sampled = sample_coefficients(problem);
  const bool two_d = grid_.dimension() == 2;
  const Eigen::Index R = grid_.count(0);
  const Eigen::Index C = two_d ? grid_.count(1) : 1;
  for (int j = 0; j < grid_.dimension(); ++j) {
    const Eigen::Index face_rows = j == 0 ? R + 1 : R;
    const Eigen::Index face_cols = j == 0 ? C : C + 1;
    AxisData& axis = axes_[j];
    axis.b_node = detail::as_lattice<Scalar>(sampled[j].b_node, R, C);
    axis.b_s_node = detail::as_lattice<Scalar>(sampled[j].b_s_node, R, C);
    axis.b_ss_node = detail::as_lattice<Scalar>(sampled[j].b_ss_node, R, C);
    axis.b_face = detail::as_lattice<Scalar>(sampled[j].b_face, face_rows, face_cols);
    axis.c_face = detail::as_lattice<Scalar>(sampled[j].c_face, face_rows, face_cols);
    axis.a_face = axis.c_face + detail::as_lattice<Scalar>(sampled[j].b_s_face, face_rows, face_cols);
  }
  source_ = Array::Zero(R, C);
  if (kind_ != ModelKind::RandomWalk1d) {
    for (Eigen::Index i = 0; i < grid_.node_count(); ++i)
      source_(i / C, i % C) = Scalar(eval_field(problem.source, grid_.point_of(i)));
  }
  padded_ = Array::Zero(R + 2, two_d ? C + 2 : 1);
}

template <typename Scalar>
template <typename Derived>
void PdeOperator<Scalar>::operator()(const Eigen::MatrixBase<Derived>& z, Vector<Scalar>& out) {
  const bool two_d = grid_.dimension() == 2;
  const Eigen::Index R = grid_.count(0);
  const Eigen::Index C = two_d ? grid_.count(1) : 1;
  const Eigen::Index c0 = two_d ? 1 : 0;
  const Scalar h = Scalar(grid_.ds());
  const Scalar one(1);
  const auto& values = z.derived().eval();
  padded_.block(1, c0, R, C) = Eigen::Map<const Array>(values.data(), R, C);
  if (!two_d) return line_operator(out);

  result_ = source_;
  center_ = padded_.block(1, c0, R, C);
  hop_ = one - center_;
  for (int j = 0; j < grid_.dimension(); ++j) {
    const AxisData& axis = axes_[j];
    Work& w = work_[j];
    // Values on either side of each face, and the centered derivative at nodes.
    const auto left = j == 0 ? padded_.block(0, c0, R + 1, C) : padded_.block(1, 0, R, C + 1);
    const auto right = j == 0 ? padded_.block(1, c0, R + 1, C) : padded_.block(1, 1, R, C + 1);
    if (j == 0)
      centered_ = (padded_.block(2, c0, R, C) - padded_.block(0, c0, R, C)) / (2 * h);
    else
      centered_ = (padded_.block(1, 2, R, C) - padded_.block(1, 0, R, C)) / (2 * h);
    w.mean = (left + right) / Scalar(2);
    w.gradient = (right - left) / h;
    auto divergence = [&](const Array& flux) {
      return (flux.block(j == 0, j == 1, R, C) - flux.block(0, 0, R, C)) / h;
    };

    switch (kind_) {
      case ModelKind::RandomWalk1d:
        w.flux = axis.b_face * w.gradient + axis.a_face * w.mean;
        result_ += divergence(w.flux);
        break;
      case ModelKind::Network1d:
        w.flux = (one - w.mean) * (one + 3 * w.mean) * w.gradient;
        w.convective = axis.c_face * w.mean * (one - w.mean).square();
        result_ += axis.b_node * divergence(w.flux) + 2 * hop_ * centered_ * axis.b_s_node +
                   center_ * hop_.square() * axis.b_ss_node + divergence(w.convective);
        break;
      case ModelKind::Network2d:
        w.flux = (one + 5 * w.mean) * (one - w.mean).cube() * w.gradient;
        w.convective = axis.c_face * w.mean * (one - w.mean).square().square();
        result_ += axis.b_node * divergence(w.flux) + 2 * hop_.cube() * centered_ * axis.b_s_node +
                   center_ * hop_.square().square() * axis.b_ss_node + divergence(w.convective);
        break;
    }
  }
  out.resize(R * C);
  Eigen::Map<Array>(out.data(), R, C) = result_;
}

// Same discretization on contiguous vectors, which Eigen vectorizes.
template <typename Scalar>
void PdeOperator<Scalar>::line_operator(Vector<Scalar>& out) {
  using Line = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  auto line = [](const Array& a) { return Eigen::Map<const Line>(a.data(), a.size()); };
  const Eigen::Index R = grid_.count();
  const Scalar h = Scalar(grid_.ds());
  const Scalar one(1);
  const auto z = line(padded_);
  const AxisData& axis = axes_[0];
  auto& mean = line_buffers_[0];
  auto& gradient = line_buffers_[1];
  auto& flux = line_buffers_[2];
  mean = (z.head(R + 1) + z.tail(R + 1)) / Scalar(2);
  gradient = (z.tail(R + 1) - z.head(R + 1)) / h;
  auto divergence = [&](const Line& f) { return (f.tail(R) - f.head(R)) / h; };
  out.resize(R);
  auto result = out.array();
  if (kind_ == ModelKind::RandomWalk1d) {
    flux = line(axis.b_face) * gradient + line(axis.a_face) * mean;
    result = divergence(flux);
    return;
  }
  const auto center = z.segment(1, R);
  const auto centered = (z.tail(R) - z.head(R)) / (2 * h);
  flux = (one - mean) * (one + 3 * mean) * gradient;
  result = line(source_) + line(axis.b_node) * divergence(flux) +
           2 * (one - center) * centered * line(axis.b_s_node) +
           center * (one - center).square() * line(axis.b_ss_node);
  flux = line(axis.c_face) * mean * (one - mean).square();
  result += divergence(flux);
}

namespace detail {

template <typename Derived>
Vector<typename Derived::Scalar> evaluate_rhs(const Eigen::MatrixBase<Derived>& z, const PdeProblem& problem) {
  if (z.size() != problem.grid.node_count())
    throw DomainError("field has " + std::to_string(z.size()) + " values, grid has " +
                      std::to_string(problem.grid.node_count()) + " interior nodes");
  Vector<typename Derived::Scalar> out;
  PdeOperator<typename Derived::Scalar> op(problem);
  op(z, out);
  return out;
}

}  // namespace detail

template <typename Derived>
Vector<typename Derived::Scalar> rhs_rw1d(const Eigen::MatrixBase<Derived>& z, const GridSpec& grid,
                                          const FieldSpec& b, const FieldSpec& c) {
  PdeProblem problem;
  problem.kind = ModelKind::RandomWalk1d;
  problem.grid = grid;
  problem.diffusion[0] = b;
  problem.convection[0] = c;
  return detail::evaluate_rhs(z, problem);
}

template <typename Derived>
Vector<typename Derived::Scalar> rhs_net1d(const Eigen::MatrixBase<Derived>& z, const GridSpec& grid,
                                           const FieldSpec& b, const FieldSpec& c, const FieldSpec& g_p) {
  PdeProblem problem;
  problem.kind = ModelKind::Network1d;
  problem.grid = grid;
  problem.diffusion[0] = b;
  problem.convection[0] = c;
  problem.source = g_p;
  return detail::evaluate_rhs(z, problem);
}

template <typename Derived>
Vector<typename Derived::Scalar> rhs_net2d(const Eigen::MatrixBase<Derived>& z, const GridSpec& grid,
                                           const FieldSpec& b1, const FieldSpec& b2, const FieldSpec& c1,
                                           const FieldSpec& c2, const FieldSpec& g_p) {
  PdeProblem problem;
  problem.kind = ModelKind::Network2d;
  problem.grid = grid;
  problem.diffusion = {b1, b2};
  problem.convection = {c1, c2};
  problem.source = g_p;
  return detail::evaluate_rhs(z, problem);
}

}  // namespace contlim
