#pragma once

// Expected one-step drift f_N(x) of each chain model, evaluated as array expressions over
// shifted views of a zero-padded copy of the normalized state. Out-of-range neighbors
// (destinations and beyond) read as zero.

#include "contlim/core.hpp"
#include "contlim/grid.hpp"

#include <array>

namespace contlim {

template <typename Scalar>
class DriftEvaluator {
 public:
  explicit DriftEvaluator(const TransitionTable& table) : table_(&table) {
    const GridSpec& grid = table.grid;
    for (int d = 0; d < table.directions(); ++d) hop_[d] = table.hop[d].template cast<Scalar>();
    arrivals_ = table.arrivals.template cast<Scalar>();
    if (grid.dimension() == 1) {
      padded_ = Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(grid.count() + 4);
    } else {
      padded_ = Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero((grid.count(0) + 4) * (grid.count(1) + 4));
    }
    complement_ = padded_;
  }

  const TransitionTable& table() const { return *table_; }

  // P_r(n-1) x_{n-1} + P_l(n+1) x_{n+1} - (P_r(n) + P_l(n)) x_n.
  template <typename Derived>
  void random_walk(const Eigen::MatrixBase<Derived>& x, Vector<Scalar>& out) {
    const int N = table_->grid.count();
    load_1d(x);
    auto X = [&](int k) { return padded_.segment(2 + k, N); };
    auto Pl = [&](int k) { return hop_[kLeft].segment(1 + k, N); };
    auto Pr = [&](int k) { return hop_[kRight].segment(1 + k, N); };
    out.resize(N);
    out.array() = Pr(-1) * X(-1) + Pl(1) * X(1) - (Pr(0) + Pl(0)) * X(0);
  }

  // Interference-limited queue network on a line, W(n, x) = x.
  template <typename Derived>
  void network_1d(const Eigen::MatrixBase<Derived>& x, Vector<Scalar>& out) {
    const int N = table_->grid.count();
    load_1d(x);
    complement_ = Scalar(1) - padded_;
    auto X = [&](int k) { return padded_.segment(2 + k, N); };
    auto Y = [&](int k) { return complement_.segment(2 + k, N); };
    auto Pl = [&](int k) { return hop_[kLeft].segment(1 + k, N); };
    auto Pr = [&](int k) { return hop_[kRight].segment(1 + k, N); };
    out.resize(N);
    out.array() = Y(0) * (Pr(-1) * X(-1) * Y(1) + Pl(1) * X(1) * Y(-1)) -
                  X(0) * (Pr(0) * Y(1) * Y(2) + Pl(0) * Y(-1) * Y(-2)) + arrivals_;
  }

  // Four-neighbor version: a reception at r succeeds iff r is silent and no neighbor of r
  // other than the sender transmits.
  template <typename Derived>
  void network_2d(const Eigen::MatrixBase<Derived>& x, Vector<Scalar>& out) {
    const int N1 = table_->grid.count(0);
    const int N2 = table_->grid.count(1);
    const int stride = N2 + 4;
    Eigen::Map<RowMajorArray<Scalar>> padded(padded_.data(), N1 + 4, stride);
    padded.block(2, 2, N1, N2) = Eigen::Map<const RowMajorArray<Scalar>>(x.derived().eval().data(), N1, N2);
    complement_ = Scalar(1) - padded_;
    Eigen::Map<const RowMajorArray<Scalar>> Xp(padded_.data(), N1 + 4, stride);
    Eigen::Map<const RowMajorArray<Scalar>> Yp(complement_.data(), N1 + 4, stride);
    auto X = [&](int a, int b) { return Xp.block(2 + a, 2 + b, N1, N2); };
    auto Y = [&](int a, int b) { return Yp.block(2 + a, 2 + b, N1, N2); };
    auto P = [&](Direction d, int a, int b) {
      return Eigen::Map<const RowMajorArray<Scalar>>(hop_[d].data(), N1 + 2, N2 + 2).block(1 + a, 1 + b, N1, N2);
    };

    out.resize(Eigen::Index(N1) * N2);
    Eigen::Map<RowMajorArray<Scalar>> result(out.data(), N1, N2);
    Eigen::Map<const RowMajorArray<Scalar>> arrivals(arrivals_.data(), N1, N2);
    // Receptions from the west, east, south and north neighbors.
    result = Y(0, 0) * (P(kEast, -1, 0) * X(-1, 0) * Y(1, 0) * Y(0, 1) * Y(0, -1) +
                        P(kWest, 1, 0) * X(1, 0) * Y(-1, 0) * Y(0, 1) * Y(0, -1) +
                        P(kNorth, 0, -1) * X(0, -1) * Y(1, 0) * Y(-1, 0) * Y(0, 1) +
                        P(kSouth, 0, 1) * X(0, 1) * Y(1, 0) * Y(-1, 0) * Y(0, -1));
    // Successful sends towards each direction.
    result -= X(0, 0) * (P(kEast, 0, 0) * Y(1, 0) * Y(2, 0) * Y(1, 1) * Y(1, -1) +
                         P(kWest, 0, 0) * Y(-1, 0) * Y(-2, 0) * Y(-1, 1) * Y(-1, -1) +
                         P(kNorth, 0, 0) * Y(0, 1) * Y(0, 2) * Y(1, 1) * Y(-1, 1) +
                         P(kSouth, 0, 0) * Y(0, -1) * Y(0, -2) * Y(1, -1) * Y(-1, -1));
    result += arrivals;
  }

  // Dispatch on the table's model.
  template <typename Derived>
  void operator()(const Eigen::MatrixBase<Derived>& x, Vector<Scalar>& out) {
    switch (table_->kind) {
      case ModelKind::RandomWalk1d: random_walk(x, out); break;
      case ModelKind::Network1d: network_1d(x, out); break;
      case ModelKind::Network2d: network_2d(x, out); break;
    }
  }

 private:
  template <typename Derived>
  void load_1d(const Eigen::MatrixBase<Derived>& x) {
    padded_.segment(2, table_->grid.count()) = x.array();
  }

  const TransitionTable* table_;
  std::array<Eigen::Array<Scalar, Eigen::Dynamic, 1>, 4> hop_;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> arrivals_;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> padded_;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> complement_;
};

namespace detail {

template <typename Derived>
void check_drift_input(const Eigen::MatrixBase<Derived>& x, const TransitionTable& table, int dimension,
                       bool unit_interval) {
  if (table.grid.dimension() != dimension)
    throw DomainError("drift needs a " + std::to_string(dimension) + "D transition table");
  if (x.size() != table.grid.node_count())
    throw DomainError("state has " + std::to_string(x.size()) + " entries, grid has " +
                      std::to_string(table.grid.node_count()) + " interior nodes");
  if (unit_interval) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const auto v = x(i);
      if (!(v >= 0 && v <= 1))
        throw DomainError("normalized state entry " + std::to_string(i) + " outside [0,1]");
    }
  }
}

}  // namespace detail

template <typename Derived>
Vector<typename Derived::Scalar> drift_random_walk(const Eigen::MatrixBase<Derived>& x, const TransitionTable& table) {
  detail::check_drift_input(x, table, 1, false);
  Vector<typename Derived::Scalar> out;
  DriftEvaluator<typename Derived::Scalar>(table).random_walk(x, out);
  return out;
}

template <typename Derived>
Vector<typename Derived::Scalar> drift_network_1d(const Eigen::MatrixBase<Derived>& x, const TransitionTable& table) {
  detail::check_drift_input(x, table, 1, true);
  Vector<typename Derived::Scalar> out;
  DriftEvaluator<typename Derived::Scalar>(table).network_1d(x, out);
  return out;
}

template <typename Derived>
Vector<typename Derived::Scalar> drift_network_2d(const Eigen::MatrixBase<Derived>& x, const TransitionTable& table) {
  detail::check_drift_input(x, table, 2, true);
  Vector<typename Derived::Scalar> out;
  DriftEvaluator<typename Derived::Scalar>(table).network_2d(x, out);
  return out;
}

// Drift of the model the table was derived for.
template <typename Derived>
Vector<typename Derived::Scalar> drift(const Eigen::MatrixBase<Derived>& x, const TransitionTable& table) {
  switch (table.kind) {
    case ModelKind::RandomWalk1d: return drift_random_walk(x, table);
    case ModelKind::Network1d: return drift_network_1d(x, table);
    case ModelKind::Network2d: return drift_network_2d(x, table);
  }
  return {};
}

// Multiplier on f_N in x(k+1) = x(k) + scale * f_N(x(k)): 1/M for the queue networks, 1 for
// the random walk, whose f_N is already per particle.
inline double drift_scale(const TransitionTable& table) {
  return table.kind == ModelKind::RandomWalk1d ? 1.0 : 1.0 / double(table.capacity);
}

}  // namespace contlim
