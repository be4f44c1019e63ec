#pragma once

#include "contlim/core.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace contlim {

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int interior = 1;  // N: nodes 1..N are sensors, 0 and N+1 are destinations

  double ds() const { return (hi - lo) / (interior + 1); }
  bool operator==(const Axis&) const = default;
};

// Uniform grid over an interval or a rectangle with equal spacing on both axes.
class GridSpec {
 public:
  GridSpec() = default;
  static GridSpec line(double lo, double hi, int interior);
  static GridSpec rectangle(const Axis& first, const Axis& second);

  int dimension() const { return dimension_; }
  const Axis& axis(int a) const { return axes_[a]; }
  int count(int a = 0) const { return axes_[a].interior; }
  double ds() const { return axes_[0].ds(); }

  // Interior nodes only.
  Eigen::Index node_count() const;
  // Interior plus the destination frame.
  Eigen::Index padded_count() const;

  // Index runs over 0..N+1 on the given axis.
  double position(int index, int a = 0) const;
  Eigen::Vector2d point(int n, int m = 0) const;

  // Row-major bijection between 1-based interior (n, m) and 0-based flat indices.
  Eigen::Index flat_index(int n, int m = 1) const;
  std::pair<int, int> node_of(Eigen::Index flat) const;
  Eigen::Vector2d point_of(Eigen::Index flat) const;

  // Row-major index over the frame-padded lattice, n and m in 0..N+1.
  Eigen::Index padded_index(int n, int m = 0) const;

  bool operator==(const GridSpec&) const = default;

 private:
  int dimension_ = 1;
  std::array<Axis, 2> axes_{};
};

double node_position(const GridSpec& grid, int index, int axis = 0);

struct ConstantField {
  double value = 0.0;
};

// amplitude * exp(-|s|^2)
struct GaussianField {
  double amplitude = 0.0;
};

struct AffineField {
  double offset = 0.0;
  Eigen::Vector2d slope = Eigen::Vector2d::Zero();
};

// Values at interior nodes (row-major in 2D). Must be bound to a grid before evaluation.
struct TabulatedField {
  Eigen::VectorXd values;
  std::optional<GridSpec> grid;
};

using FieldSpec = std::variant<ConstantField, GaussianField, AffineField, TabulatedField>;

double eval_field(const FieldSpec& field, const Eigen::Vector2d& s);
inline double eval_field(const FieldSpec& field, double s) {
  return eval_field(field, Eigen::Vector2d(s, 0.0));
}
double eval_derivative(const FieldSpec& field, const Eigen::Vector2d& s, int axis);
double eval_second_derivative(const FieldSpec& field, const Eigen::Vector2d& s, int axis);

bool is_tabulated(const FieldSpec& field);
// Attaches the grid to a tabulated field; checks the value count. No-op for analytic fields.
void bind_grid(FieldSpec& field, const GridSpec& grid);

// Tagged-record text form: "kind=gaussian, amplitude=0.5".
std::string describe(const FieldSpec& field);
FieldSpec parse_field(const std::string& text);

struct ModelParams {
  ModelKind kind = ModelKind::Network1d;
  std::array<FieldSpec, 2> diffusion{ConstantField{0.5}, ConstantField{0.5}};  // b, or b1 and b2
  std::array<FieldSpec, 4> bias{};  // c_l, c_r (1D) or c_w, c_e, c_s, c_n, indexed by Direction
  FieldSpec generation = ConstantField{0.0};  // g_p
  FieldSpec initial = ConstantField{0.0};     // z0
  std::int64_t capacity = 1;                  // M
};

// Time scaling delta_N = ds^2.
double time_scaling(const GridSpec& grid);
// Chain step length: ds^2 / M for the network models, ds^2 for the random walk.
double step_length(const ModelParams& params, const GridSpec& grid);

// Per-node hop probabilities and arrival means, precomputed for the hot loop.
struct TransitionTable {
  GridSpec grid;
  ModelKind kind = ModelKind::Network1d;
  std::int64_t capacity = 1;
  double dt = 0.0;
  std::array<Eigen::ArrayXd, 4> hop;  // frame-padded lattice, row-major
  Eigen::ArrayXd arrivals;            // interior nodes, mean messages generated per step

  int directions() const { return grid.dimension() == 2 ? 4 : 2; }
  double probability(Direction d, int n, int m = 0) const { return hop[d](grid.padded_index(n, m)); }
};

// P_d(n) = b_axis(v(n)) + c_d(v(n)) * ds at every lattice node including destinations.
// Throws ConfigError naming the node when an interior probability is negative or the
// directional sum exceeds one, or when an arrival mean is negative.
TransitionTable derive_probabilities(const ModelParams& params, const GridSpec& grid);

}  // namespace contlim
