#include "contlim/grid.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace contlim {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::RandomWalk1d: return "rw1d";
    case ModelKind::Network1d: return "net1d";
    case ModelKind::Network2d: return "net2d";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "rw1d") return ModelKind::RandomWalk1d;
  if (name == "net1d") return ModelKind::Network1d;
  if (name == "net2d") return ModelKind::Network2d;
  throw ConfigError("unknown model '" + name + "' (expected rw1d, net1d or net2d)");
}

namespace {

void check_axis(const Axis& axis) {
  if (axis.interior < 1) throw ConfigError("grid needs at least one interior node per axis");
  if (!(axis.hi > axis.lo)) throw ConfigError("grid extent must satisfy s_min < s_max");
}

}  // namespace

GridSpec GridSpec::line(double lo, double hi, int interior) {
  GridSpec grid;
  grid.dimension_ = 1;
  grid.axes_[0] = Axis{lo, hi, interior};
  grid.axes_[1] = Axis{0.0, 1.0, 1};
  check_axis(grid.axes_[0]);
  return grid;
}

GridSpec GridSpec::rectangle(const Axis& first, const Axis& second) {
  check_axis(first);
  check_axis(second);
  if (std::abs(first.ds() - second.ds()) > 1e-12 * std::max(first.ds(), second.ds()))
    throw ConfigError("2D grids need equal spacing on both axes");
  GridSpec grid;
  grid.dimension_ = 2;
  grid.axes_ = {first, second};
  return grid;
}

Eigen::Index GridSpec::node_count() const {
  return dimension_ == 2 ? Eigen::Index(axes_[0].interior) * axes_[1].interior : axes_[0].interior;
}

Eigen::Index GridSpec::padded_count() const {
  return dimension_ == 2 ? Eigen::Index(axes_[0].interior + 2) * (axes_[1].interior + 2)
                         : axes_[0].interior + 2;
}

double GridSpec::position(int index, int a) const {
  const Axis& axis = axes_[a];
  if (a >= dimension_ || index < 0 || index > axis.interior + 1)
    throw DomainError("node index " + std::to_string(index) + " outside 0.." +
                      std::to_string(axis.interior + 1));
  return axis.lo + index * axis.ds();
}

Eigen::Vector2d GridSpec::point(int n, int m) const {
  return {position(n, 0), dimension_ == 2 ? position(m, 1) : 0.0};
}

Eigen::Index GridSpec::flat_index(int n, int m) const {
  if (dimension_ == 1) return n - 1;
  return Eigen::Index(n - 1) * axes_[1].interior + (m - 1);
}

std::pair<int, int> GridSpec::node_of(Eigen::Index flat) const {
  if (dimension_ == 1) return {int(flat) + 1, 0};
  const int columns = axes_[1].interior;
  return {int(flat / columns) + 1, int(flat % columns) + 1};
}

Eigen::Vector2d GridSpec::point_of(Eigen::Index flat) const {
  const auto [n, m] = node_of(flat);
  return point(n, m);
}

Eigen::Index GridSpec::padded_index(int n, int m) const {
  if (dimension_ == 1) return n;
  return Eigen::Index(n) * (axes_[1].interior + 2) + m;
}

double node_position(const GridSpec& grid, int index, int axis) { return grid.position(index, axis); }

namespace {

// Nearest lattice index (0..N+1) of s on an axis; throws when s is not a grid point.
int lattice_index(const Axis& axis, double s) {
  const double t = (s - axis.lo) / axis.ds();
  const double i = std::round(t);
  if (std::abs(t - i) > 1e-6 || i < 0 || i > axis.interior + 1)
    throw DomainError("tabulated field queried off-grid at s=" + format_double(s));
  return int(i);
}

double tabulated_value(const TabulatedField& field, int n, int m) {
  const GridSpec& grid = *field.grid;
  n = std::clamp(n, 1, grid.count(0));
  if (grid.dimension() == 2) m = std::clamp(m, 1, grid.count(1));
  return field.values(grid.flat_index(n, m));
}

struct TabulatedStencil {
  const TabulatedField& field;
  int n, m;
  double at(int axis, int offset) const {
    return axis == 0 ? tabulated_value(field, n + offset, m) : tabulated_value(field, n, m + offset);
  }
};

TabulatedStencil stencil(const TabulatedField& field, const Eigen::Vector2d& s) {
  if (!field.grid) throw DomainError("tabulated field is not bound to a grid");
  const GridSpec& grid = *field.grid;
  const int n = lattice_index(grid.axis(0), s(0));
  const int m = grid.dimension() == 2 ? lattice_index(grid.axis(1), s(1)) : 0;
  return {field, n, m};
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double eval_field(const FieldSpec& field, const Eigen::Vector2d& s) {
  return std::visit(Overloaded{
                        [](const ConstantField& f) { return f.value; },
                        [&](const GaussianField& f) { return f.amplitude * std::exp(-s.squaredNorm()); },
                        [&](const AffineField& f) { return f.offset + f.slope.dot(s); },
                        [&](const TabulatedField& f) { return stencil(f, s).at(0, 0); },
                    },
                    field);
}

double eval_derivative(const FieldSpec& field, const Eigen::Vector2d& s, int axis) {
  return std::visit(Overloaded{
                        [](const ConstantField&) { return 0.0; },
                        [&](const GaussianField& f) {
                          return -2.0 * s(axis) * f.amplitude * std::exp(-s.squaredNorm());
                        },
                        [&](const AffineField& f) { return f.slope(axis); },
                        [&](const TabulatedField& f) {
                          const auto st = stencil(f, s);
                          return (st.at(axis, 1) - st.at(axis, -1)) / (2.0 * f.grid->ds());
                        },
                    },
                    field);
}

double eval_second_derivative(const FieldSpec& field, const Eigen::Vector2d& s, int axis) {
  return std::visit(Overloaded{
                        [](const ConstantField&) { return 0.0; },
                        [&](const GaussianField& f) {
                          return (4.0 * s(axis) * s(axis) - 2.0) * f.amplitude * std::exp(-s.squaredNorm());
                        },
                        [](const AffineField&) { return 0.0; },
                        [&](const TabulatedField& f) {
                          const auto st = stencil(f, s);
                          const double h = f.grid->ds();
                          return (st.at(axis, 1) - 2.0 * st.at(axis, 0) + st.at(axis, -1)) / (h * h);
                        },
                    },
                    field);
}

bool is_tabulated(const FieldSpec& field) { return std::holds_alternative<TabulatedField>(field); }

void bind_grid(FieldSpec& field, const GridSpec& grid) {
  if (auto* tab = std::get_if<TabulatedField>(&field)) {
    if (tab->values.size() != grid.node_count())
      throw ConfigError("tabulated field has " + std::to_string(tab->values.size()) + " values, grid has " +
                        std::to_string(grid.node_count()) + " interior nodes");
    tab->grid = grid;
  }
}

std::string describe(const FieldSpec& field) {
  return std::visit(Overloaded{
                        [](const ConstantField& f) { return "kind=constant, value=" + format_double(f.value); },
                        [](const GaussianField& f) {
                          return "kind=gaussian, amplitude=" + format_double(f.amplitude);
                        },
                        [](const AffineField& f) {
                          return "kind=affine, offset=" + format_double(f.offset) +
                                 ", slope1=" + format_double(f.slope(0)) + ", slope2=" + format_double(f.slope(1));
                        },
                        [](const TabulatedField& f) {
                          std::string out = "kind=tabulated, values=";
                          for (Eigen::Index i = 0; i < f.values.size(); ++i) {
                            if (i) out += ' ';
                            out += format_double(f.values(i));
                          }
                          return out;
                        },
                    },
                    field);
}

namespace {

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto result = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || result.ec != std::errc() || result.ptr != t.data() + t.size())
    throw ConfigError("field key '" + key + "': '" + t + "' is not a number");
  return value;
}

}  // namespace

FieldSpec parse_field(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("field record entry '" + trim(item) + "' lacks '='");
    const std::string key = trim(item.substr(0, eq));
    if (!entries.emplace(key, trim(item.substr(eq + 1))).second)
      throw ConfigError("field record repeats key '" + key + "'");
  }
  const auto kind_it = entries.find("kind");
  if (kind_it == entries.end()) throw ConfigError("field record '" + text + "' has no kind");
  const std::string kind = kind_it->second;
  entries.erase(kind_it);

  auto take = [&](const std::string& key, double fallback, bool required) {
    const auto it = entries.find(key);
    if (it == entries.end()) {
      if (required) throw ConfigError("field kind=" + kind + " requires key '" + key + "'");
      return fallback;
    }
    const double v = parse_number(key, it->second);
    entries.erase(it);
    return v;
  };

  FieldSpec field;
  if (kind == "constant") {
    field = ConstantField{take("value", 0.0, true)};
  } else if (kind == "gaussian") {
    field = GaussianField{take("amplitude", 0.0, true)};
  } else if (kind == "affine") {
    AffineField f;
    f.offset = take("offset", 0.0, false);
    f.slope(0) = take("slope1", take("slope", 0.0, false), false);
    f.slope(1) = take("slope2", 0.0, false);
    field = f;
  } else if (kind == "tabulated") {
    const auto it = entries.find("values");
    if (it == entries.end()) throw ConfigError("field kind=tabulated requires key 'values'");
    std::vector<double> values;
    std::stringstream vs(it->second);
    std::string token;
    while (vs >> token) values.push_back(parse_number("values", token));
    entries.erase(it);
    field = TabulatedField{Eigen::Map<Eigen::VectorXd>(values.data(), Eigen::Index(values.size())), std::nullopt};
  } else {
    throw ConfigError("unknown field kind '" + kind + "' (expected constant, gaussian, affine, tabulated)");
  }
  if (!entries.empty()) throw ConfigError("field kind=" + kind + " has unknown key '" + entries.begin()->first + "'");
  return field;
}

double time_scaling(const GridSpec& grid) { return grid.ds() * grid.ds(); }

double step_length(const ModelParams& params, const GridSpec& grid) {
  if (params.kind == ModelKind::RandomWalk1d) return time_scaling(grid);
  return time_scaling(grid) / double(params.capacity);
}

TransitionTable derive_probabilities(const ModelParams& params, const GridSpec& grid) {
  const int dim = dimension_of(params.kind);
  if (grid.dimension() != dim)
    throw ConfigError("model " + to_string(params.kind) + " needs a " + std::to_string(dim) + "D grid");
  if (params.capacity < 1) throw ConfigError("capacity M must be at least 1");

  TransitionTable table;
  table.grid = grid;
  table.kind = params.kind;
  table.capacity = params.capacity;
  table.dt = step_length(params, grid);
  const double ds = grid.ds();
  const int directions = table.directions();
  const int n_max = grid.count(0) + 1;
  const int m_max = dim == 2 ? grid.count(1) + 1 : 0;

  for (int d = 0; d < directions; ++d) table.hop[d].resize(grid.padded_count());
  for (int n = 0; n <= n_max; ++n) {
    for (int m = 0; m <= m_max; ++m) {
      const Eigen::Vector2d s = grid.point(n, m);
      const Eigen::Index p = grid.padded_index(n, m);
      for (int d = 0; d < directions; ++d)
        table.hop[d](p) = eval_field(params.diffusion[d / 2], s) + eval_field(params.bias[d], s) * ds;
    }
  }

  static const char* kNames1d[] = {"P_l", "P_r"};
  static const char* kNames2d[] = {"P_w", "P_e", "P_s", "P_n"};
  auto node_label = [&](int n, int m) {
    std::string label = "node " + std::to_string(n);
    if (dim == 2) label = "node (" + std::to_string(n) + "," + std::to_string(m) + ")";
    return label;
  };
  for (int n = 1; n < n_max; ++n) {
    for (int m = dim == 2 ? 1 : 0; m <= (dim == 2 ? m_max - 1 : 0); ++m) {
      const Eigen::Index p = grid.padded_index(n, m);
      double sum = 0.0;
      for (int d = 0; d < directions; ++d) {
        const double value = table.hop[d](p);
        if (!(value >= 0.0))
          throw ConfigError(node_label(n, m) + ": " + (dim == 2 ? kNames2d[d] : kNames1d[d]) + " = " +
                            format_double(value) + " is negative");
        sum += value;
      }
      if (sum > 1.0 + 1e-12)
        throw ConfigError(node_label(n, m) + ": hop probabilities sum to " + format_double(sum) + " > 1");
    }
  }

  table.arrivals = Eigen::ArrayXd::Zero(grid.node_count());
  if (params.kind != ModelKind::RandomWalk1d) {
    // g(n) = M * g_p(v(n)) * dt
    for (Eigen::Index i = 0; i < grid.node_count(); ++i) {
      const double g = double(params.capacity) * eval_field(params.generation, grid.point_of(i)) * table.dt;
      if (!(g >= 0.0)) {
        const auto [n, m] = grid.node_of(i);
        throw ConfigError(node_label(n, m) + ": generation mean " + format_double(g) + " is negative");
      }
      table.arrivals(i) = g;
    }
  }
  return table;
}

}  // namespace contlim
