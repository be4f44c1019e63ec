#include "contlim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace contlim {

namespace {

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    throw ConfigError("key '" + key + "': '" + text + "' is not a number");
  return value;
}

std::int64_t parse_integer(const std::string& key, const std::string& text) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("key '" + key + "': '" + text + "' is not an integer");
  return value;
}

int parse_int(const std::string& key, const std::string& text) {
  const std::int64_t value = parse_integer(key, text);
  if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max())
    throw ConfigError("key '" + key + "': " + text + " is out of range");
  return int(value);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
      throw ConfigError("key '" + key + "': '" + item + "' is not a seed");
    seeds.push_back(value);
  }
  return seeds;
}

FieldSpec parse_field_value(const std::string& key, const std::string& text) {
  try {
    return parse_field(text);
  } catch (const ConfigError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

Scenario network_1d(const std::string& name, double c_l, double c_r) {
  Scenario s;
  s.name = name;
  s.model = ModelKind::Network1d;
  s.n = {20, 20};
  s.diffusion = {ConstantField{0.5}, ConstantField{0.5}};
  s.bias[kLeft] = ConstantField{c_l};
  s.bias[kRight] = ConstantField{c_r};
  s.initial = GaussianField{0.5};
  s.generation = GaussianField{0.5};
  s.t_end = 1.0;
  return s;
}

Scenario network_2d(const std::string& name, const std::array<double, 4>& c) {
  Scenario s;
  s.name = name;
  s.model = ModelKind::Network2d;
  s.n = {20, 20};
  s.diffusion = {ConstantField{0.25}, ConstantField{0.25}};
  for (int d = 0; d < 4; ++d) s.bias[d] = ConstantField{c[d]};
  s.initial = GaussianField{0.5};
  s.generation = GaussianField{0.5};
  s.t_end = 0.1;
  return s;
}

Scenario random_walk(const std::string& name, FieldSpec initial) {
  Scenario s;
  s.name = name;
  s.model = ModelKind::RandomWalk1d;
  s.n = {10, 10};
  s.lo = {0.0, 0.0};
  s.hi = {1.0, 1.0};
  s.m = 1000;
  s.diffusion = {ConstantField{0.5}, ConstantField{0.5}};
  s.initial = std::move(initial);
  s.t_end = 0.1;
  return s;
}

const std::map<std::string, Scenario>& presets() {
  static const std::map<std::string, Scenario> table = [] {
    std::map<std::string, Scenario> t;
    t["net1d-fig5"] = network_1d("net1d-fig5", 0.0, 0.0);
    t["net1d-fig6"] = network_1d("net1d-fig6", 0.5, -0.5);
    t["net2d"] = network_2d("net2d", {0.0, 0.0, 0.0, 0.0});
    t["net2d-fig7"] = network_2d("net2d-fig7", {0.0, 0.0, 0.0, 0.0});
    t["net2d-fig8"] = network_2d("net2d-fig8", {-1.0, 1.0, -2.0, 2.0});
    t["rw1d-zero"] = random_walk("rw1d-zero", ConstantField{0.0});
    t["rw1d-half"] = random_walk("rw1d-half", AffineField{0.5, Eigen::Vector2d::Zero()});
    return t;
  }();
  return table;
}

bool two_d(const Scenario& s) { return dimension_of(s.model) == 2; }

void apply(Scenario& s, const std::string& key, const std::string& value) {
  if (key == "name") {
    if (value.empty()) throw ConfigError("key 'name' must not be empty");
    s.name = value;
  } else if (key == "model") {
    s.model = model_kind_from_string(value);
  } else if (key == "n") {
    s.n[0] = s.n[1] = parse_int(key, value);
  } else if (key == "n1") {
    s.n[0] = parse_int(key, value);
  } else if (key == "n2") {
    s.n[1] = parse_int(key, value);
  } else if (key == "lo") {
    s.lo[0] = s.lo[1] = parse_real(key, value);
  } else if (key == "hi") {
    s.hi[0] = s.hi[1] = parse_real(key, value);
  } else if (key == "lo1") {
    s.lo[0] = parse_real(key, value);
  } else if (key == "hi1") {
    s.hi[0] = parse_real(key, value);
  } else if (key == "lo2") {
    s.lo[1] = parse_real(key, value);
  } else if (key == "hi2") {
    s.hi[1] = parse_real(key, value);
  } else if (key == "m") {
    if (value == "auto")
      s.m.reset();
    else
      s.m = parse_integer(key, value);
  } else if (key == "b") {
    s.diffusion[0] = s.diffusion[1] = parse_field_value(key, value);
  } else if (key == "b1") {
    s.diffusion[0] = parse_field_value(key, value);
  } else if (key == "b2") {
    s.diffusion[1] = parse_field_value(key, value);
  } else if (key == "c_l" || key == "c_w") {
    s.bias[kWest] = parse_field_value(key, value);
  } else if (key == "c_r" || key == "c_e") {
    s.bias[kEast] = parse_field_value(key, value);
  } else if (key == "c_s") {
    s.bias[kSouth] = parse_field_value(key, value);
  } else if (key == "c_n") {
    s.bias[kNorth] = parse_field_value(key, value);
  } else if (key == "g") {
    s.generation = parse_field_value(key, value);
  } else if (key == "z0") {
    s.initial = parse_field_value(key, value);
  } else if (key == "l1") {
    s.initial = GaussianField{parse_real(key, value)};
  } else if (key == "l2") {
    s.generation = GaussianField{parse_real(key, value)};
  } else if (key == "t_end") {
    s.t_end = parse_real(key, value);
  } else if (key == "seed") {
    s.seeds = parse_seed_list(key, value);
    if (s.seeds.size() != 1) throw ConfigError("key 'seed' takes one value; use 'seeds' for a list");
  } else if (key == "seeds") {
    s.seeds = parse_seed_list(key, value);
  } else if (key == "output_dir") {
    s.output_dir = value;
  } else if (key == "solver_refine") {
    s.solver_refine = parse_int(key, value);
  } else if (key == "solver_step") {
    if (value == "auto")
      s.solver_step = SolverStep::Auto;
    else if (value == "chain")
      s.solver_step = SolverStep::Chain;
    else
      throw ConfigError("key 'solver_step': '" + value + "' (expected auto or chain)");
  } else if (key == "init") {
    if (value == "exact")
      s.init = InitMode::Exact;
    else if (value == "binomial")
      s.init = InitMode::Binomial;
    else
      throw ConfigError("key 'init': '" + value + "' (expected exact or binomial)");
  } else if (key == "snapshots") {
    s.snapshots = parse_int(key, value);
  } else if (key == "budget") {
    s.budget = parse_real(key, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

}  // namespace

std::int64_t Scenario::capacity() const {
  if (m) return *m;
  const auto count = std::int64_t(n[0]);
  return count * count * count;
}

GridSpec Scenario::grid() const {
  if (two_d(*this)) return GridSpec::rectangle(Axis{lo[0], hi[0], n[0]}, Axis{lo[1], hi[1], n[1]});
  return GridSpec::line(lo[0], hi[0], n[0]);
}

ModelParams Scenario::params() const {
  const GridSpec g = grid();
  ModelParams p;
  p.kind = model;
  p.diffusion = diffusion;
  p.bias = bias;
  if (!two_d(*this)) p.bias[kSouth] = p.bias[kNorth] = ConstantField{0.0};
  p.generation = generation;
  p.initial = initial;
  p.capacity = capacity();
  for (auto& f : p.diffusion) bind_grid(f, g);
  for (auto& f : p.bias) bind_grid(f, g);
  bind_grid(p.generation, g);
  bind_grid(p.initial, g);
  return p;
}

std::int64_t Scenario::steps() const {
  const double ds = grid().ds();
  const double scale = model == ModelKind::RandomWalk1d ? 1.0 : double(capacity());
  return std::int64_t(std::floor(t_end * scale / (ds * ds) + 1e-9));
}

std::int64_t Scenario::stride() const {
  const std::int64_t k = steps();
  return std::max<std::int64_t>(1, (k + snapshots - 1) / snapshots);
}

void validate(const Scenario& s) {
  for (int a = 0; a < dimension_of(s.model); ++a) {
    if (s.n[a] < 1) throw ConfigError("key 'n" + std::to_string(a + 1) + "': need at least one interior node");
    if (!(s.hi[a] > s.lo[a])) throw ConfigError("keys 'lo'/'hi': extent must satisfy lo < hi");
  }
  if (s.capacity() < 1) throw ConfigError("key 'm': M must be at least 1");
  if (!(s.t_end > 0.0)) throw ConfigError("key 't_end': T must be positive");
  if (s.seeds.empty()) throw ConfigError("key 'seeds': at least one seed is required");
  if (s.solver_refine < 1) throw ConfigError("key 'solver_refine': must be at least 1");
  if (s.snapshots < 1) throw ConfigError("key 'snapshots': must be at least 1");
  if (!(s.budget > 0.0)) throw ConfigError("key 'budget': must be positive");
  const ModelParams params = s.params();
  if (s.solver_refine > 1) {
    const bool tabulated = std::any_of(params.diffusion.begin(), params.diffusion.end(), is_tabulated) ||
                           std::any_of(params.bias.begin(), params.bias.end(), is_tabulated) ||
                           is_tabulated(params.generation) || is_tabulated(params.initial);
    if (tabulated) throw ConfigError("key 'solver_refine': tabulated fields need solver_refine = 1");
  }
  const GridSpec g = s.grid();
  derive_probabilities(params, g);
  for (Eigen::Index i = 0; i < g.node_count(); ++i) {
    const double z = eval_field(params.initial, g.point_of(i));
    if (!(z >= 0.0 && z <= 1.0))
      throw ConfigError("key 'z0': value " + format_double(z) + " outside [0,1] at flat node " + std::to_string(i));
  }
}

Scenario parse_scenario(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::stringstream stream(text);
  std::string line;
  int line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_number) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    for (const auto& entry : entries)
      if (entry.first == key) throw ConfigError("key '" + key + "' appears twice");
    entries.emplace_back(key, trim(line.substr(eq + 1)));
  }

  Scenario s;
  s.name = "custom";
  for (const auto& [key, value] : entries)
    if (key == "preset") s = preset(value);
  // Model first, so dimension-dependent keys see the final kind.
  for (const auto& [key, value] : entries)
    if (key == "model") apply(s, key, value);
  for (const auto& [key, value] : entries)
    if (key != "preset" && key != "model") apply(s, key, value);
  validate(s);
  return s;
}

std::string echo_scenario(const Scenario& s) {
  std::ostringstream out;
  auto line = [&](const std::string& key, const std::string& value) { out << key << " = " << value << '\n'; };
  line("name", s.name);
  line("model", to_string(s.model));
  if (two_d(s)) {
    line("n1", std::to_string(s.n[0]));
    line("n2", std::to_string(s.n[1]));
    line("lo1", format_double(s.lo[0]));
    line("hi1", format_double(s.hi[0]));
    line("lo2", format_double(s.lo[1]));
    line("hi2", format_double(s.hi[1]));
  } else {
    line("n", std::to_string(s.n[0]));
    line("lo", format_double(s.lo[0]));
    line("hi", format_double(s.hi[0]));
  }
  line("m", std::to_string(s.capacity()));
  if (two_d(s)) {
    line("b1", describe(s.diffusion[0]));
    line("b2", describe(s.diffusion[1]));
    line("c_w", describe(s.bias[kWest]));
    line("c_e", describe(s.bias[kEast]));
    line("c_s", describe(s.bias[kSouth]));
    line("c_n", describe(s.bias[kNorth]));
  } else {
    line("b", describe(s.diffusion[0]));
    line("c_l", describe(s.bias[kLeft]));
    line("c_r", describe(s.bias[kRight]));
  }
  line("g", describe(s.generation));
  line("z0", describe(s.initial));
  line("t_end", format_double(s.t_end));
  std::string seeds;
  for (std::size_t i = 0; i < s.seeds.size(); ++i) seeds += (i ? "," : "") + std::to_string(s.seeds[i]);
  line("seeds", seeds);
  line("output_dir", s.output_dir);
  line("solver_refine", std::to_string(s.solver_refine));
  line("solver_step", s.solver_step == SolverStep::Auto ? "auto" : "chain");
  line("init", s.init == InitMode::Exact ? "exact" : "binomial");
  line("snapshots", std::to_string(s.snapshots));
  line("budget", format_double(s.budget));
  return out.str();
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& entry : presets()) names.push_back(entry.first);
  return names;
}

Scenario preset(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
  }
  return it->second;
}

Scenario load_scenario(const std::string& argument) {
  if (presets().count(argument)) return preset(argument);
  std::ifstream file(argument);
  if (!file) throw ConfigError("cannot open config '" + argument + "' (not a file or preset name)");
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_scenario(buffer.str());
}

void check_budget(const Scenario& s, const RunOptions& options) {
  if (!options.run_chain || options.override_budget) return;
  const std::int64_t k = s.steps();
  const double updates = double(k) * double(s.grid().node_count());
  if (updates > s.budget)
    throw BudgetError("projected K = " + std::to_string(k) + " chain steps x " +
                          std::to_string(s.grid().node_count()) + " nodes = " + format_double(updates) +
                          " node-updates exceeds the budget of " + format_double(s.budget) +
                          "; lower N, M or T, or pass --override-budget",
                      k);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string csv_document(const Scenario& s, const ScenarioResult& result, std::size_t seed_index,
                         const ComparisonReport& report) {
  const GridSpec& grid = result.drift.grid();
  const SeedReport& seed = report.seeds[seed_index];
  const SpaceTimeField& chain = result.chains[seed_index];
  std::string out;
  out.reserve(std::size_t(64 * grid.node_count() * Eigen::Index(report.times.size())) + 1024);
  std::stringstream echo(echo_scenario(s));
  std::string line;
  while (std::getline(echo, line)) out += "# " + line + "\n";
  out += "# seed = " + std::to_string(seed.seed) + "\n";
  out += "# stream = " + std::to_string(seed.stream) + "\n";
  out += "# ds = " + format_double(report.ds) + "\n";
  out += "# dt = " + format_double(report.dt) + "\n";
  out += "# steps = " + std::to_string(report.steps) + "\n";
  out += "# stride = " + std::to_string(report.stride) + "\n";
  out += grid.dimension() == 2 ? "t,s1,s2,z_pde,x_drift,X_chain_norm,abs_err_chain_pde\n"
                               : "t,s,z_pde,x_drift,X_chain_norm,abs_err_chain_pde\n";
  for (std::size_t k = 0; k < report.times.size(); ++k) {
    const std::string t = format_double(report.times[k]);
    for (Eigen::Index i = 0; i < grid.node_count(); ++i) {
      const Eigen::Vector2d p = grid.point_of(i);
      const double z = result.pde.values()(Eigen::Index(k), i);
      const double x = result.drift.values()(Eigen::Index(k), i);
      const double X = chain.values()(Eigen::Index(k), i);
      out += t;
      out += ',';
      out += format_double(p(0));
      if (grid.dimension() == 2) {
        out += ',';
        out += format_double(p(1));
      }
      for (const double v : {z, x, X, std::abs(X - z)}) {
        out += ',';
        out += format_double(v);
      }
      out += '\n';
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + path.string() + "'");
  file << content;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& s, const RunOptions& options) {
  validate(s);
  check_budget(s, options);
  const GridSpec grid = s.grid();
  const ModelParams params = s.params();
  const TransitionTable table = derive_probabilities(params, grid);
  const std::int64_t steps = s.steps();
  const std::int64_t stride = s.stride();
  std::map<std::string, double> timings;

  ScenarioResult result;
  auto start = Clock::now();
  RngStream unused;
  const Eigen::VectorXd x0 = initial_state(params.initial, params.capacity, grid, InitMode::Exact, unused).normalized();
  result.drift = extend_to_field(run_drift_recursion(table, x0, steps, stride), grid);
  timings["drift"] = seconds_since(start);
  const std::vector<double> times = result.drift.times();

  start = Clock::now();
  if (times.back() > 0.0) {
    const int refine = s.solver_refine;
    GridSpec solver_grid =
        grid.dimension() == 2
            ? GridSpec::rectangle(Axis{s.lo[0], s.hi[0], refine * (s.n[0] + 1) - 1},
                                  Axis{s.lo[1], s.hi[1], refine * (s.n[1] + 1) - 1})
            : GridSpec::line(s.lo[0], s.hi[0], refine * (s.n[0] + 1) - 1);
    PdeProblem problem = PdeProblem::from_model(params, solver_grid, times.back(), 0.0);
    problem.dt = s.solver_step == SolverStep::Chain ? table.dt : 0.5 * stability_limit(problem);
    problem.output_times = times;
    result.pde = sample_on_chain_grid(solve(problem), grid, times);
  } else {
    Eigen::MatrixXd z0(1, grid.node_count());
    for (Eigen::Index i = 0; i < grid.node_count(); ++i) z0(0, i) = eval_field(params.initial, grid.point_of(i));
    result.pde = SpaceTimeField(grid, times, z0);
  }
  timings["pde"] = seconds_since(start);

  ReportInputs inputs;
  inputs.scenario = s.name;
  inputs.model = s.model;
  inputs.grid = grid;
  inputs.capacity = params.capacity;
  inputs.dt = table.dt;
  inputs.t_end = s.t_end;
  inputs.steps = steps;
  inputs.stride = stride;
  inputs.times = times;
  inputs.pde = result.pde;
  inputs.drift = result.drift;

  if (options.run_chain) {
    start = Clock::now();
    for (const std::uint64_t seed : s.seeds) {
      RngStream rng(seed, 0);
      ChainState state = initial_state(params.initial, params.capacity, grid, s.init, rng);
      const Trajectory trajectory = run_chain(table, std::move(state), steps, stride, rng);
      SpaceTimeField field = extend_to_field(trajectory, grid);
      inputs.chains.push_back(ChainRun{seed, rng.stream(), field, trajectory.normalization, trajectory.dropped});
      result.chains.push_back(std::move(field));
    }
    timings["chain"] = seconds_since(start);
  }

  start = Clock::now();
  inputs.timings = timings;
  result.report = build_report(inputs);
  result.report.timings["compare"] = seconds_since(start);

  for (std::size_t i = 0; i < result.chains.size(); ++i)
    result.csv.push_back(csv_document(s, result, i, result.report));

  if (!s.output_dir.empty()) {
    const std::filesystem::path dir(s.output_dir);
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < result.csv.size(); ++i)
      write_file(dir / (s.name + "_seed" + std::to_string(s.seeds[i]) + ".csv"), result.csv[i]);
    write_file(dir / (s.name + "_report.json"), nlohmann::json(result.report).dump(2) + "\n");
  }
  return result;
}

ConvergenceReport run_convergence_suite(const Scenario& base, const std::vector<int>& n_list,
                                        const RunOptions& options) {
  if (n_list.size() < 3) throw ConfigError("convergence suite needs at least three N values");
  std::vector<Scenario> scenarios;
  for (const int n : n_list) {
    if (n < 1) throw ConfigError("convergence suite: N = " + std::to_string(n) + " is not positive");
    Scenario s = base;
    s.n = {n, n};
    s.m = std::int64_t(n) * n * n;
    s.name = base.name + "-N" + std::to_string(n);
    validate(s);
    check_budget(s, options);
    scenarios.push_back(std::move(s));
  }

  ConvergenceReport out;
  std::vector<std::pair<double, double>> drift_points, chain_points;
  bool chain_positive = options.run_chain;
  for (const Scenario& s : scenarios) {
    ConvergenceRow row;
    row.n = s.n[0];
    row.m = s.capacity();
    row.report = run_scenario(s, options).report;
    row.ds = row.report.ds;
    drift_points.emplace_back(row.ds, row.report.drift_vs_pde.sup);
    if (options.run_chain) {
      chain_points.emplace_back(row.ds, row.report.chain_vs_pde_final.mean);
      chain_positive = chain_positive && row.report.chain_vs_pde_final.mean > 0.0;
    }
    out.rows.push_back(std::move(row));
  }
  out.drift_slope = fit_rate(drift_points);
  if (chain_positive) out.chain_slope = fit_rate(chain_points);
  for (auto& row : out.rows) row.report.fitted_slope = out.drift_slope;

  if (!base.output_dir.empty()) {
    std::filesystem::create_directories(base.output_dir);
    write_file(std::filesystem::path(base.output_dir) / (base.name + "_convergence.json"),
               nlohmann::json(out).dump(2) + "\n");
  }
  return out;
}

void to_json(nlohmann::json& j, const ConvergenceReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"m", row.m},
                    {"ds", row.ds},
                    {"drift_vs_pde_sup", row.report.drift_vs_pde.sup},
                    {"drift_vs_pde_final", row.report.drift_vs_pde.final},
                    {"chain_vs_pde_final_mean", row.report.chain_vs_pde_final.mean},
                    {"report", row.report}});
  }
  j = {{"rows", rows}, {"drift_slope", r.drift_slope}};
  j["chain_slope"] = r.chain_slope ? nlohmann::json(*r.chain_slope) : nlohmann::json(nullptr);
}

}  // namespace contlim
