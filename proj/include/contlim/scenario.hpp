#pragma once

#include "contlim/core.hpp"
#include "contlim/grid.hpp"
#include "contlim/metrics.hpp"
#include "contlim/pde.hpp"
#include "contlim/simulate.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace contlim {

enum class SolverStep {
  Auto,   // half the stability limit
  Chain,  // the chain step length
};

struct Scenario {
  std::string name = "custom";
  ModelKind model = ModelKind::Network1d;
  std::array<int, 2> n{20, 20};  // interior nodes per axis; n[1] unused in 1D
  std::array<double, 2> lo{-1.0, -1.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::optional<std::int64_t> m;  // unset: n[0]^3
  std::array<FieldSpec, 2> diffusion{ConstantField{0.5}, ConstantField{0.5}};
  std::array<FieldSpec, 4> bias{ConstantField{0.0}, ConstantField{0.0}, ConstantField{0.0}, ConstantField{0.0}};
  FieldSpec generation = ConstantField{0.0};
  FieldSpec initial = ConstantField{0.0};
  double t_end = 1.0;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir;  // empty: no files
  int solver_refine = 1;   // solver spacing is ds / refine
  SolverStep solver_step = SolverStep::Chain;
  InitMode init = InitMode::Exact;
  int snapshots = 100;      // target number of recorded intervals
  double budget = 5e9;      // node-updates per chain trajectory

  std::int64_t capacity() const;
  GridSpec grid() const;
  ModelParams params() const;  // fields bound to grid()
  // K = floor(T * M / ds^2) for the network models, floor(T / ds^2) for the random walk.
  std::int64_t steps() const;
  std::int64_t stride() const;
};

// Flat "key = value" lines, '#' starts a comment. "preset = <name>" (anywhere) seeds the
// defaults before the remaining keys apply. ConfigError names the offending key.
Scenario parse_scenario(const std::string& text);
// Config text that parses back to the same scenario, with every default written out.
std::string echo_scenario(const Scenario& scenario);
// Checks every invariant; ConfigError otherwise.
void validate(const Scenario& scenario);

std::vector<std::string> preset_names();
// ConfigError for an unknown name.
Scenario preset(const std::string& name);
// Preset name or path to a config file.
Scenario load_scenario(const std::string& argument);

struct RunOptions {
  bool override_budget = false;
  bool run_chain = true;
};

struct ScenarioResult {
  ComparisonReport report;
  std::vector<std::string> csv;  // one document per seed, same order as the seeds
  SpaceTimeField pde;            // on the chain grid at snapshot times
  SpaceTimeField drift;
  std::vector<SpaceTimeField> chains;
};

// Throws BudgetError when K times the node count exceeds the budget and no override is given.
void check_budget(const Scenario& scenario, const RunOptions& options);

// Runs the chain per seed, the drift recursion and the PDE on the snapshot lattice, compares
// them, and writes <name>_seed<S>.csv and <name>_report.json when output_dir is set.
ScenarioResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

struct ConvergenceRow {
  int n = 0;
  std::int64_t m = 0;
  double ds = 0.0;
  ComparisonReport report;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  double drift_slope = 0.0;                 // from drift-vs-PDE running sup errors
  std::optional<double> chain_slope;        // from seed-mean chain-vs-PDE final-time errors
};

// Reruns the scenario for each N (all axes) with M = N^3. ConfigError for fewer than three N values.
ConvergenceReport run_convergence_suite(const Scenario& base, const std::vector<int>& n_list,
                                        const RunOptions& options = {});

void to_json(nlohmann::json& j, const ConvergenceReport& r);

}  // namespace contlim
