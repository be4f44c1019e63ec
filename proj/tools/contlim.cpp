#include "contlim/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace contlim;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kBudget = 3;
constexpr int kInstability = 4;

void print_report(const ComparisonReport& r) {
  std::cout << "scenario " << r.scenario << ": model " << r.model << ", M = " << r.m << ", ds = " << format_double(r.ds)
            << ", K = " << r.steps << ", t_final = " << format_double(r.times.back()) << '\n';
  for (const auto& seed : r.seeds)
    std::cout << "  seed " << seed.seed << " (stream " << seed.stream
              << "): final-time max |X/M - z| = " << format_double(seed.chain_vs_pde.final)
              << ", running sup = " << format_double(seed.chain_vs_pde.sup) << '\n';
  if (!r.seeds.empty())
    std::cout << "  chain vs PDE final-time: mean " << format_double(r.chain_vs_pde_final.mean) << ", max "
              << format_double(r.chain_vs_pde_final.max) << '\n';
  std::cout << "  drift vs PDE: final-time " << format_double(r.drift_vs_pde.final) << ", running sup "
            << format_double(r.drift_vs_pde.sup) << '\n';
  std::cout << "  timings [s]:";
  for (const auto& [stage, seconds] : r.timings) std::cout << ' ' << stage << '=' << format_double(seconds);
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov chain models of sensor networks against their continuum PDE limits"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  int seed_count = 0;
  std::string out_dir;
  bool override_budget = false;
  auto* run = app.add_subcommand("run", "Run a scenario (config file or preset name)");
  run->add_option("config", config, "Config file or preset name")->required();
  run->add_option("--seed", seed, "Seed overriding the config");
  run->add_option("--seeds", seed_count, "Run k consecutive seeds starting at the first seed")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory for CSV and JSON");
  run->add_flag("--override-budget", override_budget, "Allow runs above the step budget");

  std::string preset_name;
  auto* presets = app.add_subcommand("presets", "List presets, or print one as config text");
  presets->add_option("name", preset_name, "Preset name");

  std::vector<int> n_list;
  bool drift_only = false;
  auto* converge = app.add_subcommand("converge", "Rerun a scenario over several N with M = N^3");
  converge->add_option("config", config, "Config file or preset name")->required();
  converge->add_option("--n-list", n_list, "Comma-separated N values")->delimiter(',')->required();
  converge->add_option("--seed", seed, "Seed overriding the config");
  converge->add_option("--seeds", seed_count, "Run k consecutive seeds")->check(CLI::PositiveNumber);
  converge->add_option("--out", out_dir, "Output directory for the JSON report");
  converge->add_flag("--drift-only", drift_only, "Skip the Monte Carlo chain");
  converge->add_flag("--override-budget", override_budget, "Allow runs above the step budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (*presets) {
      if (preset_name.empty()) {
        for (const auto& name : preset_names()) std::cout << name << '\n';
      } else {
        std::cout << echo_scenario(preset(preset_name));
      }
      return kOk;
    }

    Scenario scenario = load_scenario(config);
    if (seed) scenario.seeds = {*seed};
    if (seed_count > 0) {
      const std::uint64_t first = scenario.seeds.front();
      scenario.seeds.clear();
      for (int i = 0; i < seed_count; ++i) scenario.seeds.push_back(first + std::uint64_t(i));
    }
    if (!out_dir.empty()) scenario.output_dir = out_dir;

    RunOptions options;
    options.override_budget = override_budget;
    if (*run) {
      print_report(run_scenario(scenario, options).report);
      if (!scenario.output_dir.empty()) std::cout << "wrote results to " << scenario.output_dir << '\n';
    } else {
      options.run_chain = !drift_only;
      const ConvergenceReport report = run_convergence_suite(scenario, n_list, options);
      for (const auto& row : report.rows) print_report(row.report);
      std::cout << "drift vs PDE fitted slope: " << format_double(report.drift_slope) << '\n';
      if (report.chain_slope) std::cout << "chain vs PDE fitted slope: " << format_double(*report.chain_slope) << '\n';
    }
    return kOk;
  } catch (const BudgetError& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kBudget;
  } catch (const InstabilityError& e) {
    std::cerr << "numerical instability: " << e.what() << '\n';
    return kInstability;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kConfig;
  }
}
