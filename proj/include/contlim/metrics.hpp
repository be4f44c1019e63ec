#pragma once

#include "contlim/core.hpp"
#include "contlim/grid.hpp"
#include "contlim/simulate.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace contlim {

struct SupError {
  double overall = 0.0;
  std::vector<double> per_time;  // max over nodes at each requested time
};

// Both fields are evaluated at (t, v(n)) for every requested time and interior node of `grid`.
SupError sup_error(const SpaceTimeField& a, const SpaceTimeField& b, const std::vector<double>& times,
                   const GridSpec& grid);

// Riemann sum of z(t, v(n)) * ds^d over the interior nodes.
double data_coverage(const SpaceTimeField& field, double t);

// Least-squares slope of log(error) against log(ds).
double fit_rate(const std::vector<std::pair<double, double>>& points);

struct PairErrors {
  std::vector<double> per_time;
  double sup = 0.0;    // over all compared times
  double final = 0.0;  // at the last compared time
};

PairErrors pair_errors(const SpaceTimeField& a, const SpaceTimeField& b, const std::vector<double>& times,
                       const GridSpec& grid);

struct SeedReport {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  PairErrors chain_vs_pde;
  PairErrors chain_vs_drift;
  std::vector<double> coverage;
  std::int64_t dropped = 0;
};

struct Summary {
  double mean = 0.0;
  double max = 0.0;
};

struct ComparisonReport {
  std::string scenario;
  std::string model;
  std::vector<int> n;  // interior nodes per axis
  std::int64_t m = 1;
  double ds = 0.0;
  double dt = 0.0;
  double t_end = 0.0;
  std::int64_t steps = 0;
  std::int64_t stride = 1;
  std::vector<double> times;
  std::vector<SeedReport> seeds;
  PairErrors drift_vs_pde;
  std::vector<double> coverage_pde;
  std::vector<double> coverage_drift;
  Summary chain_vs_pde_final;
  Summary chain_vs_pde_sup;
  Summary chain_vs_drift_sup;
  std::map<std::string, double> timings;  // seconds per stage
  std::optional<double> fitted_slope;
};

struct ChainRun {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  SpaceTimeField field;
  std::int64_t normalization = 1;
  std::int64_t dropped = 0;
};

struct ReportInputs {
  std::string scenario;
  ModelKind model = ModelKind::Network1d;
  GridSpec grid;
  std::int64_t capacity = 1;
  double dt = 0.0;
  double t_end = 0.0;
  std::int64_t steps = 0;
  std::int64_t stride = 1;
  std::vector<double> times;
  SpaceTimeField pde;
  SpaceTimeField drift;
  std::vector<ChainRun> chains;
  std::map<std::string, double> timings;
};

// DomainError when a field's grid or a chain's normalization disagrees with the inputs.
ComparisonReport build_report(const ReportInputs& inputs);

void to_json(nlohmann::json& j, const PairErrors& e);
void from_json(const nlohmann::json& j, PairErrors& e);
void to_json(nlohmann::json& j, const SeedReport& s);
void from_json(const nlohmann::json& j, SeedReport& s);
void to_json(nlohmann::json& j, const Summary& s);
void from_json(const nlohmann::json& j, Summary& s);
void to_json(nlohmann::json& j, const ComparisonReport& r);
void from_json(const nlohmann::json& j, ComparisonReport& r);

}  // namespace contlim
