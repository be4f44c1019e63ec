#include "contlim/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace contlim {

SupError sup_error(const SpaceTimeField& a, const SpaceTimeField& b, const std::vector<double>& times,
                   const GridSpec& grid) {
  SupError result;
  result.per_time.reserve(times.size());
  for (const double t : times) {
    const Eigen::Index ka = a.time_index(t);
    const Eigen::Index kb = b.time_index(t);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < grid.node_count(); ++i) {
      const Eigen::Vector2d s = grid.point_of(i);
      // Same-grid fast path; otherwise piecewise-constant evaluation.
      const double va = a.grid() == grid ? a.values()(ka, i) : a.evaluate(t, s);
      const double vb = b.grid() == grid ? b.values()(kb, i) : b.evaluate(t, s);
      worst = std::max(worst, std::abs(va - vb));
    }
    result.per_time.push_back(worst);
    result.overall = std::max(result.overall, worst);
  }
  return result;
}

double data_coverage(const SpaceTimeField& field, double t) {
  const GridSpec& grid = field.grid();
  const double cell = grid.dimension() == 2 ? grid.ds() * grid.ds() : grid.ds();
  return field.values().row(field.time_index(t)).sum() * cell;
}

double fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw DomainError("rate fit needs at least two points");
  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& [ds, error] : points) {
    if (!(ds > 0.0) || !(error > 0.0)) throw DomainError("rate fit needs positive spacings and errors");
    mean_x += std::log(ds);
    mean_y += std::log(error);
  }
  mean_x /= double(points.size());
  mean_y /= double(points.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [ds, error] : points) {
    const double dx = std::log(ds) - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(error) - mean_y);
  }
  if (sxx == 0.0) throw DomainError("rate fit needs at least two distinct spacings");
  return sxy / sxx;
}

PairErrors pair_errors(const SpaceTimeField& a, const SpaceTimeField& b, const std::vector<double>& times,
                       const GridSpec& grid) {
  const SupError sup = sup_error(a, b, times, grid);
  PairErrors out;
  out.per_time = sup.per_time;
  out.sup = sup.overall;
  out.final = sup.per_time.empty() ? 0.0 : sup.per_time.back();
  return out;
}

namespace {

Summary summarize(const std::vector<SeedReport>& seeds, double (*pick)(const SeedReport&)) {
  Summary s;
  if (seeds.empty()) return s;
  for (const auto& seed : seeds) {
    s.mean += pick(seed);
    s.max = std::max(s.max, pick(seed));
  }
  s.mean /= double(seeds.size());
  return s;
}

void require_grid(const SpaceTimeField& field, const GridSpec& grid, const std::string& what) {
  if (!(field.grid() == grid)) throw DomainError(what + " was produced on a different grid (N mismatch)");
}

}  // namespace

ComparisonReport build_report(const ReportInputs& in) {
  require_grid(in.pde, in.grid, "PDE field");
  require_grid(in.drift, in.grid, "drift field");
  for (const auto& chain : in.chains) {
    require_grid(chain.field, in.grid, "chain seed " + std::to_string(chain.seed));
    if (chain.normalization != in.capacity)
      throw DomainError("chain seed " + std::to_string(chain.seed) + " normalized by M=" +
                        std::to_string(chain.normalization) + ", scenario has M=" + std::to_string(in.capacity));
  }

  ComparisonReport report;
  report.scenario = in.scenario;
  report.model = to_string(in.model);
  for (int a = 0; a < in.grid.dimension(); ++a) report.n.push_back(in.grid.count(a));
  report.m = in.capacity;
  report.ds = in.grid.ds();
  report.dt = in.dt;
  report.t_end = in.t_end;
  report.steps = in.steps;
  report.stride = in.stride;
  report.times = in.times;
  report.drift_vs_pde = pair_errors(in.drift, in.pde, in.times, in.grid);
  for (const double t : in.times) {
    report.coverage_pde.push_back(data_coverage(in.pde, t));
    report.coverage_drift.push_back(data_coverage(in.drift, t));
  }
  for (const auto& chain : in.chains) {
    SeedReport seed;
    seed.seed = chain.seed;
    seed.stream = chain.stream;
    seed.chain_vs_pde = pair_errors(chain.field, in.pde, in.times, in.grid);
    seed.chain_vs_drift = pair_errors(chain.field, in.drift, in.times, in.grid);
    for (const double t : in.times) seed.coverage.push_back(data_coverage(chain.field, t));
    seed.dropped = chain.dropped;
    report.seeds.push_back(std::move(seed));
  }
  report.chain_vs_pde_final = summarize(report.seeds, [](const SeedReport& s) { return s.chain_vs_pde.final; });
  report.chain_vs_pde_sup = summarize(report.seeds, [](const SeedReport& s) { return s.chain_vs_pde.sup; });
  report.chain_vs_drift_sup = summarize(report.seeds, [](const SeedReport& s) { return s.chain_vs_drift.sup; });
  report.timings = in.timings;
  return report;
}

void to_json(nlohmann::json& j, const PairErrors& e) {
  j = {{"per_time", e.per_time}, {"sup", e.sup}, {"final", e.final}};
}

void from_json(const nlohmann::json& j, PairErrors& e) {
  j.at("per_time").get_to(e.per_time);
  j.at("sup").get_to(e.sup);
  j.at("final").get_to(e.final);
}

void to_json(nlohmann::json& j, const SeedReport& s) {
  j = {{"seed", s.seed},
       {"stream", s.stream},
       {"chain_vs_pde", s.chain_vs_pde},
       {"chain_vs_drift", s.chain_vs_drift},
       {"coverage", s.coverage},
       {"dropped_arrivals", s.dropped}};
}

void from_json(const nlohmann::json& j, SeedReport& s) {
  j.at("seed").get_to(s.seed);
  j.at("stream").get_to(s.stream);
  j.at("chain_vs_pde").get_to(s.chain_vs_pde);
  j.at("chain_vs_drift").get_to(s.chain_vs_drift);
  j.at("coverage").get_to(s.coverage);
  j.at("dropped_arrivals").get_to(s.dropped);
}

void to_json(nlohmann::json& j, const Summary& s) { j = {{"mean", s.mean}, {"max", s.max}}; }

void from_json(const nlohmann::json& j, Summary& s) {
  j.at("mean").get_to(s.mean);
  j.at("max").get_to(s.max);
}

void to_json(nlohmann::json& j, const ComparisonReport& r) {
  j = {{"scenario", r.scenario},
       {"model", r.model},
       {"n", r.n},
       {"m", r.m},
       {"ds", r.ds},
       {"dt", r.dt},
       {"t_end", r.t_end},
       {"steps", r.steps},
       {"stride", r.stride},
       {"times", r.times},
       {"seeds", r.seeds},
       {"drift_vs_pde", r.drift_vs_pde},
       {"coverage_pde", r.coverage_pde},
       {"coverage_drift", r.coverage_drift},
       {"chain_vs_pde_final", r.chain_vs_pde_final},
       {"chain_vs_pde_sup", r.chain_vs_pde_sup},
       {"chain_vs_drift_sup", r.chain_vs_drift_sup},
       {"timings", r.timings}};
  j["fitted_slope"] = r.fitted_slope ? nlohmann::json(*r.fitted_slope) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ComparisonReport& r) {
  j.at("scenario").get_to(r.scenario);
  j.at("model").get_to(r.model);
  j.at("n").get_to(r.n);
  j.at("m").get_to(r.m);
  j.at("ds").get_to(r.ds);
  j.at("dt").get_to(r.dt);
  j.at("t_end").get_to(r.t_end);
  j.at("steps").get_to(r.steps);
  j.at("stride").get_to(r.stride);
  j.at("times").get_to(r.times);
  j.at("seeds").get_to(r.seeds);
  j.at("drift_vs_pde").get_to(r.drift_vs_pde);
  j.at("coverage_pde").get_to(r.coverage_pde);
  j.at("coverage_drift").get_to(r.coverage_drift);
  j.at("chain_vs_pde_final").get_to(r.chain_vs_pde_final);
  j.at("chain_vs_pde_sup").get_to(r.chain_vs_pde_sup);
  j.at("chain_vs_drift_sup").get_to(r.chain_vs_drift_sup);
  j.at("timings").get_to(r.timings);
  if (j.contains("fitted_slope") && !j.at("fitted_slope").is_null())
    r.fitted_slope = j.at("fitted_slope").get<double>();
  else
    r.fitted_slope.reset();
}

}  // namespace contlim
