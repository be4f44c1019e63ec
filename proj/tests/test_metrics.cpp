#include "contlim/metrics.hpp"

#include <doctest.h>

using namespace contlim;

namespace {

SpaceTimeField constant_field(const GridSpec& g, const std::vector<double>& times, double value) {
  return SpaceTimeField(g, times, Eigen::MatrixXd::Constant(Eigen::Index(times.size()), g.node_count(), value));
}

}  // namespace

TEST_CASE("sup error") {
  const GridSpec g = GridSpec::line(0, 1, 5);
  const std::vector<double> times{0.0, 0.5, 1.0};
  const SpaceTimeField a = constant_field(g, times, 0.3);
  CHECK(sup_error(a, a, times, g).overall == 0.0);

  const SpaceTimeField b = constant_field(g, times, 0.31);
  CHECK(sup_error(a, b, times, g).overall == doctest::Approx(0.01));

  Eigen::MatrixXd v = a.values();
  v(1, 3) += 0.2;
  const SupError e = sup_error(a, SpaceTimeField(g, times, v), times, g);
  CHECK(e.overall == doctest::Approx(0.2));
  REQUIRE(e.per_time.size() == 3);
  CHECK(e.per_time[0] == 0.0);
  CHECK(e.per_time[1] == doctest::Approx(0.2));
  CHECK(e.per_time[2] == 0.0);

  CHECK_THROWS_AS(sup_error(a, constant_field(g, {0.0, 0.5}, 0.3), times, g), DomainError);
  CHECK_THROWS_AS(sup_error(a, constant_field(GridSpec::line(0, 0.5, 5), times, 0.3), times, g), DomainError);
}

TEST_CASE("data coverage") {
  const GridSpec g = GridSpec::line(0, 1, 99);
  CHECK(data_coverage(constant_field(g, {0.0}, 0.0), 0.0) == 0.0);
  CHECK(data_coverage(constant_field(g, {0.0}, 0.5), 0.0) == doctest::Approx(0.495));
  CHECK(data_coverage(constant_field(g, {0.0}, 0.2), 0.0) <= data_coverage(constant_field(g, {0.0}, 0.21), 0.0));
  CHECK_THROWS_AS(data_coverage(constant_field(g, {0.0, 1.0}, 0.5), 2.0), DomainError);

  const GridSpec plane = GridSpec::rectangle(Axis{0, 1, 9}, Axis{0, 1, 9});
  CHECK(data_coverage(constant_field(plane, {0.0}, 1.0), 0.0) == doctest::Approx(0.81));
}

TEST_CASE("rate fit") {
  CHECK(fit_rate({{0.1, 0.1}, {0.05, 0.05}, {0.025, 0.025}}) == doctest::Approx(1.0));
  CHECK(fit_rate({{0.1, 0.01}, {0.05, 0.0025}}) == doctest::Approx(2.0));
  const std::vector<std::pair<double, double>> noisy{{0.1, 0.11}, {0.05, 0.048}, {0.025, 0.026}, {0.0125, 0.0119}};
  const double slope = fit_rate(noisy);
  CHECK(slope == fit_rate(noisy));
  CHECK(slope == doctest::Approx(1.0).epsilon(0.1));
  CHECK_THROWS_AS(fit_rate({{0.1, 0.0}, {0.05, 0.01}}), DomainError);
  CHECK_THROWS_AS(fit_rate({{-0.1, 0.1}, {0.05, 0.01}}), DomainError);
  CHECK_THROWS_AS(fit_rate({{0.1, 0.1}}), DomainError);
}

namespace {

ReportInputs inputs_for(const GridSpec& g, const std::vector<double>& times) {
  ReportInputs in;
  in.scenario = "test";
  in.model = ModelKind::Network1d;
  in.grid = g;
  in.capacity = 100;
  in.dt = 0.01;
  in.t_end = times.back();
  in.steps = std::int64_t(times.back() / 0.01);
  in.stride = 1;
  in.times = times;
  Eigen::MatrixXd z(Eigen::Index(times.size()), g.node_count()), x = z, X = z;
  for (Eigen::Index k = 0; k < z.rows(); ++k) {
    for (Eigen::Index i = 0; i < z.cols(); ++i) {
      z(k, i) = 0.3 + 0.01 * double(i) + 0.1 * times[std::size_t(k)];
      x(k, i) = z(k, i) + 0.002 * std::sin(double(i + k));
      X(k, i) = std::round(100.0 * (z(k, i) + 0.01 * std::cos(double(3 * i + k)))) / 100.0;
    }
  }
  in.pde = SpaceTimeField(g, times, z);
  in.drift = SpaceTimeField(g, times, x);
  in.chains.push_back(ChainRun{1, 0, SpaceTimeField(g, times, X), 100, 0});
  in.chains.push_back(ChainRun{2, 0, SpaceTimeField(g, times, X.array() + 0.01), 100, 3});
  in.timings = {{"chain", 0.5}, {"pde", 0.25}};
  return in;
}

}  // namespace

TEST_CASE("comparison report") {
  const GridSpec g = GridSpec::line(-1, 1, 8);
  const ReportInputs in = inputs_for(g, {0.0, 0.02, 0.04});
  const ComparisonReport r = build_report(in);
  REQUIRE(r.seeds.size() == 2);
  CHECK(r.n == std::vector<int>{8});
  CHECK(r.m == 100);

  SUBCASE("invariants") {
    for (const auto& s : r.seeds) {
      for (std::size_t k = 0; k < r.times.size(); ++k) {
        CHECK(s.chain_vs_pde.per_time[k] >= 0.0);
        CHECK(s.chain_vs_pde.sup >= s.chain_vs_pde.per_time[k]);
        // Triangle inequality between the three pairs.
        CHECK(s.chain_vs_pde.per_time[k] <= s.chain_vs_drift.per_time[k] + r.drift_vs_pde.per_time[k] + 1e-15);
        CHECK(s.chain_vs_drift.per_time[k] <= s.chain_vs_pde.per_time[k] + r.drift_vs_pde.per_time[k] + 1e-15);
        CHECK(r.drift_vs_pde.per_time[k] <= s.chain_vs_pde.per_time[k] + s.chain_vs_drift.per_time[k] + 1e-15);
      }
      CHECK(s.chain_vs_pde.final == s.chain_vs_pde.per_time.back());
    }
    CHECK(r.chain_vs_pde_final.max >= r.chain_vs_pde_final.mean);
    for (const auto& [stage, seconds] : r.timings) CHECK(seconds >= 0.0);
  }
  SUBCASE("K = 0") {
    const ComparisonReport zero = build_report(inputs_for(g, {0.0}));
    CHECK(zero.times == std::vector<double>{0.0});
    CHECK(zero.seeds[0].chain_vs_pde.per_time.size() == 1);
    CHECK(zero.seeds[0].chain_vs_pde.final == zero.seeds[0].chain_vs_pde.per_time[0]);
  }
  SUBCASE("same inputs give the same report") {
    CHECK(nlohmann::json(build_report(in)).dump() == nlohmann::json(r).dump());
  }
  SUBCASE("JSON round trip") {
    ComparisonReport with_slope = r;
    with_slope.fitted_slope = 1.0 / 3.0;
    for (const ComparisonReport& original : {r, with_slope}) {
      const std::string text = nlohmann::json(original).dump();
      const ComparisonReport back = nlohmann::json::parse(text).get<ComparisonReport>();
      CHECK(nlohmann::json(back).dump() == text);
      CHECK(back.seeds[1].chain_vs_pde.per_time == original.seeds[1].chain_vs_pde.per_time);
      CHECK(back.fitted_slope == original.fitted_slope);
    }
  }
  SUBCASE("inconsistent inputs") {
    ReportInputs bad = in;
    bad.chains[1].normalization = 200;
    CHECK_THROWS_AS(build_report(bad), DomainError);
    bad = in;
    bad.drift = constant_field(GridSpec::line(-1, 1, 9), in.times, 0.0);
    CHECK_THROWS_AS(build_report(bad), DomainError);
  }
}
