#include "contlim/pde.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>

using namespace contlim;

namespace {

const double kPi = std::acos(-1.0);

Eigen::VectorXd sample(const GridSpec& g, const std::function<double(const Eigen::Vector2d&)>& f) {
  Eigen::VectorXd v(g.node_count());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = f(g.point_of(i));
  return v;
}

FieldSpec tabulated(const GridSpec& g, const Eigen::VectorXd& values) {
  FieldSpec f = TabulatedField{values, std::nullopt};
  bind_grid(f, g);
  return f;
}

double sine_mode_error(int n, double step_fraction) {
  const GridSpec g = GridSpec::line(0.0, 1.0, n);
  PdeProblem p;
  p.kind = ModelKind::RandomWalk1d;
  p.grid = g;
  p.diffusion[0] = ConstantField{0.5};
  p.convection[0] = ConstantField{0.0};
  p.initial = tabulated(g, sample(g, [](const Eigen::Vector2d& s) { return std::sin(kPi * s(0)); }));
  p.t_end = 0.1;
  p.dt = step_fraction * stability_limit(p);
  const SpaceTimeField z = solve(p);
  const Eigen::VectorXd exact =
      std::exp(-0.5 * kPi * kPi * 0.1) * sample(g, [](const Eigen::Vector2d& s) { return std::sin(kPi * s(0)); });
  return (z.at_time(0.1) - exact).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("random walk right-hand side") {
  const GridSpec g = GridSpec::line(0.0, 1.0, 9);
  CHECK(rhs_rw1d(Eigen::VectorXd::Zero(9), g, ConstantField{0.5}, ConstantField{0.3}).isZero());

  SUBCASE("sine mode with second-order accuracy") {
    auto error = [](int n) {
      const GridSpec grid = GridSpec::line(0.0, 2.0, n);
      const Eigen::VectorXd z = sample(grid, [](const Eigen::Vector2d& s) { return std::sin(kPi * s(0) / 2.0); });
      const Eigen::VectorXd r = rhs_rw1d(z, grid, ConstantField{0.5}, ConstantField{0.0});
      return (r + 0.5 * (kPi / 2.0) * (kPi / 2.0) * z).cwiseAbs().maxCoeff();
    };
    const double coarse = error(49), fine = error(99);
    CHECK(coarse < 1e-3);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.05));
  }
  SUBCASE("constant state with constant convection vanishes away from the ends") {
    const Eigen::VectorXd r = rhs_rw1d(Eigen::VectorXd::Constant(9, 0.4), g, ConstantField{0.5}, ConstantField{0.7});
    for (Eigen::Index i = 1; i < 8; ++i) CHECK(r(i) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(r(0) != 0.0);
  }
}

TEST_CASE("network 1D right-hand side") {
  const GridSpec g = GridSpec::line(-1.0, 1.0, 15);
  const FieldSpec source = GaussianField{0.5};
  const Eigen::VectorXd gp = sample(g, [](const Eigen::Vector2d& s) { return 0.5 * std::exp(-s(0) * s(0)); });

  const Eigen::VectorXd zero = rhs_net1d(Eigen::VectorXd::Zero(15), g, ConstantField{0.5}, ConstantField{1.0}, source);
  CHECK((zero - gp).cwiseAbs().maxCoeff() < 1e-15);

  const Eigen::VectorXd full = rhs_net1d(Eigen::VectorXd::Ones(15), g, GaussianField{0.4}, ConstantField{1.0}, source);
  for (Eigen::Index i = 2; i < 13; ++i) CHECK(full(i) == doctest::Approx(gp(i)).epsilon(1e-12));

  const Eigen::VectorXd z = sample(g, [](const Eigen::Vector2d& s) { return 0.6 * std::exp(-2.0 * s(0) * s(0)); });
  const Eigen::VectorXd r = rhs_net1d(z, g, ConstantField{0.5}, ConstantField{0.0}, source);
  for (Eigen::Index i = 0; i < 15; ++i) CHECK(r(i) == doctest::Approx(r(14 - i)).epsilon(1e-12));
  CHECK(r(7) < gp(7));
}

TEST_CASE("network 2D right-hand side") {
  const GridSpec g = GridSpec::rectangle(Axis{-1, 1, 21}, Axis{-1, 1, 21});
  const FieldSpec b = ConstantField{0.25};
  const FieldSpec none = ConstantField{0.0};

  const Eigen::VectorXd zero = rhs_net2d(Eigen::VectorXd::Zero(g.node_count()), g, b, b, none, none, GaussianField{0.3});
  CHECK((zero - sample(g, [](const Eigen::Vector2d& s) { return 0.3 * std::exp(-s.squaredNorm()); }))
            .cwiseAbs()
            .maxCoeff() < 1e-15);

  const Eigen::VectorXd z = sample(g, [](const Eigen::Vector2d& s) { return 0.7 * std::exp(-3.0 * s.squaredNorm()); });
  const Eigen::VectorXd r = rhs_net2d(z, g, b, b, none, none, none);
  CHECK(r(g.flat_index(11, 11)) < 0.0);
  for (int n = 1; n <= 21; ++n) {
    for (int m = 1; m <= 21; ++m) {
      const double v = r(g.flat_index(n, m));
      CHECK(v == doctest::Approx(r(g.flat_index(m, n))).epsilon(1e-12));
      CHECK(v == doctest::Approx(r(g.flat_index(22 - n, m))).epsilon(1e-12));
      CHECK(v == doctest::Approx(r(g.flat_index(n, 22 - m))).epsilon(1e-12));
    }
  }
}

TEST_CASE("convection from biased hop probabilities") {
  ModelParams params;
  params.kind = ModelKind::Network2d;
  params.diffusion = {ConstantField{0.25}, ConstantField{0.25}};
  params.bias = {ConstantField{-1.0}, ConstantField{1.0}, ConstantField{-2.0}, ConstantField{2.0}};
  const GridSpec g = GridSpec::rectangle(Axis{-1, 1, 20}, Axis{-1, 1, 20});
  const PdeProblem p = PdeProblem::from_model(params, g, 0.1, 1e-4);
  CHECK(eval_field(p.convection[0], Eigen::Vector2d(0.3, 0.1)) == -2.0);
  CHECK(eval_field(p.convection[1], Eigen::Vector2d(0.3, 0.1)) == -4.0);

  FieldSpec table = TabulatedField{Eigen::VectorXd::LinSpaced(g.node_count(), 0, 1), std::nullopt};
  bind_grid(table, g);
  const FieldSpec diff = field_difference(table, GaussianField{1.0}, g);
  CHECK(eval_field(diff, g.point(3, 4)) == doctest::Approx(eval_field(table, g.point(3, 4)) -
                                                           std::exp(-g.point(3, 4).squaredNorm())));
}

TEST_CASE("solve") {
  SUBCASE("zero stays zero") {
    PdeProblem p;
    p.kind = ModelKind::Network1d;
    p.grid = GridSpec::line(-1, 1, 20);
    p.t_end = 0.5;
    p.dt = 0.5 * stability_limit(p);
    p.output_times = {0.0, 0.25, 0.5};
    const SpaceTimeField z = solve(p);
    CHECK(z.times().size() == 3);
    CHECK(z.values().isZero());
  }
  SUBCASE("sine mode against the separable solution") {
    const double coarse = sine_mode_error(199, 0.5);
    const double fine = sine_mode_error(399, 0.5);
    CHECK(coarse <= 1e-3);
    const double ratio = coarse / fine;
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }
  SUBCASE("constant source grows linearly at first") {
    auto error = [](double T) {
      PdeProblem p;
      p.kind = ModelKind::Network1d;
      p.grid = GridSpec::line(-1, 1, 39);
      p.source = ConstantField{0.5};
      p.t_end = T;
      p.dt = std::min(0.25 * stability_limit(p), T / 50);
      return (solve(p).at_time(T).array() - 0.5 * T).abs().maxCoeff();
    };
    const double e1 = error(1e-4), e2 = error(5e-5);
    CHECK(e1 > 0.0);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  }
  SUBCASE("stability limit is enforced") {
    PdeProblem p;
    p.kind = ModelKind::Network1d;
    p.grid = GridSpec::line(-1, 1, 20);
    p.t_end = 0.1;
    // ds^2 / (2 * 0.5 * 4/3)
    CHECK(stability_limit(p) == doctest::Approx((4.0 / 441.0) * 0.75));
    p.dt = 1.01 * stability_limit(p);
    CHECK_THROWS_AS(solve(p), ConfigError);
    p.dt = 0.0;
    CHECK_THROWS_AS(solve(p), ConfigError);
  }
  SUBCASE("leaving the unit interval is an instability") {
    PdeProblem p;
    p.kind = ModelKind::Network1d;
    p.grid = GridSpec::line(-1, 1, 20);
    p.source = ConstantField{100.0};
    p.t_end = 0.1;
    p.dt = 0.5 * stability_limit(p);
    CHECK_THROWS_AS(solve(p), InstabilityError);
  }
  SUBCASE("random walk mass decreases") {
    PdeProblem p;
    p.kind = ModelKind::RandomWalk1d;
    p.grid = GridSpec::line(0, 1, 30);
    p.initial = ConstantField{0.5};
    p.t_end = 0.05;
    p.dt = stability_limit(p);
    p.output_times = {0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
    const SpaceTimeField z = solve(p);
    for (Eigen::Index k = 1; k < z.values().rows(); ++k) CHECK(z.values().row(k).sum() < z.values().row(k - 1).sum());
  }
}

TEST_CASE("sampling on the chain grid") {
  const GridSpec chain = GridSpec::line(0.0, 1.0, 3);
  Eigen::MatrixXd v(1, 3);
  v << 1, 2, 3;
  const SpaceTimeField same(chain, {0.0}, v);
  CHECK(sample_on_chain_grid(same, chain, {0.0}).values() == v);

  const GridSpec nested = GridSpec::line(0.0, 1.0, 7);
  Eigen::MatrixXd w(2, 7);
  w << 1, 2, 3, 4, 5, 6, 7, 10, 20, 30, 40, 50, 60, 70;
  const SpaceTimeField fine(nested, {0.0, 1.0}, w);
  const SpaceTimeField picked = sample_on_chain_grid(fine, chain, {0.0, 0.5, 1.0});
  CHECK(picked.values().row(0) == Eigen::RowVector3d(2, 4, 6));
  CHECK(picked.values().row(1) == Eigen::RowVector3d(2, 4, 6));
  CHECK(picked.values().row(2) == Eigen::RowVector3d(20, 40, 60));

  const GridSpec other = GridSpec::line(0.0, 1.0, 4);  // 0.2, 0.4, 0.6, 0.8
  Eigen::MatrixXd u(1, 4);
  u << 1, 2, 3, 4;
  CHECK(sample_on_chain_grid(SpaceTimeField(other, {0.0}, u), chain, {0.0}).values() == Eigen::RowVector3d(1, 2, 4));

  CHECK_THROWS_AS(sample_on_chain_grid(same, GridSpec::line(0.0, 2.0, 3), {0.0}), DomainError);
}
