#include "contlim/chain.hpp"
#include "contlim/drift.hpp"
#include "helpers.hpp"

#include <doctest.h>

using namespace contlim;
using testing::uniform_table;

namespace {

ChainState state_of(std::initializer_list<std::int64_t> counts, std::int64_t m) {
  ChainState s;
  s.capacity = m;
  s.counts.resize(Eigen::Index(counts.size()));
  Eigen::Index i = 0;
  for (const auto c : counts) s.counts(i++) = c;
  return s;
}

// Empirical one-step mean of (X' - X)/M against the drift, per component within 4 standard errors.
void check_monte_carlo(const TransitionTable& table, const ChainState& start, int replications, std::uint64_t seed) {
  const Eigen::VectorXd x = start.normalized();
  const Eigen::VectorXd f = drift(x, table);
  const double scale = table.kind == ModelKind::RandomWalk1d ? 1.0 : 1.0 / double(start.capacity);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(x.size());
  ChainStepper stepper(table);
  RngStream rng(seed, 3);
  for (int r = 0; r < replications; ++r) {
    ChainState next = start;
    stepper.advance(next, rng);
    const Eigen::VectorXd change = (next.counts - start.counts).cast<double>() / double(start.capacity);
    sum += change;
    sum_sq += change.cwiseAbs2();
  }
  const Eigen::VectorXd mean = sum / replications;
  const Eigen::VectorXd variance = (sum_sq / replications - mean.cwiseAbs2()).cwiseMax(0.0) * replications / (replications - 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double expected = scale * f(i);
    const double se = std::sqrt(variance(i) / replications);
    INFO("component " << i << ": mean " << mean(i) << ", drift " << expected << ", se " << se);
    if (se == 0.0)
      CHECK(mean(i) == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
    else
      CHECK(std::abs(mean(i) - expected) <= 4.0 * se);
  }
}

}  // namespace

TEST_CASE("zero is a fixed point of every model without generation") {
  RngStream rng(5);
  for (const auto kind : {ModelKind::RandomWalk1d, ModelKind::Network1d, ModelKind::Network2d}) {
    const TransitionTable t = uniform_table(kind, 4, 0.25, 100);
    ChainState s;
    s.capacity = 100;
    s.counts = Counts::Zero(t.grid.node_count());
    for (int k = 0; k < 50; ++k) s = step(s, t, rng);
    CHECK(s.counts.isZero());
  }
}

TEST_CASE("random walk: single node empties") {
  const TransitionTable t = uniform_table(ModelKind::RandomWalk1d, 1, 0.5);
  RngStream rng(1);
  for (int r = 0; r < 20; ++r) CHECK(step_random_walk(state_of({5}, 5), t, rng).counts(0) == 0);
}

TEST_CASE("random walk: Monte Carlo mean matches the drift") {
  const TransitionTable t = uniform_table(ModelKind::RandomWalk1d, 3, 0.25);
  check_monte_carlo(t, state_of({0, 1000000, 0}, 1000000), 10000, 42);
  check_monte_carlo(t, state_of({700, 20, 3000}, 4000), 10000, 43);
}

TEST_CASE("random walk: mass") {
  const TransitionTable t = uniform_table(ModelKind::RandomWalk1d, 9, 0.3);
  RngStream rng(9);
  ChainState s = state_of({0, 10, 50, 100, 500, 100, 50, 10, 0}, 1000);
  std::int64_t total = s.total();
  for (int k = 0; k < 2000; ++k) {
    s = step_random_walk(s, t, rng);
    CHECK(s.total() <= total);
    CHECK(s.counts.minCoeff() >= 0);
    total = s.total();
  }
  // No particle can reach a sink in one step from the middle node.
  const TransitionTable wide = uniform_table(ModelKind::RandomWalk1d, 5, 0.3);
  for (int r = 0; r < 100; ++r) CHECK(step_random_walk(state_of({0, 0, 1000, 0, 0}, 1000), wide, rng).total() == 1000);
}

TEST_CASE("network 1D: Monte Carlo mean matches the drift") {
  const TransitionTable t = uniform_table(ModelKind::Network1d, 5, 0.25, 200);
  check_monte_carlo(t, state_of({200, 0, 0, 0, 0}, 200), 20000, 7);
  check_monte_carlo(t, state_of({50, 120, 10, 190, 80}, 200), 20000, 8);

  ModelParams p;
  p.kind = ModelKind::Network1d;
  p.diffusion = {ConstantField{0.3}, ConstantField{}};
  p.bias = {ConstantField{1.0}, ConstantField{-0.5}, ConstantField{}, ConstantField{}};
  p.generation = GaussianField{3.0};
  p.capacity = 100;
  const TransitionTable biased = derive_probabilities(p, GridSpec::line(-1, 1, 7));
  check_monte_carlo(biased, state_of({10, 30, 60, 90, 60, 30, 10}, 100), 20000, 9);
}

TEST_CASE("network 1D: lone node with sinks on both sides") {
  const TransitionTable t = uniform_table(ModelKind::Network1d, 1, 0.3, 1);
  RngStream rng(17);
  const int reps = 100000;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) sum += double(step_network_1d(state_of({1}, 1), t, rng).counts(0) - 1);
  const double p = 0.6;
  CHECK(std::abs(sum / reps + p) <= 4.0 * std::sqrt(p * (1 - p) / reps));
  CHECK(drift_network_1d(Eigen::VectorXd::Ones(1), t)(0) == doctest::Approx(-0.6));
}

TEST_CASE("network 1D: arrivals are clamped at capacity") {
  ModelParams p;
  p.kind = ModelKind::Network1d;
  p.diffusion = {ConstantField{0.0}, ConstantField{}};
  p.generation = ConstantField{5000.0};
  p.capacity = 10;
  const TransitionTable t = derive_probabilities(p, GridSpec::line(0, 1, 3));
  RngStream rng(2);
  ChainState s = state_of({9, 10, 0}, 10);
  s = step_network_1d(s, t, rng);
  CHECK(s.counts.maxCoeff() <= 10);
  CHECK(s.dropped > 0);
}

TEST_CASE("network 2D: Monte Carlo mean matches the drift") {
  ModelParams p;
  p.kind = ModelKind::Network2d;
  p.diffusion = {ConstantField{0.2}, ConstantField{0.15}};
  p.bias = {ConstantField{0.5}, ConstantField{-0.5}, ConstantField{1.0}, ConstantField{0.0}};
  p.generation = ConstantField{2.0};
  p.capacity = 50;
  const TransitionTable t = derive_probabilities(p, GridSpec::rectangle(Axis{0, 1, 4}, Axis{0, 1, 4}));
  ChainState s;
  s.capacity = 50;
  s.counts.resize(16);
  for (Eigen::Index i = 0; i < 16; ++i) s.counts(i) = (i * 13) % 51;
  check_monte_carlo(t, s, 20000, 21);

  ChainState full;
  full.capacity = 50;
  full.counts = Counts::Constant(16, 50);
  check_monte_carlo(uniform_table(ModelKind::Network2d, 4, 0.2, 50), full, 5000, 22);
}

TEST_CASE("steps are deterministic in the stream") {
  const TransitionTable t = uniform_table(ModelKind::Network1d, 6, 0.25, 40, 1.0);
  const ChainState s = state_of({1, 5, 30, 40, 7, 0}, 40);
  RngStream a(123, 4), b(123, 4), c(123, 5);
  ChainState x = s, y = s, z = s;
  bool differs = false;
  for (int k = 0; k < 200; ++k) {
    x = step(x, t, a);
    y = step(y, t, b);
    z = step(z, t, c);
    CHECK(x.counts == y.counts);
    differs = differs || x.counts != z.counts;
  }
  CHECK(differs);
}

TEST_CASE("state validation") {
  const TransitionTable t = uniform_table(ModelKind::Network1d, 3, 0.25, 10);
  CHECK_THROWS_AS(check_state(state_of({1, 2}, 10), t), DomainError);
  CHECK_THROWS_AS(check_state(state_of({1, 2, 11}, 10), t), DomainError);
  CHECK_THROWS_AS(check_state(state_of({1, -2, 1}, 10), t), DomainError);
  RngStream rng;
  CHECK_THROWS_AS(step_random_walk(state_of({1, 2, 3}, 10), t, rng), DomainError);
}
