#pragma once

#include "contlim/core.hpp"
#include "contlim/grid.hpp"
#include "contlim/rng.hpp"

#include <vector>

namespace contlim {

// Integer particle or message counts at the interior nodes (row-major in 2D).
struct ChainState {
  Counts counts;
  std::int64_t capacity = 1;  // M
  std::int64_t dropped = 0;   // arrivals discarded at full queues, cumulative

  Eigen::VectorXd normalized() const { return counts.cast<double>() / double(capacity); }
  std::int64_t total() const { return counts.sum(); }
};

// Reusable one-step sampler of F_N for the table's model. Holds scratch buffers so the
// hot loop does not allocate.
class ChainStepper {
 public:
  explicit ChainStepper(const TransitionTable& table);

  void advance(ChainState& state, RngStream& rng);

  const TransitionTable& table() const { return *table_; }

 private:
  void advance_random_walk(ChainState& state, RngStream& rng);
  void advance_network_1d(ChainState& state, RngStream& rng);
  void advance_network_2d(ChainState& state, RngStream& rng);
  void add_arrivals(ChainState& state, RngStream& rng);

  const TransitionTable* table_;
  Eigen::ArrayXd zero_arrival_;       // exp(-g(n))
  std::vector<std::int8_t> transmit_;  // frame-padded; -1 silent, else the chosen direction or kIdle
  Counts next_;
};

// Throws DomainError when counts do not fit the grid or leave [0, M] (network models) or
// go negative (random walk).
void check_state(const ChainState& state, const TransitionTable& table);

// Per-node multinomial (right, left, stay); movers past node 1 or N are absorbed.
ChainState step_random_walk(const ChainState& state, const TransitionTable& table, RngStream& rng);
// One synchronous round of the collision protocol followed by Poisson arrivals clamped at M.
ChainState step_network_1d(const ChainState& state, const TransitionTable& table, RngStream& rng);
ChainState step_network_2d(const ChainState& state, const TransitionTable& table, RngStream& rng);
ChainState step(const ChainState& state, const TransitionTable& table, RngStream& rng);

}  // namespace contlim
