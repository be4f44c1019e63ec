#include "contlim/chain.hpp"

#include <cmath>

namespace contlim {

namespace {

constexpr std::int8_t kSilent = -1;
// Transmitter whose direction draw fell in the residual 1 - sum(P_d): sends nothing but
// still occupies the channel.
constexpr std::int8_t kIdle = 4;

// Offsets of the four neighbors on the frame-padded lattice, indexed by Direction.
std::array<Eigen::Index, 4> neighbor_offsets(const GridSpec& grid) {
  const Eigen::Index row = grid.dimension() == 2 ? grid.count(1) + 2 : 0;
  return {-row, row, -1, 1};
}

}  // namespace

ChainStepper::ChainStepper(const TransitionTable& table)
    : table_(&table),
      zero_arrival_((-table.arrivals).exp()),
      transmit_(std::size_t(table.grid.padded_count()), kSilent),
      next_(table.grid.node_count()) {}

void ChainStepper::advance(ChainState& state, RngStream& rng) {
  switch (table_->kind) {
    case ModelKind::RandomWalk1d: advance_random_walk(state, rng); break;
    case ModelKind::Network1d: advance_network_1d(state, rng); break;
    case ModelKind::Network2d: advance_network_2d(state, rng); break;
  }
}

void ChainStepper::advance_random_walk(ChainState& state, RngStream& rng) {
  const int N = table_->grid.count();
  const auto& left = table_->hop[kLeft];
  const auto& right = table_->hop[kRight];
  next_.setZero();
  for (int n = 1; n <= N; ++n) {
    const std::int64_t here = state.counts(n - 1);
    if (here == 0) continue;
    const double pr = right(n);
    const double pl = left(n);
    const std::int64_t to_right = rng.binomial(here, pr);
    const std::int64_t rest = here - to_right;
    const std::int64_t to_left = pr < 1.0 ? rng.binomial(rest, std::min(1.0, pl / (1.0 - pr))) : 0;
    next_(n - 1) += rest - to_left;
    if (n < N) next_(n) += to_right;
    if (n > 1) next_(n - 2) += to_left;
  }
  state.counts = next_;
}

void ChainStepper::advance_network_1d(ChainState& state, RngStream& rng) {
  const int N = table_->grid.count();
  const double M = double(state.capacity);
  const auto& left = table_->hop[kLeft];
  const auto& right = table_->hop[kRight];

  // Transmitter flags with W(n, x) = x, then the direction.
  for (int n = 1; n <= N; ++n) {
    const std::int64_t queue = state.counts(n - 1);
    std::int8_t decision = kSilent;
    if (queue > 0 && rng.uniform() * M < double(queue)) {
      const double v = rng.uniform();
      decision = v < left(n) ? std::int8_t(kLeft) : v < left(n) + right(n) ? std::int8_t(kRight) : kIdle;
    }
    transmit_[n] = decision;
  }

  next_ = state.counts;
  for (int n = 1; n <= N; ++n) {
    const std::int8_t d = transmit_[n];
    if (d != kLeft && d != kRight) continue;
    const int step = d == kRight ? 1 : -1;
    const int receiver = n + step;
    if (receiver >= 1 && receiver <= N) {
      // Receiver silent and its other neighbor silent.
      if (transmit_[receiver] != kSilent || transmit_[receiver + step] != kSilent) continue;
      next_(receiver - 1) += 1;
    }
    next_(n - 1) -= 1;
  }
  state.counts = next_;
  add_arrivals(state, rng);
}

void ChainStepper::advance_network_2d(ChainState& state, RngStream& rng) {
  const GridSpec& grid = table_->grid;
  const int N1 = grid.count(0);
  const int N2 = grid.count(1);
  const double M = double(state.capacity);
  const auto offsets = neighbor_offsets(grid);

  for (int n = 1; n <= N1; ++n) {
    for (int m = 1; m <= N2; ++m) {
      const Eigen::Index p = grid.padded_index(n, m);
      const std::int64_t queue = state.counts(grid.flat_index(n, m));
      std::int8_t decision = kSilent;
      if (queue > 0 && rng.uniform() * M < double(queue)) {
        double v = rng.uniform();
        decision = kIdle;
        for (int d = 0; d < 4; ++d) {
          const double pd = table_->hop[d](p);
          if (v < pd) {
            decision = std::int8_t(d);
            break;
          }
          v -= pd;
        }
      }
      transmit_[std::size_t(p)] = decision;
    }
  }

  next_ = state.counts;
  for (int n = 1; n <= N1; ++n) {
    for (int m = 1; m <= N2; ++m) {
      const Eigen::Index p = grid.padded_index(n, m);
      const std::int8_t d = transmit_[std::size_t(p)];
      if (d < 0 || d == kIdle) continue;
      const int rn = n + (d == kEast) - (d == kWest);
      const int rm = m + (d == kNorth) - (d == kSouth);
      const bool destination = rn < 1 || rn > N1 || rm < 1 || rm > N2;
      if (!destination) {
        const Eigen::Index r = p + offsets[d];
        bool clear = transmit_[std::size_t(r)] == kSilent;
        for (int k = 0; k < 4 && clear; ++k) {
          const Eigen::Index q = r + offsets[k];
          if (q != p && transmit_[std::size_t(q)] != kSilent) clear = false;
        }
        if (!clear) continue;
        next_(grid.flat_index(rn, rm)) += 1;
      }
      next_(grid.flat_index(n, m)) -= 1;
    }
  }
  state.counts = next_;
  add_arrivals(state, rng);
}

void ChainStepper::add_arrivals(ChainState& state, RngStream& rng) {
  const auto& mean = table_->arrivals;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    if (mean(i) <= 0.0) continue;
    const std::int64_t arrived = rng.poisson(mean(i), zero_arrival_(i));
    if (arrived == 0) continue;
    std::int64_t& queue = state.counts(i);
    queue += arrived;
    if (queue > state.capacity) {
      state.dropped += queue - state.capacity;
      queue = state.capacity;
    }
  }
}

void check_state(const ChainState& state, const TransitionTable& table) {
  if (state.counts.size() != table.grid.node_count())
    throw DomainError("state has " + std::to_string(state.counts.size()) + " nodes, grid has " +
                      std::to_string(table.grid.node_count()));
  if (state.capacity < 1) throw DomainError("state capacity must be positive");
  const bool bounded = table.kind != ModelKind::RandomWalk1d;
  for (Eigen::Index i = 0; i < state.counts.size(); ++i) {
    const std::int64_t c = state.counts(i);
    if (c < 0 || (bounded && c > state.capacity))
      throw DomainError("count " + std::to_string(c) + " at flat node " + std::to_string(i) + " out of range");
  }
}

namespace {

ChainState step_checked(const ChainState& state, const TransitionTable& table, RngStream& rng, ModelKind kind) {
  if (table.kind != kind) throw DomainError("transition table is for model " + to_string(table.kind));
  check_state(state, table);
  ChainState next = state;
  ChainStepper(table).advance(next, rng);
  return next;
}

}  // namespace

ChainState step_random_walk(const ChainState& state, const TransitionTable& table, RngStream& rng) {
  return step_checked(state, table, rng, ModelKind::RandomWalk1d);
}

ChainState step_network_1d(const ChainState& state, const TransitionTable& table, RngStream& rng) {
  return step_checked(state, table, rng, ModelKind::Network1d);
}

ChainState step_network_2d(const ChainState& state, const TransitionTable& table, RngStream& rng) {
  return step_checked(state, table, rng, ModelKind::Network2d);
}

ChainState step(const ChainState& state, const TransitionTable& table, RngStream& rng) {
  return step_checked(state, table, rng, table.kind);
}

}  // namespace contlim
