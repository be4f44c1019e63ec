#pragma once

#include "contlim/grid.hpp"

namespace testing {

// Uniform P_l = P_r (and P_s = P_n) = p on [0,1] with N interior nodes.
inline contlim::TransitionTable uniform_table(contlim::ModelKind kind, int n, double p, std::int64_t m = 1,
                                              double g = 0.0) {
  using namespace contlim;
  ModelParams params;
  params.kind = kind;
  params.diffusion = {ConstantField{p}, ConstantField{p}};
  params.bias = {ConstantField{0.0}, ConstantField{0.0}, ConstantField{0.0}, ConstantField{0.0}};
  params.generation = ConstantField{g};
  params.capacity = m;
  const GridSpec grid = dimension_of(kind) == 2 ? GridSpec::rectangle(Axis{0.0, 1.0, n}, Axis{0.0, 1.0, n})
                                                : GridSpec::line(0.0, 1.0, n);
  return derive_probabilities(params, grid);
}

}  // namespace testing
