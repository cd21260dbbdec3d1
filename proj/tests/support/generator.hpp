#pragma once

#include <cstdint>
#include <random>

#include "streampart/model.hpp"

namespace streampart::testing {

struct GeneratorOptions {
  int min_free = 3;
  int max_free = 7;
  int max_pinned_sw = 2;
  int max_pinned_hw = 1;
  int max_r = 4;
  double unbounded_probability = 0.3;  // sw sources/sinks, channels, pcie
  double table_probability = 0.15;     // explicit throughput_table
  bool fractional_cpu = true;
};

/// Random valid problem: a DAG on process order with consistent rates built
/// from a chosen repetition vector, one sink at the end, mixed placements.
ProblemSpec random_problem(std::mt19937_64& rng, const GeneratorOptions& options = {});

/// Uniform choice per process among the options its placement allows. The
/// result may overfill the FPGA.
Assignment random_assignment(std::mt19937_64& rng, const ProblemSpec& problem);

/// Like random_assignment, but retries until the assignment fits (falls back
/// to software plus R=1 for pinned kernels).
Assignment random_feasible_assignment(std::mt19937_64& rng, const ProblemSpec& problem);

int uniform_int(std::mt19937_64& rng, int lo, int hi);
bool chance(std::mt19937_64& rng, double p);

}  // namespace streampart::testing
