#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "plp/patterns.hpp"

namespace plp {

// Simulation estimate of the occurrence problem, used as the ground truth
// the closed-form engine is checked against.
struct OracleEstimate {
    double mean_tau = 0.0;
    double se_tau = 0.0;              // NaN when trials < 2
    Eigen::VectorXd first_probs;      // empirical stop share per pattern
    Eigen::VectorXd se_first;         // binomial standard errors
    long trials = 0;
    bool se_defined = false;          // false when trials < 2
};

// Runs `trials` independent chain realizations from `initial_mode` and
// records, for each, the first step at which a trailing window matches a
// watched pattern.  Results are deterministic in (seed, trials): work is
// split into fixed sub-streams that are merged in index order, so serial
// and parallel execution produce bit-identical estimates.  A trial that
// exceeds `step_cap` steps without stopping aborts the oracle, since it
// indicates a collection the chain cannot realize.
OracleEstimate monte_carlo_oracle(const Eigen::MatrixXd& tpm,
                                  int initial_mode,
                                  const PatternCollection& collection,
                                  long trials, std::uint64_t seed,
                                  bool parallel = true,
                                  long step_cap = 10'000'000);

}  // namespace plp
