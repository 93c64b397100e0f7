#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace plp {

// Finite-state Markov chain over operating modes.  The transition matrix is
// validated on construction: square, entries in [0, 1], rows summing to one
// within 1e-12.
class ModeChain {
public:
    explicit ModeChain(Eigen::MatrixXd transition);

    int mode_count() const { return static_cast<int>(tpm_.rows()); }
    const Eigen::MatrixXd& tpm() const { return tpm_; }

    // True when every mode can reach every other mode through positive
    // transition probabilities (strong connectivity of the support graph).
    bool irreducible() const;

    // True when all entries are strictly positive.
    bool strictly_positive() const;

    // Inverse-CDF sample of the successor of `mode`; consumes exactly one
    // uniform draw, which keeps sequences reproducible across platforms.
    int sample_next(int mode, std::mt19937_64& rng) const;

    // Stationary distribution via the eigenproblem of the transpose.
    // Requires irreducibility.
    Eigen::VectorXd stationary() const;

private:
    Eigen::MatrixXd tpm_;
};

// Mode sequence of length `steps`, starting from `initial_mode` at step 0.
// The chain jumps only every `dwell` steps; within an epoch the mode is
// constant.  `dwell` of 1 reproduces a plain Markov sequence.
std::vector<int> sample_mode_sequence(const ModeChain& chain, int initial_mode,
                                      long steps, int dwell,
                                      std::mt19937_64& rng);

}  // namespace plp
