#pragma once

#include <Eigen/Dense>
#include <vector>

#include "plp/jump_system.hpp"

namespace plp {

// Modes whose model explains the observed transition within the disturbance
// bound plus a numerical slack:  ||x_next - A_m x - B_m u||_inf <= bound + slack.
std::vector<int> residual_consistent_set(const JumpLinearSystem& system,
                                         const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& u,
                                         const Eigen::VectorXd& x_next,
                                         double slack = 1e-9);

// Running Laplace-smoothed estimate of the mode transition matrix.  With
// alpha > 0 every entry of estimate() is strictly positive, which makes the
// estimate directly usable by the occurrence engine.
class TpmEstimator {
public:
    TpmEstimator(int mode_count, double alpha = 1.0);

    void record(int from, int to);
    Eigen::MatrixXd estimate() const;
    const Eigen::MatrixXd& counts() const { return counts_; }
    long total_transitions() const { return total_; }

private:
    Eigen::MatrixXd counts_;
    double alpha_ = 1.0;
    long total_ = 0;
};

// Pick the active mode from a non-empty consistent set: a singleton decides
// itself; otherwise the mode with the largest estimated transition
// probability from `prev_mode` wins, ties resolved toward the lowest index.
int narrow_and_estimate(const std::vector<int>& consistent, int prev_mode,
                        const Eigen::MatrixXd& tpm_estimate);

// Stateful residual-based mode identifier.  Keeps the current estimate as
// long as it stays consistent; on inconsistency it re-tests every mode,
// emits a switch event and re-estimates.  An empty consistent set even
// after the full re-test means no model explains the data and raises
// ModelMismatchError.
class ModeEstimator {
public:
    struct Update {
        int mode = 0;               // estimate after this observation
        bool switch_detected = false;
        bool ambiguous = false;     // more than one consistent mode
        std::vector<int> consistent;
    };

    ModeEstimator(const JumpLinearSystem* system, int initial_mode,
                  double slack = 1e-9, double tpm_alpha = 1.0);

    // Feed the transition (x_prev, u_prev) -> x observed at the current step.
    Update update(const Eigen::VectorXd& x_prev, const Eigen::VectorXd& u_prev,
                  const Eigen::VectorXd& x);

    // Accept an externally supplied switch (ground-truth mode experiments);
    // keeps the transition statistics and switch history consistent.
    void observe_switch(int to);

    int current_mode() const { return current_; }
    const TpmEstimator& tpm() const { return tpm_; }
    // Estimated jump sequence: initial mode plus one entry per detected switch.
    const std::vector<int>& switch_sequence() const { return switch_seq_; }

private:
    const JumpLinearSystem* system_;
    double slack_;
    int current_;
    TpmEstimator tpm_;
    std::vector<int> switch_seq_;
};

}  // namespace plp
