#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

namespace plp {

// Switched linear plant x[t+1] = A_m x[t] + B_m u[t] + w[t] with a bounded
// disturbance, ||w||_inf <= bound.
class JumpLinearSystem {
public:
    JumpLinearSystem(std::vector<Eigen::MatrixXd> state_matrices,
                     std::vector<Eigen::MatrixXd> input_matrices,
                     double disturbance_bound);

    int mode_count() const { return static_cast<int>(A_.size()); }
    int state_dim() const { return static_cast<int>(A_[0].rows()); }
    int input_dim() const { return static_cast<int>(B_[0].cols()); }
    double disturbance_bound() const { return w_bound_; }

    const Eigen::MatrixXd& A(int mode) const { return A_.at(mode); }
    const Eigen::MatrixXd& B(int mode) const { return B_.at(mode); }

private:
    std::vector<Eigen::MatrixXd> A_;
    std::vector<Eigen::MatrixXd> B_;
    double w_bound_ = 0.0;
};

// Feedback policy driven by state measurements.  Controllers that estimate
// the operating mode may optionally be fed the true mode before each step
// (ground-truth mode experiments).
class Controller {
public:
    virtual ~Controller() = default;
    virtual Eigen::VectorXd act(long step, const Eigen::VectorXd& state) = 0;
    virtual void observe_true_mode(int /*mode*/) {}
    virtual std::string name() const = 0;
};

// Zero input at every step.
class OpenLoopController : public Controller {
public:
    explicit OpenLoopController(int input_dim) : input_dim_(input_dim) {}
    Eigen::VectorXd act(long, const Eigen::VectorXd&) override {
        return Eigen::VectorXd::Zero(input_dim_);
    }
    std::string name() const override { return "open-loop"; }

private:
    int input_dim_;
};

struct Trajectory {
    Eigen::MatrixXd states;   // n x (T+1), column t is x[t]
    Eigen::MatrixXd inputs;   // m x T
    std::vector<int> modes;   // mode driving step t -> t+1
};

// Entrywise-uniform disturbances in [-bound, bound]; `kind` may be
// "uniform", "gaussian" (sigma = bound/3, clipped to the bound) or "zero".
Eigen::MatrixXd sample_disturbance(int dim, long steps, double bound,
                                   const std::string& kind,
                                   std::mt19937_64& rng);

// Roll the closed loop forward for modes.size() steps.  Throws
// DivergenceError (with the offending step) when the state becomes
// non-finite or its norm exceeds `divergence_limit`.  When
// `feed_true_mode` is set, the controller is told the active mode before
// each decision.
Trajectory simulate(const JumpLinearSystem& system,
                    const std::vector<int>& modes,
                    const Eigen::MatrixXd& disturbances,
                    Controller& controller, const Eigen::VectorXd& x0,
                    bool feed_true_mode = false,
                    double divergence_limit = 1e9);

}  // namespace plp
