#include "plp/jump_system.hpp"

#include <algorithm>
#include <cmath>

#include "plp/errors.hpp"

namespace plp {

JumpLinearSystem::JumpLinearSystem(std::vector<Eigen::MatrixXd> state_matrices,
                                   std::vector<Eigen::MatrixXd> input_matrices,
                                   double disturbance_bound)
    : A_(std::move(state_matrices)),
      B_(std::move(input_matrices)),
      w_bound_(disturbance_bound) {
    if (A_.empty() || A_.size() != B_.size()) {
        throw ConfigError("need matching non-empty A and B mode lists");
    }
    const Eigen::Index n = A_[0].rows();
    const Eigen::Index m = B_[0].cols();
    for (std::size_t k = 0; k < A_.size(); ++k) {
        if (A_[k].rows() != n || A_[k].cols() != n) {
            throw ConfigError("state matrix of mode " + std::to_string(k) +
                              " is not " + std::to_string(n) + "x" +
                              std::to_string(n));
        }
        if (B_[k].rows() != n || B_[k].cols() != m) {
            throw ConfigError("input matrix of mode " + std::to_string(k) +
                              " has inconsistent shape");
        }
    }
    if (!(w_bound_ >= 0.0) || !std::isfinite(w_bound_)) {
        throw ConfigError("disturbance bound must be finite and non-negative");
    }
}

Eigen::MatrixXd sample_disturbance(int dim, long steps, double bound,
                                   const std::string& kind,
                                   std::mt19937_64& rng) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, steps);
    if (kind == "zero" || bound == 0.0) return w;
    if (kind == "uniform") {
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (long t = 0; t < steps; ++t) {
            for (int i = 0; i < dim; ++i) w(i, t) = dist(rng);
        }
        return w;
    }
    if (kind == "gaussian") {
        std::normal_distribution<double> dist(0.0, bound / 3.0);
        for (long t = 0; t < steps; ++t) {
            for (int i = 0; i < dim; ++i) {
                w(i, t) = std::clamp(dist(rng), -bound, bound);
            }
        }
        return w;
    }
    throw ConfigError("unknown disturbance kind '" + kind + "'");
}

Trajectory simulate(const JumpLinearSystem& system,
                    const std::vector<int>& modes,
                    const Eigen::MatrixXd& disturbances,
                    Controller& controller, const Eigen::VectorXd& x0,
                    bool feed_true_mode, double divergence_limit) {
    const long steps = static_cast<long>(modes.size());
    const int n = system.state_dim();
    const int m = system.input_dim();
    if (x0.size() != n) throw ConfigError("initial state has wrong dimension");
    if (disturbances.rows() != n || disturbances.cols() < steps) {
        throw ConfigError("disturbance matrix too small for the horizon");
    }

    Trajectory traj;
    traj.states = Eigen::MatrixXd::Zero(n, steps + 1);
    traj.inputs = Eigen::MatrixXd::Zero(m, steps);
    traj.modes = modes;
    traj.states.col(0) = x0;

    Eigen::VectorXd x = x0;
    for (long t = 0; t < steps; ++t) {
        const int mode = modes[static_cast<std::size_t>(t)];
        if (mode < 0 || mode >= system.mode_count()) {
            throw ConfigError("mode index out of range in mode sequence");
        }
        if (feed_true_mode) controller.observe_true_mode(mode);
        const Eigen::VectorXd u = controller.act(t, x);
        if (u.size() != m) {
            throw ConfigError("controller returned input of wrong dimension");
        }
        x = system.A(mode) * x + system.B(mode) * u + disturbances.col(t);
        if (!x.allFinite() || x.norm() > divergence_limit) {
            throw DivergenceError(
                "state diverged at step " + std::to_string(t + 1), t + 1);
        }
        traj.inputs.col(t) = u;
        traj.states.col(t + 1) = x;
    }
    return traj;
}

}  // namespace plp
