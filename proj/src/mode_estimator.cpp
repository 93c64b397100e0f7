#include "plp/mode_estimator.hpp"

#include <algorithm>

#include "plp/errors.hpp"

namespace plp {

std::vector<int> residual_consistent_set(const JumpLinearSystem& system,
                                         const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& u,
                                         const Eigen::VectorXd& x_next,
                                         double slack) {
    std::vector<int> consistent;
    const double tol = system.disturbance_bound() + slack;
    for (int m = 0; m < system.mode_count(); ++m) {
        const Eigen::VectorXd residual =
            x_next - system.A(m) * x - system.B(m) * u;
        if (residual.lpNorm<Eigen::Infinity>() <= tol) {
            consistent.push_back(m);
        }
    }
    return consistent;
}

TpmEstimator::TpmEstimator(int mode_count, double alpha)
    : counts_(Eigen::MatrixXd::Zero(mode_count, mode_count)), alpha_(alpha) {
    if (mode_count <= 0) throw ConfigError("mode count must be positive");
    if (alpha_ < 0.0) throw ConfigError("smoothing weight must be non-negative");
}

void TpmEstimator::record(int from, int to) {
    counts_(from, to) += 1.0;
    ++total_;
}

Eigen::MatrixXd TpmEstimator::estimate() const {
    const Eigen::Index m = counts_.rows();
    Eigen::MatrixXd est(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double denom = counts_.row(i).sum() + alpha_ * m;
        for (Eigen::Index j = 0; j < m; ++j) {
            est(i, j) = (counts_(i, j) + alpha_) / denom;
        }
    }
    return est;
}

int narrow_and_estimate(const std::vector<int>& consistent, int prev_mode,
                        const Eigen::MatrixXd& tpm_estimate) {
    if (consistent.empty()) {
        throw ModelMismatchError("cannot narrow an empty consistent set");
    }
    if (consistent.size() == 1) return consistent.front();
    int best = consistent.front();
    double best_p = tpm_estimate(prev_mode, best);
    for (std::size_t i = 1; i < consistent.size(); ++i) {
        const double p = tpm_estimate(prev_mode, consistent[i]);
        // strict improvement only: ties stay with the lowest index
        if (p > best_p) {
            best = consistent[i];
            best_p = p;
        }
    }
    return best;
}

ModeEstimator::ModeEstimator(const JumpLinearSystem* system, int initial_mode,
                             double slack, double tpm_alpha)
    : system_(system),
      slack_(slack),
      current_(initial_mode),
      tpm_(system->mode_count(), tpm_alpha) {
    if (initial_mode < 0 || initial_mode >= system->mode_count()) {
        throw ConfigError("initial mode estimate out of range");
    }
    switch_seq_.push_back(initial_mode);
}

void ModeEstimator::observe_switch(int to) {
    if (to < 0 || to >= system_->mode_count()) {
        throw ConfigError("mode index out of range");
    }
    if (to == current_) return;
    tpm_.record(current_, to);
    switch_seq_.push_back(to);
    current_ = to;
}

ModeEstimator::Update ModeEstimator::update(const Eigen::VectorXd& x_prev,
                                            const Eigen::VectorXd& u_prev,
                                            const Eigen::VectorXd& x) {
    Update out;
    out.consistent = residual_consistent_set(*system_, x_prev, u_prev, x, slack_);
    if (out.consistent.empty()) {
        throw ModelMismatchError(
            "no candidate mode explains the observed transition");
    }
    out.ambiguous = out.consistent.size() > 1;
    const bool current_ok =
        std::find(out.consistent.begin(), out.consistent.end(), current_) !=
        out.consistent.end();
    if (current_ok) {
        out.mode = current_;
        return out;
    }
    const int next = narrow_and_estimate(out.consistent, current_, tpm_.estimate());
    tpm_.record(current_, next);
    switch_seq_.push_back(next);
    current_ = next;
    out.mode = next;
    out.switch_detected = true;
    return out;
}

}  // namespace plp
