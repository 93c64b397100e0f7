#include "plp/mode_chain.hpp"

#include <cmath>
#include <deque>
#include <string>

#include "plp/errors.hpp"

namespace plp {

ModeChain::ModeChain(Eigen::MatrixXd transition) : tpm_(std::move(transition)) {
    if (tpm_.rows() == 0 || tpm_.rows() != tpm_.cols()) {
        throw ConfigError("transition matrix must be square and non-empty");
    }
    for (Eigen::Index i = 0; i < tpm_.rows(); ++i) {
        double row_sum = 0.0;
        for (Eigen::Index j = 0; j < tpm_.cols(); ++j) {
            const double p = tpm_(i, j);
            if (!std::isfinite(p) || p < 0.0 || p > 1.0 + 1e-12) {
                throw ConfigError("transition probability out of range at row " +
                                  std::to_string(i));
            }
            row_sum += p;
        }
        if (std::abs(row_sum - 1.0) > 1e-12) {
            throw ConfigError("transition matrix row " + std::to_string(i) +
                              " sums to " + std::to_string(row_sum) +
                              ", expected 1");
        }
    }
}

bool ModeChain::strictly_positive() const {
    return (tpm_.array() > 0.0).all();
}

bool ModeChain::irreducible() const {
    const int m = mode_count();
    // Reachability from every node via BFS on the positive-entry digraph.
    for (int start = 0; start < m; ++start) {
        std::vector<char> seen(m, 0);
        std::deque<int> queue{start};
        seen[start] = 1;
        int reached = 1;
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (int w = 0; w < m; ++w) {
                if (!seen[w] && tpm_(v, w) > 0.0) {
                    seen[w] = 1;
                    ++reached;
                    queue.push_back(w);
                }
            }
        }
        if (reached != m) return false;
    }
    return true;
}

int ModeChain::sample_next(int mode, std::mt19937_64& rng) const {
    const double u =
        std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    const int m = mode_count();
    for (int j = 0; j < m; ++j) {
        acc += tpm_(mode, j);
        if (u < acc) return j;
    }
    return m - 1;  // guard against round-off at u ≈ 1
}

Eigen::VectorXd ModeChain::stationary() const {
    const int m = mode_count();
    // Solve pi^T P = pi^T with the normalisation sum(pi) = 1 as a bordered
    // linear system; robust for the small mode counts used here.
    Eigen::MatrixXd lhs = tpm_.transpose() - Eigen::MatrixXd::Identity(m, m);
    lhs.row(m - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(m - 1) = 1.0;
    return lhs.fullPivLu().solve(rhs);
}

std::vector<int> sample_mode_sequence(const ModeChain& chain, int initial_mode,
                                      long steps, int dwell,
                                      std::mt19937_64& rng) {
    if (initial_mode < 0 || initial_mode >= chain.mode_count()) {
        throw ConfigError("initial mode out of range");
    }
    if (dwell < 1) throw ConfigError("dwell must be at least 1");
    if (steps < 0) throw ConfigError("steps must be non-negative");

    std::vector<int> modes(static_cast<std::size_t>(steps));
    int current = initial_mode;
    for (long t = 0; t < steps; ++t) {
        if (t > 0 && t % dwell == 0) {
            current = chain.sample_next(current, rng);
        }
        modes[static_cast<std::size_t>(t)] = current;
    }
    return modes;
}

}  // namespace plp
