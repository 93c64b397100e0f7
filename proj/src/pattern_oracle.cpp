#include "plp/pattern_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "plp/errors.hpp"
#include "plp/rng.hpp"

namespace plp {

namespace {

struct ChunkSums {
    double tau = 0.0;
    double tau_sq = 0.0;
    std::vector<long> stops;
    bool capped = false;
};

int draw_next(const Eigen::MatrixXd& tpm, int mode, std::mt19937_64& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    const int m = static_cast<int>(tpm.cols());
    for (int j = 0; j < m; ++j) {
        acc += tpm(mode, j);
        if (u < acc) return j;
    }
    return m - 1;
}

}  // namespace

OracleEstimate monte_carlo_oracle(const Eigen::MatrixXd& tpm,
                                  int initial_mode,
                                  const PatternCollection& collection,
                                  long trials, std::uint64_t seed,
                                  bool parallel, long step_cap) {
    if (tpm.rows() == 0 || tpm.rows() != tpm.cols()) {
        throw ConfigError("transition matrix must be square and non-empty");
    }
    for (Eigen::Index i = 0; i < tpm.rows(); ++i) {
        if (tpm.row(i).minCoeff() < 0.0 ||
            std::abs(tpm.row(i).sum() - 1.0) > 1e-9) {
            throw ConfigError("transition matrix row " + std::to_string(i) +
                              " is not a probability distribution");
        }
    }
    if (initial_mode < 0 || initial_mode >= tpm.rows()) {
        throw ConfigError("initial mode out of range");
    }
    if (trials <= 0) throw ConfigError("oracle needs at least one trial");

    const int K = collection.size();
    const int L = collection.length();

    // Fixed sub-stream layout: the estimate depends only on (seed, trials),
    // never on the thread count, because chunk c always owns the same RNG
    // stream and chunk results are merged in index order.
    const int chunks = static_cast<int>(std::min<long>(64, trials));
    std::vector<long> chunk_trials(chunks, trials / chunks);
    for (int c = 0; c < trials % chunks; ++c) ++chunk_trials[c];

    std::vector<ChunkSums> sums(chunks);
    for (auto& s : sums) s.stops.assign(K, 0);

#pragma omp parallel for schedule(static, 1) if (parallel)
    for (int c = 0; c < chunks; ++c) {
        auto rng = make_engine(seed, static_cast<std::uint64_t>(c));
        std::vector<int> window(L, -1);
        ChunkSums local;
        local.stops.assign(K, 0);
        for (long trial = 0; trial < chunk_trials[c] && !local.capped;
             ++trial) {
            int mode = initial_mode;
            long t = 0;
            int hit = -1;
            while (hit < 0) {
                if (t >= step_cap) {
                    local.capped = true;
                    break;
                }
                mode = draw_next(tpm, mode, rng);
                ++t;
                // trailing window of the last L drawn symbols
                for (int i = 0; i + 1 < L; ++i) window[i] = window[i + 1];
                window[L - 1] = mode;
                if (t >= L) hit = collection.index_of(window);
            }
            if (local.capped) break;
            const double tau = static_cast<double>(t);
            local.tau += tau;
            local.tau_sq += tau * tau;
            ++local.stops[hit];
        }
        sums[c] = local;
    }

    double sum_tau = 0.0, sum_tau_sq = 0.0;
    std::vector<long> stops(K, 0);
    for (int c = 0; c < chunks; ++c) {
        if (sums[c].capped) {
            throw DegenerateCollectionError(
                "oracle trial ran past " + std::to_string(step_cap) +
                " steps without any pattern occurring");
        }
        sum_tau += sums[c].tau;
        sum_tau_sq += sums[c].tau_sq;
        for (int k = 0; k < K; ++k) stops[k] += sums[c].stops[k];
    }

    OracleEstimate est;
    est.trials = trials;
    est.mean_tau = sum_tau / static_cast<double>(trials);
    est.first_probs = Eigen::VectorXd::Zero(K);
    est.se_first = Eigen::VectorXd::Zero(K);
    const double n = static_cast<double>(trials);
    for (int k = 0; k < K; ++k) {
        est.first_probs(k) = static_cast<double>(stops[k]) / n;
    }
    if (trials >= 2) {
        est.se_defined = true;
        const double var =
            std::max(0.0, (sum_tau_sq - n * est.mean_tau * est.mean_tau) /
                              (n - 1.0));
        est.se_tau = std::sqrt(var / n);
        for (int k = 0; k < K; ++k) {
            est.se_first(k) = std::sqrt(
                est.first_probs(k) * (1.0 - est.first_probs(k)) / n);
        }
    } else {
        est.se_defined = false;
        est.se_tau = std::numeric_limits<double>::quiet_NaN();
        est.se_first.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    return est;
}

}  // namespace plp
