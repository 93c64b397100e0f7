#include "plp/sls.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "plp/errors.hpp"
#include "plp/rng.hpp"
#include "plp/sls_controller.hpp"

namespace plp {

namespace {

void check_plant(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                 int horizon, const SlsWeights& weights) {
    if (A.rows() == 0 || A.rows() != A.cols()) {
        throw ConfigError("state matrix must be square and non-empty");
    }
    if (B.rows() != A.rows() || B.cols() == 0) {
        throw ConfigError("input matrix shape does not match the plant");
    }
    if (horizon < 1) throw ConfigError("response horizon must be at least 1");
    if (!(weights.state > 0.0) || !(weights.input > 0.0)) {
        throw ConfigError("response weights must be positive");
    }
}

// Stacked closed-loop equations for one plant, over the flattened variable
// z = [Phi_x[1..H] column; Phi_u[1..H] column].  `with_anchor` prepends the
// identity-anchor rows for Phi_x[1].
Eigen::MatrixXd constraint_matrix(const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& B, int H,
                                  bool with_anchor) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    const int nv = H * (n + m);
    const int anchor_rows = with_anchor ? n : 0;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(anchor_rows + H * n, nv);
    const auto x_var = [&](int s) { return (s - 1) * n; };      // s in 1..H
    const auto u_var = [&](int s) { return H * n + (s - 1) * m; };
    if (with_anchor) {
        C.block(0, x_var(1), n, n).setIdentity();
    }
    for (int s = 1; s < H; ++s) {
        const int row = anchor_rows + (s - 1) * n;
        C.block(row, x_var(s + 1), n, n) = -Eigen::MatrixXd::Identity(n, n);
        C.block(row, x_var(s), n, n) += A;
        C.block(row, u_var(s), n, m) += B;
    }
    const int row = anchor_rows + (H - 1) * n;
    C.block(row, x_var(H), n, n) += A;
    C.block(row, u_var(H), n, m) += B;
    return C;
}

Eigen::VectorXd weight_vector(int n, int m, int H, const SlsWeights& w) {
    Eigen::VectorXd d(H * (n + m));
    d.head(H * n).setConstant(w.state);
    d.tail(H * m).setConstant(w.input);
    return d;
}

SystemResponse empty_response(int n, int m, int H) {
    SystemResponse r;
    r.state_maps.assign(H, Eigen::MatrixXd::Zero(n, n));
    r.input_maps.assign(H, Eigen::MatrixXd::Zero(m, n));
    return r;
}

void scatter_column(SystemResponse& r, int column,
                    const Eigen::VectorXd& z, int n, int m, int H) {
    for (int s = 0; s < H; ++s) {
        r.state_maps[s].col(column) = z.segment(s * n, n);
        r.input_maps[s].col(column) = z.segment(H * n + s * m, m);
    }
}

constexpr double kFeasibilityTol = 1e-8;

}  // namespace

bool SystemResponse::same_shape(const SystemResponse& other) const {
    return horizon() == other.horizon() && state_dim() == other.state_dim() &&
           input_dim() == other.input_dim();
}

SparsityMask locality_mask(const NetworkTopology& topology, int hops,
                           int horizon, const std::vector<int>& actuated) {
    if (hops < 0) throw ConfigError("hop budget must be non-negative");
    if (horizon < 1) throw ConfigError("response horizon must be at least 1");
    const int n = topology.node_count();
    std::vector<int> act = actuated;
    if (act.empty()) {
        act.resize(n);
        for (int i = 0; i < n; ++i) act[i] = i;
    }
    for (int node : act) {
        if (node < 0 || node >= n) {
            throw ConfigError("actuated node out of range");
        }
    }
    const int m = static_cast<int>(act.size());

    Eigen::MatrixXi dist(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) dist(i, j) = topology.distance(i, j);
    }

    SparsityMask mask;
    for (int s = 1; s <= horizon; ++s) {
        const long reach = static_cast<long>(hops) * s;
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> ms(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                ms(i, j) = dist(i, j) >= 0 && dist(i, j) <= reach;
            }
        }
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mu(m, n);
        for (int k = 0; k < m; ++k) {
            for (int j = 0; j < n; ++j) {
                mu(k, j) = dist(act[k], j) >= 0 && dist(act[k], j) <= reach;
            }
        }
        mask.state.push_back(std::move(ms));
        mask.input.push_back(std::move(mu));
    }
    return mask;
}

double response_objective(const SystemResponse& response,
                          const SlsWeights& weights) {
    double obj = 0.0;
    for (const auto& p : response.state_maps) obj += weights.state * p.squaredNorm();
    for (const auto& p : response.input_maps) obj += weights.input * p.squaredNorm();
    return obj;
}

SystemResponse synthesize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          int horizon, const SlsWeights& weights,
                          const SparsityMask* mask, bool parallel) {
    check_plant(A, B, horizon, weights);
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    const int H = horizon;
    const int nv = H * (n + m);
    if (mask) {
        if (static_cast<int>(mask->state.size()) != H ||
            static_cast<int>(mask->input.size()) != H) {
            throw ConfigError("sparsity mask horizon mismatch");
        }
        for (int s = 0; s < H; ++s) {
            if (mask->state[s].rows() != n || mask->state[s].cols() != n ||
                mask->input[s].rows() != m || mask->input[s].cols() != n) {
                throw ConfigError("sparsity mask shape mismatch");
            }
        }
    }

    const Eigen::MatrixXd C = constraint_matrix(A, B, H, /*with_anchor=*/true);
    const Eigen::VectorXd wvec = weight_vector(n, m, H, weights);
    SystemResponse out = empty_response(n, m, H);

    int failed_column = -1;
    std::string failure;

#pragma omp parallel for schedule(static) if (parallel)
    for (int j = 0; j < n; ++j) {
        try {
            // Variables this column may use under the mask.
            std::vector<int> keep;
            keep.reserve(nv);
            for (int s = 0; s < H; ++s) {
                for (int i = 0; i < n; ++i) {
                    if (!mask || mask->state[s](i, j)) keep.push_back(s * n + i);
                }
            }
            for (int s = 0; s < H; ++s) {
                for (int i = 0; i < m; ++i) {
                    if (!mask || mask->input[s](i, j)) {
                        keep.push_back(H * n + s * m + i);
                    }
                }
            }
            const int nk = static_cast<int>(keep.size());
            Eigen::MatrixXd Ck(C.rows(), nk);
            for (int c = 0; c < nk; ++c) Ck.col(c) = C.col(keep[c]);
            Eigen::VectorXd d = Eigen::VectorXd::Zero(C.rows());
            d(j) = 1.0;

            Eigen::BDCSVD<Eigen::MatrixXd> svd(
                Ck, Eigen::ComputeFullU | Eigen::ComputeFullV);
            const Eigen::VectorXd zp = svd.solve(d);
            const double feas = (Ck * zp - d).cwiseAbs().maxCoeff();
            if (feas > kFeasibilityTol) {
                throw InfeasibleLocalityError(
                    "closed-loop constraints infeasible for column " +
                        std::to_string(j) + " (residual " +
                        std::to_string(feas) + ")",
                    j);
            }
            const Eigen::Index rank = svd.rank();
            Eigen::VectorXd z = zp;
            if (rank < nk) {
                const Eigen::MatrixXd N =
                    svd.matrixV().rightCols(nk - rank);
                Eigen::VectorXd wk(nk);
                for (int c = 0; c < nk; ++c) wk(c) = wvec(keep[c]);
                const Eigen::MatrixXd G =
                    N.transpose() * wk.asDiagonal() * N;
                const Eigen::VectorXd g =
                    N.transpose() * (wk.asDiagonal() * zp);
                z -= N * G.llt().solve(g);
            }
            Eigen::VectorXd zfull = Eigen::VectorXd::Zero(nv);
            for (int c = 0; c < nk; ++c) zfull(keep[c]) = z(c);
            scatter_column(out, j, zfull, n, m, H);
        } catch (const std::exception& ex) {
#pragma omp critical
            {
                if (failed_column < 0 || j < failed_column) {
                    failed_column = j;
                    failure = ex.what();
                }
            }
        }
    }
    if (failed_column >= 0) {
        throw InfeasibleLocalityError(failure, failed_column);
    }
    return out;
}

AchievabilityReport validate_achievability(const Eigen::MatrixXd& A,
                                           const Eigen::MatrixXd& B,
                                           const SystemResponse& response) {
    const int H = response.horizon();
    if (H < 1) throw ConfigError("response is empty");
    const int n = static_cast<int>(A.rows());
    AchievabilityReport rep;
    rep.anchor_residual =
        (response.state_maps[0] - Eigen::MatrixXd::Identity(n, n))
            .cwiseAbs()
            .maxCoeff();
    for (int s = 0; s + 1 < H; ++s) {
        const double r = (response.state_maps[s + 1] -
                          A * response.state_maps[s] -
                          B * response.input_maps[s])
                             .cwiseAbs()
                             .maxCoeff();
        rep.recursion_residual = std::max(rep.recursion_residual, r);
    }
    rep.closure_residual = (A * response.state_maps[H - 1] +
                            B * response.input_maps[H - 1])
                               .cwiseAbs()
                               .maxCoeff();
    rep.max_residual = std::max({rep.anchor_residual, rep.recursion_residual,
                                 rep.closure_residual});
    return rep;
}

RobustSynthesis synthesize_robust(const std::vector<Eigen::MatrixXd>& As,
                                  const std::vector<Eigen::MatrixXd>& Bs,
                                  int horizon, const SlsWeights& weights,
                                  bool parallel) {
    if (As.empty() || As.size() != Bs.size()) {
        throw ConfigError("need matching non-empty plant lists");
    }
    const int modes = static_cast<int>(As.size());
    for (int k = 0; k < modes; ++k) check_plant(As[k], Bs[k], horizon, weights);
    const int n = static_cast<int>(As[0].rows());
    const int m = static_cast<int>(Bs[0].cols());
    const int H = horizon;
    const int nv = H * (n + m);
    for (int k = 1; k < modes; ++k) {
        if (As[k].rows() != n || Bs[k].cols() != m) {
            throw ConfigError("plants must share state and input dimensions");
        }
    }

    // Anchor is enforced exactly by fixing the first n variables, which are
    // the Phi_x[1] entries of the column.  The remaining variables minimize
    // the stacked violation of every plant's equations; the quadratic cost
    // then breaks ties inside the least-squares solution set.
    Eigen::MatrixXd S(modes * H * n, nv);
    for (int k = 0; k < modes; ++k) {
        S.middleRows(k * H * n, H * n) =
            constraint_matrix(As[k], Bs[k], H, /*with_anchor=*/false);
    }
    const Eigen::MatrixXd S_fixed = S.leftCols(n);
    const Eigen::MatrixXd S_free = S.rightCols(nv - n);
    const Eigen::VectorXd wvec = weight_vector(n, m, H, weights);
    const Eigen::VectorXd w_free = wvec.tail(nv - n);

    // JacobiSVD: the stacked matrix repeats near-identical row blocks, a
    // degeneracy where the divide-and-conquer solver loses accuracy.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        S_free, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Index rank = svd.rank();
    Eigen::MatrixXd N;
    Eigen::LLT<Eigen::MatrixXd> tie_llt;
    const int nfree = nv - n;
    if (rank < nfree) {
        N = svd.matrixV().rightCols(nfree - rank);
        tie_llt.compute(N.transpose() * w_free.asDiagonal() * N);
    }

    RobustSynthesis out;
    out.response = empty_response(n, m, H);

#pragma omp parallel for schedule(static) if (parallel)
    for (int j = 0; j < n; ++j) {
        const Eigen::VectorXd target = -S_fixed.col(j);
        Eigen::VectorXd y = svd.solve(target);
        if (N.size() > 0) {
            const Eigen::VectorXd g = N.transpose() * (w_free.asDiagonal() * y);
            y -= N * tie_llt.solve(g);
        }
        Eigen::VectorXd z(nv);
        z.head(n).setZero();
        z(j) = 1.0;
        z.tail(nfree) = y;
        scatter_column(out.response, j, z, n, m, H);
    }

    out.mode_residuals = Eigen::VectorXd::Zero(modes);
    for (int k = 0; k < modes; ++k) {
        out.mode_residuals(k) =
            validate_achievability(As[k], Bs[k], out.response).max_residual;
    }
    return out;
}

ClosedLoopReport validate_closed_loop(const Eigen::MatrixXd& A,
                                      const Eigen::MatrixXd& B,
                                      const SystemResponse& response,
                                      int trials, double disturbance_bound,
                                      std::uint64_t seed) {
    const int n = static_cast<int>(A.rows());
    const int H = response.horizon();
    ClosedLoopReport rep;

    // One impulse per coordinate: the rolled-out state must replay the
    // response maps column by column and vanish after the horizon.
    const int T_imp = H + 1 + 2 * H;
    for (int i = 0; i < n; ++i) {
        SlsController ctrl(response);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (int t = 0; t < T_imp; ++t) {
            const Eigen::VectorXd u = ctrl.step(x);
            x = A * x + B * u;
            if (t == 0) x += Eigen::VectorXd::Unit(n, i);
            if (t + 1 <= H) {
                const double dev =
                    (x - response.state_maps[t].col(i)).cwiseAbs().maxCoeff();
                rep.impulse_deviation = std::max(rep.impulse_deviation, dev);
            } else {
                rep.tail_norm = std::max(rep.tail_norm, x.norm());
            }
        }
    }

    // Random bounded-disturbance runs; the closed loop is flagged as
    // stabilized when the peak-norm envelope stops growing once the
    // response horizon has passed.
    const int T = 9 * H + 9;
    bool envelope_ok = true;
    for (int trial = 0; trial < trials; ++trial) {
        auto rng = make_engine(seed, static_cast<std::uint64_t>(trial));
        std::uniform_real_distribution<double> dist(-disturbance_bound,
                                                    disturbance_bound);
        SlsController ctrl(response);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        std::vector<double> norms;
        for (int t = 0; t < T; ++t) {
            const Eigen::VectorXd u = ctrl.step(x);
            Eigen::VectorXd w(n);
            for (int i = 0; i < n; ++i) w(i) = dist(rng);
            x = A * x + B * u + w;
            if (!x.allFinite()) {
                envelope_ok = false;
                break;
            }
            norms.push_back(x.norm());
            rep.peak_norm = std::max(rep.peak_norm, x.norm());
        }
        if (static_cast<long>(norms.size()) < T) continue;
        const int start = H;
        const int len = (T - start) / 3;
        double p1 = 0.0, p2 = 0.0, p3 = 0.0;
        for (int t = start; t < start + len; ++t) p1 = std::max(p1, norms[t]);
        for (int t = start + len; t < start + 2 * len; ++t) {
            p2 = std::max(p2, norms[t]);
        }
        for (int t = start + 2 * len; t < T; ++t) p3 = std::max(p3, norms[t]);
        const double floor = std::max(disturbance_bound, 1e-12);
        if (p3 > 1.5 * std::max({p1, p2, floor})) envelope_ok = false;
    }
    rep.stabilized = envelope_ok;
    return rep;
}

}  // namespace plp
