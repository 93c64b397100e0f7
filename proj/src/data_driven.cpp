#include "plp/data_driven.hpp"

#include <string>

#include "plp/errors.hpp"

namespace plp {

Eigen::MatrixXd build_hankel(const Eigen::MatrixXd& signal, int order) {
    const int d = static_cast<int>(signal.rows());
    const int len = static_cast<int>(signal.cols());
    if (order < 1) throw ConfigError("Hankel order must be at least 1");
    if (order > len) {
        throw ConfigError("Hankel order " + std::to_string(order) +
                          " exceeds signal length " + std::to_string(len));
    }
    const int cols = len - order + 1;
    Eigen::MatrixXd h(d * order, cols);
    for (int i = 0; i < order; ++i) {
        for (int j = 0; j < cols; ++j) {
            h.block(i * d, j, d, 1) = signal.col(i + j);
        }
    }
    return h;
}

bool persistence_check(const Eigen::MatrixXd& signal, int order) {
    const Eigen::MatrixXd h = build_hankel(signal, order);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(h);
    const Eigen::VectorXd sv = svd.singularValues();
    if (sv.size() == 0) return false;
    const double thresh = 1e-10 * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > thresh) ++rank;
    }
    return rank == static_cast<int>(std::min(h.rows(), h.cols()));
}

long count_windows(const std::vector<DataSegment>& segments, int horizon) {
    long nc = 0;
    for (const auto& seg : segments) {
        const long len = seg.inputs.cols();
        if (len >= horizon) nc += len - horizon + 1;
    }
    return nc;
}

SystemResponse data_driven_synthesize(const std::vector<DataSegment>& segments,
                                      int horizon, const SlsWeights& weights,
                                      double ridge, bool parallel,
                                      const SparsityMask* mask) {
    if (horizon < 1) throw ConfigError("response horizon must be at least 1");
    if (!(weights.state > 0.0) || !(weights.input > 0.0)) {
        throw ConfigError("response weights must be positive");
    }
    if (!(ridge >= 0.0)) throw ConfigError("ridge must be non-negative");
    if (segments.empty()) {
        throw PersistenceError("no recorded data for this mode", horizon);
    }
    const int n = static_cast<int>(segments[0].states.rows());
    const int m = static_cast<int>(segments[0].inputs.rows());
    const int H = horizon;
    for (const auto& seg : segments) {
        if (seg.states.rows() != n || seg.inputs.rows() != m ||
            seg.states.cols() != seg.inputs.cols() + 1) {
            throw ConfigError(
                "segment shapes inconsistent (states must have one more "
                "column than inputs)");
        }
    }

    const long nc = count_windows(segments, H);
    if (nc < n + static_cast<long>(H) * m) {
        throw PersistenceError(
            "only " + std::to_string(nc) + " data windows at order " +
                std::to_string(H) + ", need at least " +
                std::to_string(n + static_cast<long>(H) * m),
            H);
    }

    // Window banks: column c of `xwin[s]` is the state s steps into window
    // c, `uwin[s]` likewise for inputs; `xclose` is the state H steps in.
    std::vector<Eigen::MatrixXd> xwin(H, Eigen::MatrixXd(n, nc));
    std::vector<Eigen::MatrixXd> uwin(H, Eigen::MatrixXd(m, nc));
    Eigen::MatrixXd xclose(n, nc);
    long c = 0;
    for (const auto& seg : segments) {
        const long len = seg.inputs.cols();
        for (long start = 0; start + H <= len; ++start, ++c) {
            for (int s = 0; s < H; ++s) {
                xwin[s].col(c) = seg.states.col(start + s);
                uwin[s].col(c) = seg.inputs.col(start + s);
            }
            xclose.col(c) = seg.states.col(start + H);
        }
    }

    // Solvability: the anchor rows and the stacked input windows must span
    // independently, otherwise the data admits multiple responses.
    {
        Eigen::MatrixXd pe(n + H * m, nc);
        pe.topRows(n) = xwin[0];
        for (int s = 0; s < H; ++s) pe.middleRows(n + s * m, m) = uwin[s];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(pe);
        const Eigen::VectorXd sv = svd.singularValues();
        const double thresh = 1e-10 * sv(0);
        int rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            if (sv(i) > thresh) ++rank;
        }
        if (rank < n + H * m) {
            throw PersistenceError(
                "data not persistently exciting at order " +
                    std::to_string(H) + " (rank " + std::to_string(rank) +
                    " of " + std::to_string(n + H * m) + ")",
                H);
        }
    }

    // Map from window weights g to the flattened response column, and the
    // response-space quadratic cost pulled back through it.
    Eigen::MatrixXd D(H * (n + m), nc);
    for (int s = 0; s < H; ++s) D.middleRows(s * n, n) = xwin[s];
    for (int s = 0; s < H; ++s) {
        D.middleRows(H * n + s * m, m) = uwin[s];
    }
    Eigen::VectorXd wvec(H * (n + m));
    wvec.head(H * n).setConstant(weights.state);
    wvec.tail(H * m).setConstant(weights.input);

    if (mask) {
        if (static_cast<int>(mask->state.size()) != H ||
            static_cast<int>(mask->input.size()) != H) {
            throw ConfigError("sparsity mask horizon mismatch");
        }
    }

    const Eigen::MatrixXd DtWD =
        D.transpose() * wvec.asDiagonal() * D +
        ridge * Eigen::MatrixXd::Identity(nc, nc);
    Eigen::MatrixXd C(2 * n, nc);
    C.topRows(n) = xwin[0];
    C.bottomRows(n) = xclose;

    // Without a mask every column shares one KKT system; support
    // constraints make the constraint block column-dependent.
    Eigen::PartialPivLU<Eigen::MatrixXd> shared_lu;
    if (!mask) {
        const long dim = nc + 2 * n;
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
        kkt.topLeftCorner(nc, nc) = DtWD;
        kkt.topRightCorner(nc, 2 * n) = C.transpose();
        kkt.bottomLeftCorner(2 * n, nc) = C;
        shared_lu.compute(kkt);
    }

    SystemResponse out;
    out.state_maps.assign(H, Eigen::MatrixXd::Zero(n, n));
    out.input_maps.assign(H, Eigen::MatrixXd::Zero(m, n));

    int failed_column = -1;
    std::string failure;

#pragma omp parallel for schedule(static) if (parallel)
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd g(nc);
        if (!mask) {
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nc + 2 * n);
            rhs(nc + j) = 1.0;
            g = shared_lu.solve(rhs).head(nc);
        } else {
            // Forbidden response entries become extra zero constraints on
            // the corresponding rows of the window map.
            std::vector<int> zero_rows;
            for (int s = 0; s < H; ++s) {
                for (int i = 0; i < n; ++i) {
                    // the anchor rows already pin the first state map to
                    // e_j; repeating its zero entries would only strip the
                    // constraint block of row rank
                    if (s == 0 && i != j) continue;
                    if (!mask->state[s](i, j)) zero_rows.push_back(s * n + i);
                }
                for (int i = 0; i < m; ++i) {
                    if (!mask->input[s](i, j)) {
                        zero_rows.push_back(H * n + s * m + i);
                    }
                }
            }
            const long extra = static_cast<long>(zero_rows.size());
            const long crows = 2 * n + extra;
            Eigen::MatrixXd Cj(crows, nc);
            Cj.topRows(2 * n) = C;
            for (long r = 0; r < extra; ++r) {
                Cj.row(2 * n + r) = D.row(zero_rows[r]);
            }
            const long dim = nc + crows;
            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
            kkt.topLeftCorner(nc, nc) = DtWD;
            kkt.topRightCorner(nc, crows) = Cj.transpose();
            kkt.bottomLeftCorner(crows, nc) = Cj;
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
            rhs(nc + j) = 1.0;
            Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
            if (!lu.isInvertible()) {
#pragma omp critical
                {
                    if (failed_column < 0 || j < failed_column) {
                        failed_column = j;
                        failure = "support constraints infeasible for column " +
                                  std::to_string(j);
                    }
                }
                continue;
            }
            g = lu.solve(rhs).head(nc);
        }
        const Eigen::VectorXd z = D * g;
        for (int s = 0; s < H; ++s) {
            out.state_maps[s].col(j) = z.segment(s * n, n);
            out.input_maps[s].col(j) = z.segment(H * n + s * m, m);
            if (mask) {
                // the zero constraints hold up to solver precision; emit
                // structural zeros so supports read back exactly
                for (int i = 0; i < n; ++i) {
                    if (!mask->state[s](i, j) && (s > 0 || i != j)) {
                        out.state_maps[s](i, j) = 0.0;
                    }
                }
                for (int i = 0; i < m; ++i) {
                    if (!mask->input[s](i, j)) out.input_maps[s](i, j) = 0.0;
                }
            }
        }
    }
    if (failed_column >= 0) {
        throw InfeasibleLocalityError(failure, failed_column);
    }
    return out;
}

}  // namespace plp
