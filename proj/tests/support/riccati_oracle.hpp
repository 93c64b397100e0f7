#pragma once

// Finite-horizon LQR solved by the classical backward Riccati recursion,
// with the end-of-horizon rest condition imposed through a huge terminal
// weight.  Rolling the resulting time-varying gains forward from a unit
// impulse yields the optimal disturbance-to-state and disturbance-to-input
// maps, which is exactly what the quadratic response synthesis is supposed
// to return — computed here by a completely different route.

#include <Eigen/Dense>
#include <vector>

namespace testsupport {

struct LqrImpulse {
    std::vector<Eigen::MatrixXd> state_maps;  // map s steps after impulse
    std::vector<Eigen::MatrixXd> input_maps;
};

inline LqrImpulse lqr_impulse_maps(const Eigen::MatrixXd& A,
                                   const Eigen::MatrixXd& B, double q,
                                   double r, int horizon,
                                   double terminal_weight = 1e10) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    const Eigen::MatrixXd Q = q * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd R = r * Eigen::MatrixXd::Identity(m, m);

    // backward pass: V_s(x) = x' P_s x over the cost-to-go from step s
    std::vector<Eigen::MatrixXd> gains(horizon);
    Eigen::MatrixXd P = terminal_weight * Eigen::MatrixXd::Identity(n, n);
    for (int s = horizon; s >= 1; --s) {
        const Eigen::MatrixXd BtPB = B.transpose() * P * B;
        const Eigen::MatrixXd K =
            (R + BtPB).ldlt().solve(B.transpose() * P * A);
        gains[s - 1] = K;
        const Eigen::MatrixXd Acl = A - B * K;
        P = Q + K.transpose() * R * K + Acl.transpose() * P * Acl;
    }

    // forward pass from one impulse per coordinate
    LqrImpulse out;
    Eigen::MatrixXd X = Eigen::MatrixXd::Identity(n, n);
    for (int s = 1; s <= horizon; ++s) {
        out.state_maps.push_back(X);
        const Eigen::MatrixXd U = -gains[s - 1] * X;
        out.input_maps.push_back(U);
        X = A * X + B * U;
    }
    return out;
}

}  // namespace testsupport
