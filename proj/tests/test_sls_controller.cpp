#include <doctest.h>

#include <Eigen/Dense>
#include <vector>

#include "plp/errors.hpp"
#include "plp/sls.hpp"
#include "plp/sls_controller.hpp"
#include "plp/topology.hpp"

namespace {

plp::SystemResponse chain_response(int n, double coupling, int horizon) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    const Eigen::MatrixXd A =
        plp::topology_to_dynamics(plp::NetworkTopology(n, edges), coupling)
            .state_matrix;
    return plp::synthesize(A, Eigen::MatrixXd::Identity(n, n), horizon);
}

}  // namespace

TEST_CASE("an impulse is replayed exactly through the stored maps") {
    const int n = 4, horizon = 6;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    const Eigen::MatrixXd A =
        plp::topology_to_dynamics(plp::NetworkTopology(n, edges), 0.2)
            .state_matrix;
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
    const plp::SystemResponse resp = plp::synthesize(A, B, horizon);
    for (int hit = 0; hit < n; ++hit) {
        plp::SlsController ctrl(resp);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        // settle one quiet step, then inject a unit impulse at node `hit`
        x = A * x + B * ctrl.step(x);
        x += Eigen::VectorXd::Unit(n, hit);
        for (int s = 1; s <= horizon; ++s) {
            const Eigen::VectorXd predicted = resp.state_maps[s - 1].col(hit);
            CHECK((x - predicted).cwiseAbs().maxCoeff() < 1e-9);
            x = A * x + B * ctrl.step(x);
        }
        CHECK(x.cwiseAbs().maxCoeff() < 1e-9);  // gone after the horizon
    }
}

TEST_CASE("re-installing the same response is a no-op mid-run") {
    const int n = 3, horizon = 5;
    std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}};
    const Eigen::MatrixXd A =
        plp::topology_to_dynamics(plp::NetworkTopology(n, edges), 0.2)
            .state_matrix;
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
    const plp::SystemResponse resp = plp::synthesize(A, B, horizon);

    plp::SlsController plain(resp);
    plp::SlsController swapped(resp);
    Eigen::VectorXd xp = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd xs = xp;
    for (int t = 0; t < 12; ++t) {
        if (t == 4) swapped.set_response(resp);
        const Eigen::VectorXd up = plain.step(xp);
        const Eigen::VectorXd us = swapped.step(xs);
        CHECK((up - us).cwiseAbs().maxCoeff() == 0.0);
        xp = A * xp + B * up;
        xs = A * xs + B * us;
    }
}

TEST_CASE("history reset restarts the disturbance reconstruction") {
    const plp::SystemResponse resp = chain_response(3, 0.2, 4);
    plp::SlsController ctrl(resp);
    const Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
    const Eigen::VectorXd first = ctrl.step(x);
    ctrl.step(Eigen::VectorXd::Zero(3));
    ctrl.reset_history();
    const Eigen::VectorXd again = ctrl.step(x);
    CHECK((first - again).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dimension changes are rejected while history is pending") {
    const plp::SystemResponse small = chain_response(3, 0.2, 4);
    const plp::SystemResponse large = chain_response(5, 0.2, 4);
    plp::SlsController ctrl(small);
    ctrl.step(Eigen::VectorXd::Ones(3));
    CHECK_THROWS_AS(ctrl.set_response(large), plp::ConfigError);
    ctrl.reset_history();
    CHECK_NOTHROW(ctrl.set_response(large));
    CHECK_THROWS_AS(ctrl.step(Eigen::VectorXd::Ones(3)), plp::ConfigError);
    CHECK_NOTHROW(ctrl.step(Eigen::VectorXd::Ones(5)));
}

TEST_CASE("an empty response is rejected up front") {
    plp::SystemResponse empty;
    CHECK_THROWS_AS(plp::SlsController{empty}, plp::ConfigError);
}
