#include <doctest.h>

#include <Eigen/Dense>
#include <vector>

#include "plp/errors.hpp"
#include "plp/sls.hpp"
#include "plp/topology.hpp"
#include "support/riccati_oracle.hpp"

namespace {

Eigen::MatrixXd chain_dynamics(int n, double coupling) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return plp::topology_to_dynamics(plp::NetworkTopology(n, edges), coupling)
        .state_matrix;
}

}  // namespace

TEST_CASE("synthesized responses satisfy the closed-loop equations") {
    const Eigen::MatrixXd A = chain_dynamics(5, 0.2);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(5, 5);
    const plp::SystemResponse resp = plp::synthesize(A, B, 8);
    REQUIRE(resp.horizon() == 8);
    CHECK((resp.state_maps[0] - Eigen::MatrixXd::Identity(5, 5))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    const auto rep = plp::validate_achievability(A, B, resp);
    CHECK(rep.anchor_residual <= 1e-10);
    CHECK(rep.recursion_residual <= 1e-8);
    CHECK(rep.closure_residual <= 1e-8);
}

TEST_CASE("quadratic synthesis reproduces the Riccati-recursion solution") {
    SUBCASE("scalar plant") {
        Eigen::MatrixXd A(1, 1), B(1, 1);
        A << 0.9;
        B << 1.0;
        const plp::SystemResponse resp = plp::synthesize(A, B, 20);
        const auto ref = testsupport::lqr_impulse_maps(A, B, 1.0, 1.0, 20);
        for (int s = 0; s < 20; ++s) {
            CHECK(std::abs(resp.state_maps[s](0, 0) -
                           ref.state_maps[s](0, 0)) < 1e-6);
            CHECK(std::abs(resp.input_maps[s](0, 0) -
                           ref.input_maps[s](0, 0)) < 1e-6);
        }
    }
    SUBCASE("coupled plant with weighted inputs") {
        Eigen::MatrixXd A(2, 2);
        A << 0.9, 0.1, 0.0, 0.8;
        const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(2, 2);
        const plp::SlsWeights weights{1.0, 2.0};
        const plp::SystemResponse resp = plp::synthesize(A, B, 15, weights);
        const auto ref = testsupport::lqr_impulse_maps(A, B, 1.0, 2.0, 15);
        for (int s = 0; s < 15; ++s) {
            CHECK((resp.state_maps[s] - ref.state_maps[s])
                      .cwiseAbs()
                      .maxCoeff() < 1e-6);
            CHECK((resp.input_maps[s] - ref.input_maps[s])
                      .cwiseAbs()
                      .maxCoeff() < 1e-6);
        }
    }
}

TEST_CASE("serial and parallel synthesis agree bit for bit") {
    const Eigen::MatrixXd A = chain_dynamics(6, 0.25);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(6, 6);
    const plp::SystemResponse serial = plp::synthesize(A, B, 6, {}, nullptr,
                                                       false);
    const plp::SystemResponse parallel = plp::synthesize(A, B, 6, {}, nullptr,
                                                         true);
    for (int s = 0; s < 6; ++s) {
        CHECK((serial.state_maps[s].array() ==
               parallel.state_maps[s].array()).all());
        CHECK((serial.input_maps[s].array() ==
               parallel.input_maps[s].array()).all());
    }
}

TEST_CASE("locality masks zero the response outside the hop cone") {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < 6; ++i) edges.emplace_back(i, i + 1);
    const plp::NetworkTopology topo(6, edges);
    const Eigen::MatrixXd A = chain_dynamics(6, 0.2);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(6, 6);

    const plp::SparsityMask mask = plp::locality_mask(topo, 1, 6);
    const plp::SystemResponse resp = plp::synthesize(A, B, 6, {}, &mask);
    const auto rep = plp::validate_achievability(A, B, resp);
    CHECK(rep.max_residual <= 1e-8);
    for (int s = 1; s <= 6; ++s) {
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < 6; ++j) {
                if (topo.distance(i, j) > s) {
                    CHECK(resp.state_maps[s - 1](i, j) == 0.0);
                    CHECK(resp.input_maps[s - 1](i, j) == 0.0);
                }
            }
        }
    }
}

TEST_CASE("an over-tight mask is reported as infeasible with its column") {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < 4; ++i) edges.emplace_back(i, i + 1);
    const plp::NetworkTopology topo(4, edges);
    const Eigen::MatrixXd A = chain_dynamics(4, 0.2);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(4, 4);
    // zero hops per step: the response may never leave the disturbed node,
    // but the plant's coupling spreads mass to its neighbors
    const plp::SparsityMask mask = plp::locality_mask(topo, 0, 4);
    try {
        plp::synthesize(A, B, 4, {}, &mask);
        FAIL("expected infeasibility");
    } catch (const plp::InfeasibleLocalityError& ex) {
        CHECK(ex.column() >= 0);
        CHECK(ex.column() < 4);
    }
}

TEST_CASE("the hedged synthesis reduces to the exact one for equal plants") {
    const Eigen::MatrixXd A = chain_dynamics(4, 0.2);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(4, 4);
    const plp::SystemResponse single = plp::synthesize(A, B, 5);
    const plp::RobustSynthesis robust =
        plp::synthesize_robust({A, A, A}, {B, B, B}, 5);
    CHECK(robust.mode_residuals.maxCoeff() < 1e-8);
    for (int s = 0; s < 5; ++s) {
        CHECK((robust.response.state_maps[s] - single.state_maps[s])
                  .cwiseAbs()
                  .maxCoeff() < 1e-7);
        CHECK((robust.response.input_maps[s] - single.input_maps[s])
                  .cwiseAbs()
                  .maxCoeff() < 1e-7);
    }
}

TEST_CASE("the hedged synthesis balances distinct plants") {
    const Eigen::MatrixXd A0 = chain_dynamics(4, 0.15);
    Eigen::MatrixXd A1 = A0;
    A1(0, 1) = 0.3;
    A1(0, 0) = 0.55;
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(4, 4);
    const plp::RobustSynthesis robust =
        plp::synthesize_robust({A0, A1}, {B, B}, 6);
    // anchor is exact even though neither plant is matched exactly
    CHECK((robust.response.state_maps[0] - Eigen::MatrixXd::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK(robust.mode_residuals.minCoeff() > 0.0);
    CHECK(robust.mode_residuals.maxCoeff() < 1.0);
}

TEST_CASE("closed-loop validation replays impulses and settles") {
    const Eigen::MatrixXd A = chain_dynamics(4, 0.2);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(4, 4);
    const plp::SystemResponse resp = plp::synthesize(A, B, 6);
    const auto rep = plp::validate_closed_loop(A, B, resp, 4, 0.1, 17);
    CHECK(rep.impulse_deviation <= 1e-8);
    CHECK(rep.tail_norm <= 1e-8);
    CHECK(rep.stabilized);
    CHECK(rep.peak_norm > 0.0);
}

TEST_CASE("objective weights steer the optimizer's trade-off") {
    const Eigen::MatrixXd A = chain_dynamics(4, 0.2);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(4, 4);
    const plp::SystemResponse cheap_input =
        plp::synthesize(A, B, 6, {1.0, 0.01});
    const plp::SystemResponse costly_input =
        plp::synthesize(A, B, 6, {1.0, 100.0});
    double effort_cheap = 0.0, effort_costly = 0.0;
    for (const auto& u : cheap_input.input_maps) effort_cheap += u.squaredNorm();
    for (const auto& u : costly_input.input_maps) {
        effort_costly += u.squaredNorm();
    }
    CHECK(effort_cheap > effort_costly);
    CHECK_THROWS_AS(plp::synthesize(A, B, 6, {0.0, 1.0}), plp::ConfigError);
    CHECK_THROWS_AS(plp::synthesize(A, B, 0), plp::ConfigError);
}
