#include <doctest.h>

#include <Eigen/Dense>
#include <vector>

#include "plp/errors.hpp"
#include "plp/jump_system.hpp"
#include "plp/rng.hpp"

namespace {

plp::JumpLinearSystem scalar_pair(double a0, double a1, double bound) {
    std::vector<Eigen::MatrixXd> As = {Eigen::MatrixXd::Constant(1, 1, a0),
                                       Eigen::MatrixXd::Constant(1, 1, a1)};
    std::vector<Eigen::MatrixXd> Bs = {Eigen::MatrixXd::Identity(1, 1),
                                       Eigen::MatrixXd::Identity(1, 1)};
    return plp::JumpLinearSystem(As, Bs, bound);
}

}  // namespace

TEST_CASE("plant families are validated on construction") {
    std::vector<Eigen::MatrixXd> As = {Eigen::MatrixXd::Identity(2, 2)};
    std::vector<Eigen::MatrixXd> Bs = {Eigen::MatrixXd::Identity(2, 2)};
    CHECK_NOTHROW(plp::JumpLinearSystem(As, Bs, 0.1));
    CHECK_THROWS_AS(plp::JumpLinearSystem({}, {}, 0.1), plp::ConfigError);
    CHECK_THROWS_AS(
        plp::JumpLinearSystem(As, {Eigen::MatrixXd::Identity(3, 2)}, 0.1),
        plp::ConfigError);
    CHECK_THROWS_AS(plp::JumpLinearSystem(As, Bs, -0.1), plp::ConfigError);

    std::vector<Eigen::MatrixXd> As2 = {Eigen::MatrixXd::Identity(2, 2),
                                        Eigen::MatrixXd::Identity(3, 3)};
    std::vector<Eigen::MatrixXd> Bs2 = {Eigen::MatrixXd::Identity(2, 2),
                                        Eigen::MatrixXd::Identity(3, 3)};
    CHECK_THROWS_AS(plp::JumpLinearSystem(As2, Bs2, 0.1), plp::ConfigError);
}

TEST_CASE("disturbance samples respect kind and bound") {
    auto rng = plp::make_engine(5, 1);
    const Eigen::MatrixXd uni =
        plp::sample_disturbance(3, 500, 0.2, "uniform", rng);
    CHECK(uni.rows() == 3);
    CHECK(uni.cols() == 500);
    CHECK(uni.cwiseAbs().maxCoeff() <= 0.2);
    CHECK(uni.cwiseAbs().maxCoeff() > 0.05);  // not degenerate

    const Eigen::MatrixXd gauss =
        plp::sample_disturbance(3, 500, 0.2, "gaussian", rng);
    CHECK(gauss.cwiseAbs().maxCoeff() <= 0.2);

    const Eigen::MatrixXd zero =
        plp::sample_disturbance(3, 50, 0.2, "zero", rng);
    CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(plp::sample_disturbance(3, 10, 0.2, "cauchy", rng),
                    plp::ConfigError);
}

TEST_CASE("open-loop simulation follows the mode-dependent recursion") {
    const plp::JumpLinearSystem system = scalar_pair(0.5, -0.25, 0.0);
    plp::OpenLoopController ctrl(1);
    const std::vector<int> modes = {0, 0, 1, 1};
    const Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, 4);
    Eigen::VectorXd x0(1);
    x0 << 8.0;

    const plp::Trajectory traj =
        plp::simulate(system, modes, w, ctrl, x0);
    REQUIRE(traj.states.cols() == 5);
    REQUIRE(traj.inputs.cols() == 4);
    CHECK(traj.states(0, 0) == 8.0);
    CHECK(traj.states(0, 1) == doctest::Approx(4.0));
    CHECK(traj.states(0, 2) == doctest::Approx(2.0));
    CHECK(traj.states(0, 3) == doctest::Approx(-0.5));
    CHECK(traj.states(0, 4) == doctest::Approx(0.125));
    CHECK(traj.inputs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("divergence is reported with the offending step") {
    const plp::JumpLinearSystem system = scalar_pair(2.0, 2.0, 0.0);
    plp::OpenLoopController ctrl(1);
    const std::vector<int> modes(10, 0);
    const Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, 10);
    Eigen::VectorXd x0(1);
    x0 << 1.0;

    try {
        plp::simulate(system, modes, w, ctrl, x0, false, 100.0);
        FAIL("expected divergence");
    } catch (const plp::DivergenceError& ex) {
        // 2^7 = 128 > 100 first happens at step 7
        CHECK(ex.step() == 7);
    }
}

TEST_CASE("simulation validates shapes and mode indices") {
    const plp::JumpLinearSystem system = scalar_pair(0.5, 0.5, 0.0);
    plp::OpenLoopController ctrl(1);
    const Eigen::MatrixXd w = Eigen::MatrixXd::Zero(1, 3);
    Eigen::VectorXd x0(1);
    x0 << 1.0;
    CHECK_THROWS_AS(
        plp::simulate(system, {0, 1, 2}, w, ctrl, x0),
        plp::ConfigError);
    CHECK_THROWS_AS(
        plp::simulate(system, {0, 0, 0, 0}, w, ctrl, x0),
        plp::ConfigError);
    CHECK_THROWS_AS(
        plp::simulate(system, {0}, w, ctrl, Eigen::VectorXd::Zero(2)),
        plp::ConfigError);
}
