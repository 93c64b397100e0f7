#include <doctest.h>

#include <Eigen/Dense>

#include "plp/errors.hpp"
#include "plp/topology.hpp"

TEST_CASE("graphs are validated on construction") {
    CHECK_THROWS_AS(plp::NetworkTopology(0, {}), plp::ConfigError);
    CHECK_THROWS_AS(plp::NetworkTopology(3, {{0, 3}}), plp::ConfigError);
    CHECK_THROWS_AS(plp::NetworkTopology(3, {{-1, 1}}), plp::ConfigError);
    CHECK_THROWS_AS(plp::NetworkTopology(3, {{1, 1}}), plp::ConfigError);
    CHECK_NOTHROW(plp::NetworkTopology(1, {}));
}

TEST_CASE("laplacian has zero row sums and degree diagonal") {
    const plp::NetworkTopology path(4, {{0, 1}, {1, 2}, {2, 3}});
    const Eigen::MatrixXd lap = path.laplacian();
    CHECK(lap.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
    CHECK(lap(0, 0) == 1.0);
    CHECK(lap(1, 1) == 2.0);
    CHECK(lap(0, 1) == -1.0);
    CHECK(path.max_degree() == 2);

    const plp::NetworkTopology star(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    CHECK(star.max_degree() == 4);
}

TEST_CASE("hop neighborhoods and distances follow BFS") {
    const plp::NetworkTopology path(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    CHECK(path.hop_neighborhood(2, 0) == std::vector<int>{2});
    CHECK(path.hop_neighborhood(2, 1) == std::vector<int>{1, 2, 3});
    CHECK(path.hop_neighborhood(0, 2) == std::vector<int>{0, 1, 2});
    CHECK(path.distance(0, 4) == 4);
    CHECK(path.distance(4, 0) == 4);
    CHECK(path.distance(2, 2) == 0);

    const plp::NetworkTopology split(4, {{0, 1}, {2, 3}});
    CHECK(split.distance(0, 3) == -1);
    CHECK(split.hop_neighborhood(0, 5) == std::vector<int>{0, 1});
}

TEST_CASE("diffusion dynamics keep unit row sums") {
    const plp::NetworkTopology ring(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    const plp::TopologyDynamics dyn = plp::topology_to_dynamics(ring, 0.2);
    CHECK((dyn.state_matrix.rowwise().sum().array() - 1.0).abs().maxCoeff() <
          1e-14);
    CHECK(dyn.state_matrix(0, 0) == doctest::Approx(0.6));
    CHECK(dyn.state_matrix(0, 1) == doctest::Approx(0.2));
    CHECK_FALSE(dyn.stability_warning);

    // at coupling = 1/max_degree the diffusion map may stop contracting
    CHECK(plp::topology_to_dynamics(ring, 0.5).stability_warning);
    CHECK(plp::topology_to_dynamics(ring, 0.7).stability_warning);
    CHECK_THROWS_AS(plp::topology_to_dynamics(ring, 0.0), plp::ConfigError);
}
