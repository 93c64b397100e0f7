#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "plp/errors.hpp"
#include "plp/pattern_oracle.hpp"
#include "plp/patterns.hpp"

namespace {

Eigen::MatrixXd fair_coin() {
    Eigen::MatrixXd p(2, 2);
    p << 0.5, 0.5, 0.5, 0.5;
    return p;
}

}  // namespace

TEST_CASE("serial and parallel oracle runs are bit-identical") {
    Eigen::MatrixXd tpm(3, 3);
    tpm << 0.2, 0.5, 0.3, 0.4, 0.2, 0.4, 0.3, 0.3, 0.4;
    const plp::PatternCollection collection({{0, 1}, {2, 2}}, 3);

    const auto serial =
        plp::monte_carlo_oracle(tpm, 0, collection, 30000, 99, false);
    const auto parallel =
        plp::monte_carlo_oracle(tpm, 0, collection, 30000, 99, true);
    CHECK(serial.mean_tau == parallel.mean_tau);
    CHECK(serial.se_tau == parallel.se_tau);
    CHECK((serial.first_probs.array() == parallel.first_probs.array()).all());
    CHECK(serial.trials == parallel.trials);
}

TEST_CASE("oracle agrees with the closed form within three standard errors") {
    const plp::PatternCollection hh({{1, 1}}, 2);
    const auto est = plp::monte_carlo_oracle(fair_coin(), 0, hh, 200000, 7);
    REQUIRE(est.se_defined);
    CHECK(std::abs(est.mean_tau - 6.0) <= 3.0 * est.se_tau);

    const plp::PatternCollection pair({{1, 1}, {0, 1}}, 2);
    const auto race = plp::monte_carlo_oracle(fair_coin(), 0, pair, 200000, 8);
    CHECK(std::abs(race.first_probs(0) - 0.25) <= 3.0 * race.se_first(0));
    CHECK(std::abs(race.first_probs(1) - 0.75) <= 3.0 * race.se_first(1));
    CHECK(race.first_probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a single trial leaves the standard error undefined") {
    const plp::PatternCollection hh({{1, 1}}, 2);
    const auto est = plp::monte_carlo_oracle(fair_coin(), 0, hh, 1, 3);
    CHECK_FALSE(est.se_defined);
    CHECK(std::isnan(est.se_tau));
    CHECK(est.mean_tau >= 2.0);

    const auto est2 = plp::monte_carlo_oracle(fair_coin(), 0, hh, 2, 3);
    CHECK(est2.se_defined);
}

TEST_CASE("an unrealizable collection trips the step cap") {
    // the chain never leaves its starting mode, so the word (1,1) from
    // mode 0 never completes
    Eigen::MatrixXd frozen(2, 2);
    frozen << 1.0, 0.0, 0.0, 1.0;
    const plp::PatternCollection hh({{1, 1}}, 2);
    CHECK_THROWS_AS(
        plp::monte_carlo_oracle(frozen, 0, hh, 10, 1, true, 5000),
        plp::DegenerateCollectionError);
}

TEST_CASE("oracle validates its inputs independently") {
    const plp::PatternCollection hh({{1, 1}}, 2);
    Eigen::MatrixXd bad(2, 2);
    bad << 0.6, 0.6, 0.5, 0.5;
    CHECK_THROWS_AS(plp::monte_carlo_oracle(bad, 0, hh, 10, 1),
                    plp::ConfigError);
    CHECK_THROWS_AS(plp::monte_carlo_oracle(fair_coin(), 5, hh, 10, 1),
                    plp::ConfigError);
    CHECK_THROWS_AS(plp::monte_carlo_oracle(fair_coin(), 0, hh, 0, 1),
                    plp::ConfigError);
}

TEST_CASE("estimates depend only on seed and trial count") {
    const plp::PatternCollection pair({{1, 0}}, 2);
    const auto a = plp::monte_carlo_oracle(fair_coin(), 0, pair, 5000, 42);
    const auto b = plp::monte_carlo_oracle(fair_coin(), 0, pair, 5000, 42);
    const auto c = plp::monte_carlo_oracle(fair_coin(), 0, pair, 5000, 43);
    CHECK(a.mean_tau == b.mean_tau);
    CHECK(a.mean_tau != c.mean_tau);
}
