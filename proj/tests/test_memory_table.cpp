#include <doctest.h>

#include <Eigen/Dense>

#include "plp/errors.hpp"
#include "plp/memory_table.hpp"
#include "plp/sls.hpp"

namespace {

plp::SystemResponse tiny_response() {
    Eigen::MatrixXd A(1, 1), B(1, 1);
    A << 0.5;
    B << 1.0;
    return plp::synthesize(A, B, 3);
}

plp::DataSegment tiny_segment(int len) {
    plp::DataSegment seg;
    seg.states = Eigen::MatrixXd::Random(1, len + 1);
    seg.inputs = Eigen::MatrixXd::Random(1, len);
    return seg;
}

}  // namespace

TEST_CASE("lookup distinguishes missing, fresh and stale entries") {
    plp::MemoryTable table(2, 1);
    CHECK(table.lookup(0) == nullptr);
    CHECK_FALSE(table.has_fresh(0));

    table.store(0, tiny_response(), plp::Provenance::model);
    REQUIRE(table.lookup(0) != nullptr);
    CHECK(table.lookup(0)->provenance == plp::Provenance::model);
    CHECK(table.has_fresh(0));
    CHECK(table.lookup(1) == nullptr);
}

TEST_CASE("model entries never go stale") {
    plp::MemoryTable table(1, 3);
    table.store(0, tiny_response(), plp::Provenance::model);
    for (int k = 0; k < 5; ++k) table.add_segment(0, tiny_segment(4));
    CHECK(table.has_fresh(0));
    CHECK_FALSE(table.lookup(0)->stale);
}

TEST_CASE("fresh data invalidates data entries while budget remains") {
    plp::MemoryTable table(1, 1);
    table.store(0, tiny_response(), plp::Provenance::data);
    CHECK(table.has_fresh(0));

    table.add_segment(0, tiny_segment(4));
    CHECK_FALSE(table.has_fresh(0));  // refresh budget still open
    CHECK(table.lookup(0)->stale);

    // re-synthesis from data consumes the budget
    table.store(0, tiny_response(), plp::Provenance::data);
    CHECK(table.has_fresh(0));
    CHECK(table.lookup(0)->refreshes == 1);

    // budget exhausted: further data no longer dislodges the cache
    table.add_segment(0, tiny_segment(4));
    CHECK(table.has_fresh(0));
    CHECK_FALSE(table.lookup(0)->stale);
}

TEST_CASE("re-storing over an entry counts against the refresh budget") {
    plp::MemoryTable table(1, 2);
    table.store(0, tiny_response(), plp::Provenance::model);
    CHECK(table.lookup(0)->refreshes == 0);
    table.store(0, tiny_response(), plp::Provenance::data);
    CHECK(table.lookup(0)->refreshes == 1);
    table.store(0, tiny_response(), plp::Provenance::data);
    CHECK(table.lookup(0)->refreshes == 2);
    table.add_segment(0, tiny_segment(4));
    CHECK(table.has_fresh(0));  // limit of 2 reached, stays fresh
}

TEST_CASE("segments accumulate and empty recordings are dropped") {
    plp::MemoryTable table(2, 1);
    table.add_segment(1, tiny_segment(3));
    table.add_segment(1, tiny_segment(5));
    table.add_segment(1, tiny_segment(0));  // no transitions: ignored
    CHECK(table.segments(1).size() == 2);
    CHECK(table.transition_count(1) == 8);
    CHECK(table.segments(0).empty());
    CHECK(table.transition_count(0) == 0);
}

TEST_CASE("mode bounds are enforced everywhere") {
    plp::MemoryTable table(2, 1);
    CHECK_THROWS_AS(table.lookup(-1), plp::ConfigError);
    CHECK_THROWS_AS(table.lookup(2), plp::ConfigError);
    CHECK_THROWS_AS(table.store(5, tiny_response(), plp::Provenance::model),
                    plp::ConfigError);
    CHECK_THROWS_AS(table.add_segment(-3, tiny_segment(2)), plp::ConfigError);
    CHECK_THROWS_AS(table.segments(9), plp::ConfigError);
    CHECK_THROWS_AS(plp::MemoryTable(0, 1), plp::ConfigError);
    CHECK_THROWS_AS(plp::MemoryTable(2, -1), plp::ConfigError);
}
