#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bct/oracle.hpp"
#include "bct/stats.hpp"
#include "support/test_support.hpp"

using namespace bct;

TEST_CASE("rle encoding is stable and injective on small tables", "[stats]") {
    CHECK(rle_encode({0, 0, 1, 1, 1}) == "0x2;1x3;");
    CHECK(rle_encode({1, 0, 1}) != rle_encode({1, 1, 0}));
    CHECK(rle_encode({}) == "");
}

TEST_CASE("fair coin uniformity on the two permutation matrices", "[stats]") {
    const margins m = test_support::make({1, 1}, {1, 1});
    const auto res = uniformity_test(m, 10000, 11);
    CHECK(res.table_count == 2);
    CHECK(res.dof == 1);
    CHECK(res.p_value > 0.001);
    CHECK(res.observed[0] + res.observed[1] == 10000);
}

TEST_CASE("figure instance passes uniformity at 100 samples per table", "[stats]") {
    const margins m = parse_margins("r: 3 2 1 1\nc: 2 2 1 1 1\n");
    const auto res = uniformity_test(m, 100 * 68, 12);
    CHECK(res.table_count == 68);
    CHECK(res.p_value > 0.001);
}

TEST_CASE("a one-table Omega degenerates to dof 0 and passes", "[stats]") {
    const margins m = test_support::make({2, 2}, {2, 2});
    const auto res = uniformity_test(m, 100, 13);
    CHECK(res.table_count == 1);
    CHECK(res.dof == 0);
    CHECK(res.p_value == 1.0);
}

TEST_CASE("uniformity preconditions are enforced", "[stats]") {
    const margins m = test_support::make({1, 1}, {1, 1});
    CHECK_THROWS_AS(uniformity_test(m, 19, 1), validation_error);  // < 10 per table
    CHECK_THROWS_AS(uniformity_test(test_support::make({3, 1}, {2, 2}), 100, 1),
                    infeasible_margins_error);
}

TEST_CASE("the harness catches a planted sampling bias", "[stats]") {
    // Omega for the figure margins contains tables with T[0,0] = 0; the
    // biased sampler can never produce them
    const margins m = parse_margins("r: 3 2 1 1\nc: 2 2 1 1 1\n");
    const auto tables = enumerate_tables(m);
    std::unordered_map<std::string, std::size_t> bin_of;
    for (std::size_t t = 0; t < tables.size(); ++t)
        bin_of.emplace(rle_encode(std::vector<std::uint32_t>(tables[t].begin(),
                                                             tables[t].end())),
                       t);
    std::vector<std::uint64_t> observed(tables.size(), 0);
    rng gen(14);
    const std::uint64_t samples = 100 * tables.size();
    for (std::uint64_t s = 0; s < samples; ++s)
        ++observed[bin_of.at(rle_encode(test_support::biased_binary_sample(m, gen).dense()))];
    double chi2 = 0;
    const double expected = static_cast<double>(samples) / static_cast<double>(tables.size());
    for (const auto obs : observed) {
        const double d = static_cast<double>(obs) - expected;
        chi2 += d * d / expected;
    }
    CHECK(chi_square_tail(chi2, static_cast<double>(tables.size() - 1)) <= 0.001);
}

TEST_CASE("graph predicates on hand-built tables", "[stats]") {
    // identity 2x2: two disjoint edges, disconnected, no giant half
    const margins m = test_support::make({1, 1}, {1, 1});
    contingency_table t(m);
    t.increment(0, 0);
    t.increment(1, 1);
    CHECK_FALSE(evaluate_property(t, graph_property::connected));
    CHECK(evaluate_property(t, graph_property::giant_component));  // 2 of 4 vertices
    CHECK(evaluate_property(t, graph_property::max_degree_le_k, 1));

    // all-ones 2x2: connected, degrees 2
    contingency_table u(test_support::make({2, 2}, {2, 2}));
    u.increment(0, 0);
    u.increment(0, 1);
    u.increment(1, 0);
    u.increment(1, 1);
    CHECK(evaluate_property(u, graph_property::connected));
    CHECK(evaluate_property(u, graph_property::max_degree_le_k, 2));
    CHECK_FALSE(evaluate_property(u, graph_property::max_degree_le_k, 1));
}

TEST_CASE("property names parse", "[stats]") {
    CHECK(parse_graph_property("connected") == graph_property::connected);
    CHECK(parse_graph_property("has-giant-component") == graph_property::giant_component);
    CHECK(parse_graph_property("max-degree-le-3") == graph_property::max_degree_le_k);
    CHECK_THROWS_AS(parse_graph_property("planar"), validation_error);
}

TEST_CASE("rho = 1 instances transfer properties verbatim", "[stats]") {
    const margins m = test_support::make({1, 1, 1, 1}, {1, 1, 1, 1});
    const auto res =
        property_transfer(m, graph_property::giant_component, 4000, 77);
    CHECK(res.rho == 1.0);
    CHECK(res.p_config == res.p_uniform);  // the same draws bit for bit
    CHECK(res.bound_check);
}

TEST_CASE("max-degree-le-N holds for every draw on both sides", "[stats]") {
    const margins m = parse_margins("r: 3 2 1 1\nc: 2 2 1 1 1\n");
    const auto res = property_transfer(m, graph_property::max_degree_le_k, 2000, 78,
                                       static_cast<std::uint32_t>(m.total()));
    CHECK(res.p_config == 1.0);
    CHECK(res.p_uniform == 1.0);
    CHECK(res.bound_check);
}

TEST_CASE("contiguity bound holds for the figure instance", "[stats]") {
    const margins m = parse_margins("r: 3 2 1 1\nc: 2 2 1 1 1\n");
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto conn = property_transfer(m, graph_property::connected, 20000, seed);
        INFO("seed " << seed);
        CHECK(conn.bound_check);
        const auto giant =
            property_transfer(m, graph_property::giant_component, 20000, seed);
        CHECK(giant.bound_check);
        CHECK(giant.p_uniform > 0.0);  // non-degenerate side check
    }
}

TEST_CASE("property transfer rejects infeasible margins", "[stats]") {
    CHECK_THROWS_AS(
        property_transfer(test_support::make({3, 1}, {2, 2}), graph_property::connected, 100, 1),
        infeasible_margins_error);
}
