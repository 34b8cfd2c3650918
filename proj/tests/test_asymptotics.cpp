#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bct/asymptotics.hpp"
#include "bct/expr.hpp"
#include "bct/families.hpp"
#include "support/test_support.hpp"

using namespace bct;

TEST_CASE("mu on the pinned instances", "[asymptotics]") {
    CHECK(mu_stat(test_support::make({2, 2}, {2, 2})) == Catch::Approx(2.0 / 3.0));
    CHECK(mu_stat(test_support::make({3, 2}, {1, 1, 1, 1, 1})) == 0.0);  // c1 = 1
    CHECK(mu_stat(test_support::make({2}, {2})) == Catch::Approx(1.0));
}

TEST_CASE("float mu matches exact-rational mu", "[asymptotics]") {
    rng gen(0x3a7);
    for (int trial = 0; trial < 50; ++trial) {
        const margins m = test_support::random_sum_matched(gen, 6, 60);
        const double exact = static_cast<double>(mu_stat_exact(m));
        CHECK(mu_stat(m) == Catch::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("condition1_stat on the pinned instances", "[asymptotics]") {
    CHECK(condition1_stat(test_support::make({2, 2}, {2, 2})) == Catch::Approx(1.0));
    CHECK(condition1_stat(test_support::make({3, 2}, {1, 1, 1, 1, 1})) == 0.0);
    // c = (2,1,...,1): the statistic is at most 2 regardless of r
    rng gen(0x51a7);
    for (int trial = 0; trial < 30; ++trial) {
        margins base = test_support::random_sum_matched(gen, 5, 14);
        std::vector<std::uint32_t> c(base.total() - 2, 1);
        c.insert(c.begin(), 2);
        const margins m(std::vector<std::uint32_t>(base.rows()), std::move(c));
        CHECK(condition1_stat(m) <= 2.0);
    }
}

TEST_CASE("condition1 and mu are algebraically linked", "[asymptotics]") {
    rng gen(0x111c);
    for (int trial = 0; trial < 60; ++trial) {
        const margins m = test_support::random_sum_matched(gen, 6, 40);
        const double N = static_cast<double>(m.total());
        if (m.total() < 2) continue;
        const double lhs = condition1_stat(m);
        const double rhs = 2.0 * mu_stat(m) * (N * (N - 1)) / (N * N);
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("split diagnostics on r=c=(2,2)", "[asymptotics]") {
    const margins m = test_support::make({2, 2}, {2, 2});

    // eps = 0.9: threshold 3.6, max (r_i-1)(c_j-1) = 1, so I_L is empty
    const auto hi = split_diagnostics(m, 0.9);
    CHECK(hi.large_set_size == 0);
    CHECK(hi.gamma == 0.0);
    CHECK(hi.mu == Catch::Approx(2.0 / 3.0));
    // lambda carries the N^2 denominator: 16 / (2 * 16)
    CHECK(hi.lambda == Catch::Approx(0.5));

    // eps = 0.1: threshold 0.4, every entry qualifies
    const auto lo = split_diagnostics(m, 0.1);
    CHECK(lo.large_set_size == 4);
    CHECK(lo.lambda == 0.0);
    CHECK(lo.gamma == Catch::Approx(4.0));
    CHECK(lo.entries().size() == 4);
}

TEST_CASE("c1 = 1 leaves I_L empty at any eps", "[asymptotics]") {
    const margins m = test_support::make({3, 2}, {1, 1, 1, 1, 1});
    for (const double eps : {0.01, 0.1, 0.5, 0.99}) {
        const auto d = split_diagnostics(m, eps);
        CHECK(d.large_set_size == 0);
        CHECK(d.lambda == 0.0);  // no entry has c_j >= 2
    }
}

TEST_CASE("split partition is consistent with mu", "[asymptotics]") {
    rng gen(0x5517);
    for (int trial = 0; trial < 60; ++trial) {
        const margins m = test_support::random_sum_matched(gen, 6, 60);
        if (m.total() < 2) continue;
        const double N = static_cast<double>(m.total());
        for (const double eps : {0.05, 0.2, 0.7}) {
            const auto d = split_diagnostics(m, eps);
            // mu = (I_L part in falling-factorial form) + lambda * N^2 / N(N-1)
            const double recombined = d.mu_large + d.lambda * (N * N) / (N * (N - 1));
            CHECK(d.mu == Catch::Approx(recombined).epsilon(1e-9));
            // staircase: row extents non-increasing
            for (std::size_t i = 1; i < d.row_extent.size(); ++i)
                CHECK(d.row_extent[i] <= d.row_extent[i - 1]);
            if (d.large_set_size > 0)
                CHECK(d.gamma >= static_cast<double>(d.large_set_size) * eps * (1 - 1e-12));
        }
    }
}

TEST_CASE("expression parser evaluates family formulas", "[asymptotics]") {
    expression::env env;
    env.i = 3;
    env.N = 100;
    CHECK(expression::parse("N - floor(sqrt(N))").eval(env) == 90.0);
    CHECK(expression::parse("floor(N / pow(2, i))").eval(env) == 12.0);
    CHECK(expression::parse("min(i, 2) + max(i, 4)").eval(env) == 6.0);
    CHECK(expression::parse("-i + 2 * (N - 98)").eval(env) == 1.0);
    CHECK(expression::parse("log2(8)").eval(env) == 3.0);
    CHECK_THROWS_AS(expression::parse("2 +"), parse_error);
    CHECK_THROWS_AS(expression::parse("foo(2)").eval(env), parse_error);
    CHECK_THROWS_AS(expression::parse("x + 1").eval(env), parse_error);
    CHECK_THROWS_AS(expression::parse("pow(2)").eval(env), parse_error);
}

TEST_CASE("built-in families generate valid margins with total N", "[asymptotics]") {
    for (const auto& name : builtin_family_names()) {
        const auto fam = builtin_family(name);
        for (const std::uint64_t N : {100ull, 1000ull, 31623ull}) {
            const margins m = fam.generate(N);
            CHECK(m.total() == N);
        }
    }
    CHECK_THROWS_AS(builtin_family("nope"), validation_error);
}

TEST_CASE("JSON family definitions drive the generator", "[asymptotics]") {
    const std::string spec = R"json({
        "name": "one-big-row",
        "monotone": true,
        "rows": [ {"expr": "N - floor(sqrt(N))", "count": "1"} ],
        "cols": [ {"expr": "2", "count": "1"} ],
        "pad": "unit"
    })json";
    const auto fam = load_family(spec);
    CHECK(fam.name == "one-big-row");
    CHECK(fam.monotone);
    const margins m = fam.generate(10000);
    CHECK(m.total() == 10000);
    CHECK(m.rows()[0] == 9900);
    CHECK(m.cols()[0] == 2);
    CHECK(m.cols()[1] == 1);

    // same family as the remark4 built-in
    const auto rep = evaluate_family(fam);
    CHECK(rep.overall == overall_verdict::not_optimal);

    CHECK_THROWS_AS(load_family("{"), parse_error);
    CHECK_THROWS_AS(load_family(R"({"rows": []})"), parse_error);
    const auto overshoot = load_family(
        R"({"rows":[{"expr":"N","count":"2"}],"cols":[{"expr":"1","count":"N"}]})");
    CHECK_THROWS_AS(overshoot.generate(50), validation_error);
}

TEST_CASE("ground truth family verdicts", "[asymptotics]") {
    SECTION("all-unit margins are optimal") {
        const auto rep = evaluate_family(builtin_family("unit-margins"));
        CHECK(rep.cond1 == growth_verdict::bounded);
        CHECK(rep.cond2 == cond2_verdict::holds);
        CHECK(rep.remark2_shortcut);
        CHECK(rep.kappa == 1);
        CHECK(rep.overall == overall_verdict::optimal);
        for (const double v : rep.cond1_values) CHECK(v == 0.0);
    }
    SECTION("remark4: condition 1 holds, condition 2 fails") {
        const auto rep = evaluate_family(builtin_family("remark4"));
        CHECK(rep.cond1 == growth_verdict::bounded);
        CHECK(rep.kappa == 2);
        CHECK(rep.tail_class == limit_class::vanishes);
        CHECK(rep.c1_limit == 2.0);
        CHECK(rep.cond2 == cond2_verdict::violated);
        CHECK(rep.overall == overall_verdict::not_optimal);
    }
    SECTION("remark1: halving rows keep kappa out of reach") {
        const auto rep = evaluate_family(builtin_family("remark1"));
        CHECK(rep.cond1 == growth_verdict::bounded);
        CHECK((rep.kappa_beyond_cap || rep.kappa > 2));
        CHECK(rep.cond2 == cond2_verdict::holds);
        CHECK(rep.overall == overall_verdict::optimal);
    }
    SECTION("block-n23: condition 1 diverges") {
        const auto rep = evaluate_family(builtin_family("block-n23"));
        CHECK(rep.cond1 == growth_verdict::diverging);
        CHECK(rep.cond1_exponent > 1.0);  // true growth is N^(4/3)
        CHECK(rep.overall == overall_verdict::not_optimal);
        // r_1 = o(N) here, so condition 2 is not the reason
        CHECK(rep.cond2 == cond2_verdict::holds);
        CHECK(rep.remark2_shortcut);
    }
}

TEST_CASE("a column-heavy family is evaluated with roles swapped", "[asymptotics]") {
    // remark4 transposed: the big margin sits on the column side now
    const std::string spec = R"json({
        "name": "remark4-transposed",
        "monotone": true,
        "rows": [ {"expr": "2", "count": "1"} ],
        "cols": [ {"expr": "N - floor(sqrt(N))", "count": "1"} ],
        "pad": "unit"
    })json";
    const auto rep = evaluate_family(load_family(spec));
    CHECK(rep.role_swapped);
    CHECK(rep.kappa == 2);
    CHECK(rep.c1_limit == 2.0);
    CHECK(rep.cond2 == cond2_verdict::violated);
    CHECK(rep.overall == overall_verdict::not_optimal);
}

TEST_CASE("kappa estimate is non-increasing in theta", "[asymptotics]") {
    const auto fam = builtin_family("remark4");
    std::uint32_t prev_kappa = 0;
    bool prev_set = false;
    for (const double theta : {0.001, 0.005, 0.01, 0.05, 0.2}) {
        evaluate_options opt;
        opt.theta = theta;
        const auto rep = evaluate_family(fam, opt);
        const std::uint32_t k = rep.kappa_beyond_cap ? opt.index_cap + 1 : rep.kappa;
        if (prev_set) CHECK(k <= prev_kappa);
        prev_kappa = k;
        prev_set = true;
    }
}

TEST_CASE("grid preconditions are enforced", "[asymptotics]") {
    const auto fam = builtin_family("unit-margins");
    evaluate_options opt;
    opt.grid = {1000, 2000, 4000};
    CHECK_THROWS_AS(evaluate_family(fam, opt), validation_error);  // three points
    opt.grid = {1000, 2000, 4000, 8000};
    CHECK_THROWS_AS(evaluate_family(fam, opt), validation_error);  // < two decades
    opt.grid = {1000, 2000, 50000, 100000};
    CHECK(evaluate_family(fam, opt).overall == overall_verdict::optimal);
}
