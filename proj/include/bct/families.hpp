#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bct/errors.hpp"
#include "bct/expr.hpp"
#include "bct/margins.hpp"

namespace bct {

// A parametrized input sequence N -> margins, used to evaluate the asymptotic
// optimality conditions numerically. monotone means every r_i(N) and c_j(N)
// is non-decreasing in N, which licenses the simpler single-sequence form of
// condition 2 (no subsequence quantification).
struct sequence_family {
    std::string name;
    bool monotone = false;
    std::function<margins(std::uint64_t)> generate;
};

namespace detail {

inline void pad_with_units(std::vector<std::uint32_t>& v, std::uint64_t sum, std::uint64_t N,
                           const std::string& side) {
    if (sum > N)
        throw validation_error("family: " + side + " entries sum to " + std::to_string(sum) +
                               " > N = " + std::to_string(N));
    v.insert(v.end(), static_cast<std::size_t>(N - sum), 1u);
}

}  // namespace detail

inline const std::vector<std::string>& builtin_family_names() {
    static const std::vector<std::string> names = {"unit-margins", "remark1", "remark4",
                                                   "block-n23"};
    return names;
}

// Built-in families exercising the corners of the optimality conditions:
//   unit-margins  r = c = (1,...,1); every statistic vanishes.
//   remark1       r_i = floor(N/2^i) down to 1 plus unit padding; every row
//                 ratio stays bounded away from 0, so the first o(N) row
//                 index is unbounded.
//   remark4       r_1 = N - floor(sqrt(N)) with c_1 = 2: the double-edge
//                 statistic stays bounded yet sampling still degenerates.
//   block-n23     about N^(1/3) rows and columns of size floor(N^(2/3));
//                 the double-edge statistic grows like N^(4/3).
inline sequence_family builtin_family(const std::string& name) {
    sequence_family f;
    f.name = name;
    f.monotone = true;
    if (name == "unit-margins") {
        f.generate = [](std::uint64_t N) {
            std::vector<std::uint32_t> ones(static_cast<std::size_t>(N), 1u);
            return margins(ones, ones);
        };
    } else if (name == "remark1") {
        f.generate = [](std::uint64_t N) {
            if (N < 8) throw validation_error("family remark1: needs N >= 8");
            std::vector<std::uint32_t> r;
            std::uint64_t sum = 0;
            for (std::uint64_t i = 1; (N >> i) >= 1; ++i) {
                r.push_back(static_cast<std::uint32_t>(N >> i));
                sum += N >> i;
            }
            detail::pad_with_units(r, sum, N, "row");
            std::vector<std::uint32_t> c = {2, 2};
            detail::pad_with_units(c, 4, N, "column");
            return margins(std::move(r), std::move(c));
        };
    } else if (name == "remark4") {
        f.generate = [](std::uint64_t N) {
            if (N < 4) throw validation_error("family remark4: needs N >= 4");
            const std::uint64_t root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(N)));
            std::vector<std::uint32_t> r = {static_cast<std::uint32_t>(N - root)};
            detail::pad_with_units(r, N - root, N, "row");
            std::vector<std::uint32_t> c = {2};
            detail::pad_with_units(c, 2, N, "column");
            return margins(std::move(r), std::move(c));
        };
    } else if (name == "block-n23") {
        f.generate = [](std::uint64_t N) {
            if (N < 8) throw validation_error("family block-n23: needs N >= 8");
            const auto block = static_cast<std::uint64_t>(
                std::floor(std::pow(static_cast<double>(N), 2.0 / 3.0)));
            const std::uint64_t count = N / block;
            std::vector<std::uint32_t> v(static_cast<std::size_t>(count),
                                         static_cast<std::uint32_t>(block));
            detail::pad_with_units(v, count * block, N, "row");
            return margins(v, v);
        };
    } else {
        throw validation_error("unknown built-in family '" + name + "'");
    }
    return f;
}

// Table-driven family from a JSON definition:
//   { "name": "...", "monotone": true,
//     "rows": [ {"expr": "N - floor(sqrt(N))", "count": "1"},
//               {"expr": "1", "count": "floor(sqrt(N))"} ],
//     "cols": [ {"expr": "2", "count": "1"} ],
//     "pad": "unit" }
// Each block contributes floor(count) entries; inside a block the expression
// sees the global 1-based index as both i and j, plus N. With pad "unit" the
// vector is filled with ones up to total N; "none" requires an exact hit.
inline sequence_family load_family(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("family: invalid JSON: ") + e.what());
    }
    if (!j.contains("rows") || !j.contains("cols"))
        throw parse_error("family: JSON needs \"rows\" and \"cols\" arrays");

    struct block {
        expression value;
        expression count;
    };
    auto compile_side = [](const nlohmann::json& arr, const char* side) {
        std::vector<block> out;
        if (!arr.is_array() || arr.empty())
            throw parse_error(std::string("family: \"") + side + "\" must be a non-empty array");
        for (const auto& b : arr) {
            if (!b.contains("expr"))
                throw parse_error(std::string("family: every ") + side + " block needs \"expr\"");
            out.push_back({expression::parse(b["expr"].get<std::string>()),
                           expression::parse(b.value("count", std::string("1")))});
        }
        return out;
    };

    auto rows = compile_side(j["rows"], "rows");
    auto cols = compile_side(j["cols"], "cols");
    const std::string pad = j.value("pad", std::string("unit"));
    if (pad != "unit" && pad != "none")
        throw parse_error("family: pad must be \"unit\" or \"none\"");

    sequence_family f;
    f.name = j.value("name", std::string("custom"));
    f.monotone = j.value("monotone", false);
    f.generate = [rows, cols, pad](std::uint64_t N) {
        auto build = [&](const std::vector<block>& blocks, const std::string& side) {
            std::vector<std::uint32_t> v;
            std::uint64_t sum = 0, index = 1;
            for (const auto& b : blocks) {
                expression::env env;
                env.N = static_cast<double>(N);
                const double cnt = b.count.eval(env);
                if (!(cnt >= 0) || cnt > static_cast<double>(N))
                    throw validation_error("family: block count out of range at N = " +
                                           std::to_string(N));
                for (std::uint64_t t = 0; t < static_cast<std::uint64_t>(cnt); ++t, ++index) {
                    env.i = env.j = static_cast<double>(index);
                    const double val = std::floor(b.value.eval(env));
                    if (!(val >= 0))
                        throw validation_error("family: negative " + side + " entry at N = " +
                                               std::to_string(N));
                    if (val == 0) continue;  // conceptual zero entries are not stored
                    v.push_back(static_cast<std::uint32_t>(val));
                    sum += static_cast<std::uint64_t>(val);
                }
            }
            if (pad == "unit")
                detail::pad_with_units(v, sum, N, side);
            else if (sum != N)
                throw validation_error("family: " + side + " entries sum to " +
                                       std::to_string(sum) + " != N = " + std::to_string(N) +
                                       " and pad is \"none\"");
            return v;
        };
        return margins(build(rows, "row"), build(cols, "column"));
    };
    return f;
}

}  // namespace bct
