#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <string>
#include <unordered_map>
#include <vector>

#include "bct/errors.hpp"
#include "bct/margins.hpp"
#include "bct/numeric.hpp"

namespace bct {

struct exact_count_result {
    big_int count;          // |Omega_{r,c}|
    big_rat acceptance;     // Pr[T in Omega] = count * prod r_i! c_j! / N!
    std::uint64_t dp_states = 0;
};

namespace detail {

// residual row sums canonicalized as (value, multiplicity) pairs, value
// descending, zeros dropped; the count depends only on this multiset
using residual_groups = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

inline std::string encode_groups(const residual_groups& g) {
    std::string key;
    key.reserve(g.size() * 8);
    for (const auto& [v, mult] : g) {
        char buf[8];
        std::memcpy(buf, &v, 4);
        std::memcpy(buf + 4, &mult, 4);
        key.append(buf, 8);
    }
    return key;
}

class count_dp {
public:
    count_dp(const std::vector<std::uint32_t>& cols, std::uint64_t budget)
        : cols_(cols), budget_(budget) {}

    big_int run(const residual_groups& start) { return place_column(start, 0); }

    std::uint64_t states() const { return memo_.size(); }

private:
    big_int place_column(const residual_groups& groups, std::size_t col) {
        if (col == cols_.size()) {
            return groups.empty() ? big_int(1) : big_int(0);
        }
        // a row needing more ones than there are columns left can never finish
        const std::uint32_t cols_left = static_cast<std::uint32_t>(cols_.size() - col);
        if (!groups.empty() && groups.front().first > cols_left) return 0;

        const std::string key = encode_groups(groups);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (memo_.size() >= budget_)
            throw budget_exceeded_error("exact_count: state budget exceeded", memo_.size());

        big_int total = 0;
        std::vector<std::uint32_t> pick(groups.size(), 0);
        choose(groups, col, 0, cols_[col], big_int(1), pick, total);
        memo_.emplace(std::move(key), total);
        return total;
    }

    // distribute `left` ones over groups g.., multiplying the multinomial
    // choice counts; then recurse into the next column with the new residuals
    void choose(const residual_groups& groups, std::size_t col, std::size_t g,
                std::uint32_t left, big_int ways, std::vector<std::uint32_t>& pick,
                big_int& total) {
        if (g == groups.size()) {
            if (left != 0) return;
            residual_groups next;
            next.reserve(groups.size() * 2);
            for (std::size_t t = 0; t < groups.size(); ++t) {
                const auto [v, mult] = groups[t];
                if (mult - pick[t] > 0) next.emplace_back(v, mult - pick[t]);
                if (pick[t] > 0 && v > 1) next.emplace_back(v - 1, pick[t]);
            }
            normalize(next);
            total += ways * place_column(next, col + 1);
            return;
        }
        const std::uint32_t cap = std::min(left, groups[g].second);
        for (std::uint32_t k = 0; k <= cap; ++k) {
            pick[g] = k;
            choose(groups, col, g + 1, left - k, ways * binomial(groups[g].second, k), pick,
                   total);
        }
        pick[g] = 0;
    }

    static void normalize(residual_groups& g) {
        std::sort(g.begin(), g.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        residual_groups merged;
        for (const auto& [v, mult] : g) {
            if (!merged.empty() && merged.back().first == v)
                merged.back().second += mult;
            else
                merged.emplace_back(v, mult);
        }
        g = std::move(merged);
    }

    const std::vector<std::uint32_t>& cols_;
    std::uint64_t budget_;
    std::unordered_map<std::string, big_int> memo_;
};

inline residual_groups groups_from_rows(const std::vector<std::uint32_t>& rows) {
    residual_groups g;
    for (auto v : rows) {
        if (!g.empty() && g.back().first == v)
            ++g.back().second;
        else
            g.emplace_back(v, 1);
    }
    return g;
}

}  // namespace detail

inline big_rat acceptance_from_count(const margins& m, const big_int& count) {
    big_int prod = 1;
    for (auto x : m.rows()) prod *= factorial(x);
    for (auto x : m.cols()) prod *= factorial(x);
    return big_rat(count * prod, factorial(m.total()));
}

// Exact |Omega_{r,c}| by column-by-column dynamic programming over the
// multiset of residual row sums. Big-integer arithmetic throughout; fails
// loudly (budget_exceeded_error) instead of approximating when the memo
// passes `budget` states.
inline exact_count_result exact_count(const margins& m, std::uint64_t budget = 10'000'000) {
    detail::count_dp dp(m.cols(), budget);
    exact_count_result res;
    res.count = dp.run(detail::groups_from_rows(m.rows()));
    res.dp_states = dp.states();
    res.acceptance = acceptance_from_count(m, res.count);
    return res;
}

// Pr[T in Omega] as an exact rational via the counting identity
// |Omega| * prod r_i! c_j!  =  Pr[T in Omega] * N!.
inline big_rat exact_acceptance_probability(const margins& m,
                                            std::uint64_t budget = 10'000'000) {
    return exact_count(m, budget).acceptance;
}

// Independent cross-check of the identity: walk all N! token matchings,
// build each table, count the binary ones. Exact rational, no shared code
// with the DP route. Guarded to N <= 9.
inline big_rat enumerate_matchings(const margins& m) {
    const std::uint64_t N = m.total();
    if (N > 9) throw instance_too_large_error("enumerate_matchings: N must be <= 9");

    std::vector<std::uint8_t> row_of, col_of;
    for (std::uint8_t i = 0; i < m.m(); ++i)
        row_of.insert(row_of.end(), m.rows()[i], i);
    for (std::uint8_t j = 0; j < m.n(); ++j)
        col_of.insert(col_of.end(), m.cols()[j], j);

    std::vector<std::uint8_t> perm(N);
    for (std::uint64_t k = 0; k < N; ++k) perm[k] = static_cast<std::uint8_t>(k);

    std::uint64_t binary = 0;
    std::vector<std::uint8_t> cell(m.m() * m.n());
    do {
        std::fill(cell.begin(), cell.end(), 0);
        bool ok = true;
        for (std::uint64_t k = 0; k < N && ok; ++k)
            ok = ++cell[row_of[k] * m.n() + col_of[perm[k]]] <= 1;
        binary += ok;
    } while (std::next_permutation(perm.begin(), perm.end()));

    return big_rat(big_int(binary), factorial(N));
}

// Every table in Omega_{r,c}, row-major 0/1 entries, in lexicographic order
// of row subsets. Caps at `limit` tables (instance_too_large_error beyond).
inline std::vector<std::vector<std::uint8_t>> enumerate_tables(const margins& m,
                                                               std::uint64_t limit = 100'000) {
    const std::size_t mm = m.m(), nn = m.n();
    std::vector<std::vector<std::uint8_t>> out;
    std::vector<std::uint32_t> residual(m.cols().begin(), m.cols().end());
    std::vector<std::uint8_t> flat(mm * nn, 0);

    // choose the column subset of each row in turn; prune when some residual
    // exceeds the number of rows still to come
    auto feasible_tail = [&](std::size_t next_row) {
        const std::uint32_t rows_left = static_cast<std::uint32_t>(mm - next_row);
        for (auto v : residual)
            if (v > rows_left) return false;
        return true;
    };

    std::vector<std::size_t> chosen;
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == mm) {
            for (auto v : residual)
                if (v != 0) return;
            if (out.size() >= limit)
                throw instance_too_large_error("enumerate_tables: more than limit tables");
            out.push_back(flat);
            return;
        }
        const std::uint32_t need = m.rows()[i];
        chosen.clear();
        auto pick = [&](auto&& inner, std::size_t from, std::uint32_t left) -> void {
            if (left == 0) {
                if (!feasible_tail(i + 1)) return;
                self(self, i + 1);
                return;
            }
            if (nn - from < left) return;
            for (std::size_t j = from; j + left <= nn; ++j) {
                if (residual[j] == 0) continue;
                --residual[j];
                flat[i * nn + j] = 1;
                inner(inner, j + 1, left - 1);
                flat[i * nn + j] = 0;
                ++residual[j];
            }
        };
        pick(pick, 0, need);
    };
    rec(rec, 0);
    return out;
}

}  // namespace bct
