#pragma once

// Test-only helpers. brute_force_count is the independent ground-truth oracle
// for |Omega|: it scans every 0/1 matrix of the right shape and checks the
// margins directly, sharing no code path with the library's DP or the
// row-subset enumerator.

#include <cstdint>
#include <optional>
#include <vector>

#include "bct/margins.hpp"
#include "bct/rng.hpp"
#include "bct/sampler.hpp"

namespace test_support {

inline bct::margins make(std::vector<std::uint32_t> r, std::vector<std::uint32_t> c) {
    return bct::margins(std::move(r), std::move(c));
}

// every 0/1 matrix with the given shape, margin check per candidate
inline std::uint64_t brute_force_count(const bct::margins& m) {
    const std::size_t mm = m.m(), nn = m.n();
    if (mm * nn > 24) throw std::runtime_error("brute_force_count: matrix too large");
    std::uint64_t count = 0;
    for (std::uint64_t mask = 0; mask < (1ull << (mm * nn)); ++mask) {
        bool ok = true;
        for (std::size_t i = 0; i < mm && ok; ++i) {
            std::uint32_t s = 0;
            for (std::size_t j = 0; j < nn; ++j) s += (mask >> (i * nn + j)) & 1;
            ok = s == m.rows()[i];
        }
        for (std::size_t j = 0; j < nn && ok; ++j) {
            std::uint32_t s = 0;
            for (std::size_t i = 0; i < mm; ++i) s += (mask >> (i * nn + j)) & 1;
            ok = s == m.cols()[j];
        }
        count += ok;
    }
    return count;
}

// margins of a random 0/1 matrix: always feasible, covers assorted shapes
inline bct::margins random_feasible(bct::rng& gen, std::uint32_t max_m = 4,
                                    std::uint32_t max_n = 4) {
    for (;;) {
        const std::uint32_t mm = 1 + static_cast<std::uint32_t>(gen.below(max_m));
        const std::uint32_t nn = 1 + static_cast<std::uint32_t>(gen.below(max_n));
        std::vector<std::uint32_t> r(mm, 0), c(nn, 0);
        for (std::uint32_t i = 0; i < mm; ++i)
            for (std::uint32_t j = 0; j < nn; ++j)
                if (gen.next() & 1) {
                    ++r[i];
                    ++c[j];
                }
        std::erase(r, 0u);
        std::erase(c, 0u);
        if (r.empty()) continue;
        return bct::margins(std::move(r), std::move(c));
    }
}

// random sum-matched pair of vectors; feasibility not guaranteed
inline bct::margins random_sum_matched(bct::rng& gen, std::uint32_t max_parts = 5,
                                       std::uint32_t max_total = 14) {
    const std::uint32_t N = 2 + static_cast<std::uint32_t>(gen.below(max_total - 1));
    auto compose = [&](std::uint32_t parts) {
        std::vector<std::uint32_t> v(parts, 1);
        for (std::uint32_t unit = parts; unit < N; ++unit)
            ++v[gen.below(parts)];
        return v;
    };
    const std::uint32_t mm = 1 + static_cast<std::uint32_t>(gen.below(std::min(max_parts, N)));
    const std::uint32_t nn = 1 + static_cast<std::uint32_t>(gen.below(std::min(max_parts, N)));
    return bct::margins(compose(mm), compose(nn));
}

// Planted-bug sampler for the chi-square mutation test: same rejection loop,
// but the first type-1 token is never rematched, so every accepted table has
// T[0,0] >= 1 and the rest of Omega starves. A sound uniformity harness has
// to flag it.
inline bct::contingency_table biased_binary_sample(const bct::margins& m, bct::rng& gen) {
    const std::uint64_t N = m.total();
    std::vector<std::uint32_t> col_of;
    for (std::uint32_t j = 0; j < m.n(); ++j)
        col_of.insert(col_of.end(), m.cols()[j], j);
    std::vector<std::uint32_t> tok2(N);
    for (std::uint64_t k = 0; k < N; ++k) tok2[k] = static_cast<std::uint32_t>(k);
    std::vector<std::uint64_t> row_start(m.m() + 1, 0);
    for (std::size_t i = 0; i < m.m(); ++i) row_start[i + 1] = row_start[i] + m.rows()[i];

    for (;;) {
        for (std::uint64_t k = 1; k + 1 < N; ++k)  // slot 0 pinned: the bug
            std::swap(tok2[k], tok2[k + gen.below(N - k)]);
        bct::contingency_table t(m);
        bool binary = true;
        std::size_t row = 0;
        for (std::uint64_t k = 0; k < N; ++k) {
            while (k >= row_start[row + 1]) ++row;
            if (t.increment(row, col_of[tok2[k]]) >= 2) binary = false;
        }
        if (binary) return t;
    }
}

}  // namespace test_support
