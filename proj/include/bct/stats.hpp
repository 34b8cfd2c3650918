#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "bct/errors.hpp"
#include "bct/margins.hpp"
#include "bct/oracle.hpp"
#include "bct/rng.hpp"
#include "bct/sampler.hpp"
#include "bct/statfun.hpp"

namespace bct {

// canonical binning key: row-major run-length encoding of the dense table
inline std::string rle_encode(const std::vector<std::uint32_t>& flat) {
    std::string out;
    std::size_t k = 0;
    while (k < flat.size()) {
        std::size_t run = 1;
        while (k + run < flat.size() && flat[k + run] == flat[k]) ++run;
        out += std::to_string(flat[k]) + "x" + std::to_string(run) + ";";
        k += run;
    }
    return out;
}

struct uniformity_result {
    std::uint64_t table_count = 0;        // |Omega|, exhaustively enumerated
    std::vector<std::uint64_t> observed;  // per-table frequencies
    double chi2 = 0.0;
    std::uint64_t dof = 0;
    double p_value = 1.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

// Chi-square goodness of fit of the rejection sampler against the uniform
// distribution on the enumerated Omega. Requires samples >= 10 |Omega| so
// expected bin counts are comfortably large. |Omega| = 1 degenerates to
// dof = 0 and trivially passes.
inline uniformity_result uniformity_test(const margins& m, std::uint64_t samples,
                                         std::uint64_t seed,
                                         std::uint64_t enumeration_limit = 100'000) {
    const auto tables = enumerate_tables(m, enumeration_limit);
    if (tables.empty())
        throw infeasible_margins_error("uniformity_test: Omega is empty for these margins");
    if (samples < 10 * tables.size())
        throw validation_error("uniformity_test: need at least 10 samples per table");

    std::unordered_map<std::string, std::size_t> bin_of;
    bin_of.reserve(tables.size());
    for (std::size_t t = 0; t < tables.size(); ++t) {
        std::vector<std::uint32_t> flat(tables[t].begin(), tables[t].end());
        bin_of.emplace(rle_encode(flat), t);
    }

    uniformity_result res;
    res.table_count = tables.size();
    res.observed.assign(tables.size(), 0);
    res.samples = samples;
    res.seed = seed;

    rng gen(seed);
    for (std::uint64_t s = 0; s < samples; ++s) {
        const auto draw = sample_binary_rejection(m, gen, /*max_attempts=*/1'000'000);
        if (!draw.table)
            throw acceptance_too_low_error("uniformity_test: rejection sampling exhausted",
                                           0.0, s);
        const auto it = bin_of.find(rle_encode(draw.table->dense()));
        if (it == bin_of.end())
            throw validation_error("uniformity_test: sampled a table outside enumerated Omega");
        ++res.observed[it->second];
    }

    res.dof = res.table_count - 1;
    const double expected = static_cast<double>(samples) / static_cast<double>(res.table_count);
    for (const auto obs : res.observed) {
        const double d = static_cast<double>(obs) - expected;
        res.chi2 += d * d / expected;
    }
    res.p_value = res.dof == 0 ? 1.0 : chi_square_tail(res.chi2, static_cast<double>(res.dof));
    return res;
}

// ---------------------------------------------------------------------------
// Bipartite graph predicates over a (multi)table. Rows are vertices
// 0..m-1, columns m..m+n-1; multiplicities collapse to single adjacencies,
// so a "degree" here counts distinct neighbors.

namespace detail {

class union_find {
public:
    explicit union_find(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
    }
    std::size_t component_size(std::size_t x) { return size_[find(x)]; }

private:
    std::vector<std::size_t> parent_, size_;
};

}  // namespace detail

enum class graph_property { connected, giant_component, max_degree_le_k };

inline graph_property parse_graph_property(const std::string& name) {
    if (name == "connected") return graph_property::connected;
    if (name == "has-giant-component") return graph_property::giant_component;
    if (name.rfind("max-degree-le-", 0) == 0) return graph_property::max_degree_le_k;
    throw validation_error("unknown graph property '" + name + "'");
}

inline bool evaluate_property(const contingency_table& t, graph_property prop,
                              std::uint32_t k = 0) {
    const std::size_t m = t.row_count(), n = t.col_count();
    switch (prop) {
        case graph_property::connected:
        case graph_property::giant_component: {
            detail::union_find uf(m + n);
            t.for_each_nonzero(
                [&](std::size_t i, std::size_t j, std::uint32_t) { uf.unite(i, m + j); });
            std::size_t largest = 0;
            for (std::size_t v = 0; v < m + n; ++v)
                largest = std::max(largest, uf.component_size(v));
            return prop == graph_property::connected ? largest == m + n
                                                     : 2 * largest >= m + n;
        }
        case graph_property::max_degree_le_k: {
            std::vector<std::uint32_t> row_deg(m, 0), col_deg(n, 0);
            bool ok = true;
            t.for_each_nonzero([&](std::size_t i, std::size_t j, std::uint32_t) {
                if (++row_deg[i] > k || ++col_deg[j] > k) ok = false;
            });
            return ok;
        }
    }
    return false;
}

struct property_transfer_result {
    double p_config = 0.0;   // p'(A): rate over all configuration draws
    double p_uniform = 0.0;  // p(A): rate over the accepted (binary) subset
    double rho = 0.0;        // empirical acceptance rate
    double bound_rhs = 0.0;  // 1 - (1 - p'(A)) / rho
    double se_combined = 0.0;
    bool bound_check = false;
    std::uint64_t samples = 0;
    std::uint64_t accepted = 0;
    std::uint64_t seed = 0;
};

// Empirical check of the contiguity bound p(A) >= 1 - (1 - p'(A)) / rho.
// One stream of configuration draws serves all three estimates: the accepted
// subset of the draws is itself a uniform sample from Omega, so when rho = 1
// the two empirical distributions are the same draws bit for bit. This is a
// demonstration with error bars (3 combined standard errors, delta method,
// covariances ignored), not a proof.
inline property_transfer_result property_transfer(const margins& m, graph_property prop,
                                                  std::uint64_t samples, std::uint64_t seed,
                                                  std::uint32_t k = 0) {
    if (samples == 0) throw validation_error("property_transfer: samples must be positive");
    if (!gale_ryser_feasible(m))
        throw infeasible_margins_error("property_transfer: Omega is empty for these margins");

    attempt_stream stream(m);
    rng gen(seed);
    std::uint64_t n_prop = 0, n_acc = 0, n_acc_prop = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        const bool binary = stream.draw(gen, /*early_exit=*/false);
        const bool has = evaluate_property(stream.table(), prop, k);
        n_prop += has;
        n_acc += binary;
        n_acc_prop += binary && has;
    }
    if (n_acc == 0)
        throw acceptance_too_low_error("property_transfer: no draw was accepted", 0.0, samples);

    property_transfer_result res;
    res.samples = samples;
    res.accepted = n_acc;
    res.seed = seed;
    const double n = static_cast<double>(samples);
    res.p_config = static_cast<double>(n_prop) / n;
    res.rho = static_cast<double>(n_acc) / n;
    res.p_uniform = static_cast<double>(n_acc_prop) / static_cast<double>(n_acc);
    res.bound_rhs = 1.0 - (1.0 - res.p_config) / res.rho;

    const double var_p = res.p_uniform * (1 - res.p_uniform) / static_cast<double>(n_acc);
    const double var_pc = res.p_config * (1 - res.p_config) / n;
    const double var_rho = res.rho * (1 - res.rho) / n;
    const double var_rhs = var_pc / (res.rho * res.rho) +
                           (1 - res.p_config) * (1 - res.p_config) * var_rho /
                               (res.rho * res.rho * res.rho * res.rho);
    res.se_combined = std::sqrt(var_p + var_rhs);
    res.bound_check = res.p_uniform >= res.bound_rhs - 3.0 * res.se_combined;
    return res;
}

}  // namespace bct
