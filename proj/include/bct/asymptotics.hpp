#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bct/errors.hpp"
#include "bct/families.hpp"
#include "bct/margins.hpp"
#include "bct/numeric.hpp"

namespace bct {

// mu(N) = sum_{i,j} r_i(r_i-1) c_j(c_j-1) / (2 N(N-1)), the expected number
// of matched double edges. The double sum factorizes into two exactly-summed
// integer passes; only the final product is floating point.
inline double mu_stat(const margins& m) {
    const std::uint64_t N = m.total();
    if (N < 2) return 0.0;
    const std::uint64_t sr = sum_second_falling(m.rows());
    const std::uint64_t sc = sum_second_falling(m.cols());
    return static_cast<double>(sr) * static_cast<double>(sc) /
           (2.0 * static_cast<double>(N) * static_cast<double>(N - 1));
}

// exact-rational mu for small instances (cross-checks the float path)
inline big_rat mu_stat_exact(const margins& m) {
    const std::uint64_t N = m.total();
    if (N < 2) return big_rat(0);
    return big_rat(big_int(sum_second_falling(m.rows())) * sum_second_falling(m.cols()),
                   big_int(2) * N * (N - 1));
}

// Condition 1's statistic, sum_{i,j} r_i(r_i-1) c_j(c_j-1) / N^2; the input
// sequence is optimal only if this stays O(1) along the family.
inline double condition1_stat(const margins& m) {
    const std::uint64_t N = m.total();
    const std::uint64_t sr = sum_second_falling(m.rows());
    const std::uint64_t sc = sum_second_falling(m.cols());
    return static_cast<double>(sr) * static_cast<double>(sc) /
           (static_cast<double>(N) * static_cast<double>(N));
}

// Partition of the index set into I_L = {(i,j) : (r_i-1)(c_j-1) >= eps N}
// and its complement, with the associated mass statistics. Sortedness makes
// I_L a staircase: it is stored as per-row column extents.
struct split_diagnostics_result {
    double epsilon = 0.0;
    std::vector<std::uint32_t> row_extent;  // row i covers columns [0, row_extent[i])
    std::uint64_t large_set_size = 0;
    double gamma = 0.0;    // sum_{I_L} r_i c_j / N
    double lambda = 0.0;   // sum_{I_S} r_i(r_i-1) c_j(c_j-1) / (2 N^2)
    double mu = 0.0;       // over the whole index set, falling-factorial form
    double mu_large = 0.0; // I_L contribution to mu

    // materialized (i,j) list, small cases only
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries() const {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
        out.reserve(large_set_size);
        for (std::uint32_t i = 0; i < row_extent.size(); ++i)
            for (std::uint32_t j = 0; j < row_extent[i]; ++j) out.emplace_back(i, j);
        return out;
    }
};

inline split_diagnostics_result split_diagnostics(const margins& m, double epsilon) {
    if (!(epsilon > 0.0)) throw validation_error("split_diagnostics: epsilon must be > 0");
    const auto& r = m.rows();
    const auto& c = m.cols();
    const std::uint64_t N = m.total();
    const double threshold = epsilon * static_cast<double>(N);

    // prefix sums over columns of c_j and c_j(c_j-1)
    std::vector<std::uint64_t> cpre(c.size() + 1, 0), c2pre(c.size() + 1, 0);
    for (std::size_t j = 0; j < c.size(); ++j) {
        cpre[j + 1] = cpre[j] + c[j];
        c2pre[j + 1] = c2pre[j] + static_cast<std::uint64_t>(c[j]) * (c[j] - 1);
    }

    split_diagnostics_result out;
    out.epsilon = epsilon;
    out.mu = mu_stat(m);

    double gamma = 0.0, large_ff = 0.0;  // large_ff = sum_{I_L} r_i(r_i-1) c_j(c_j-1)
    std::size_t extent = c.size();
    for (std::size_t i = 0; i < r.size() && extent > 0; ++i) {
        const std::uint64_t ri1 = static_cast<std::uint64_t>(r[i]) - 1;
        while (extent > 0 &&
               static_cast<double>(ri1 * (static_cast<std::uint64_t>(c[extent - 1]) - 1)) <
                   threshold)
            --extent;
        if (extent == 0) break;
        // staircase: extents are non-increasing in i by sortedness
        assert(out.row_extent.empty() || extent <= out.row_extent.back());
        out.row_extent.push_back(static_cast<std::uint32_t>(extent));
        out.large_set_size += extent;
        gamma += static_cast<double>(r[i]) * static_cast<double>(cpre[extent]);
        large_ff += static_cast<double>(static_cast<std::uint64_t>(r[i]) * ri1) *
                    static_cast<double>(c2pre[extent]);
    }
    out.gamma = gamma / static_cast<double>(N);

    const double sr = static_cast<double>(sum_second_falling(r));
    const double sc = static_cast<double>(sum_second_falling(c));
    const double NN = static_cast<double>(N) * static_cast<double>(N);
    out.lambda = (sr * sc - large_ff) / (2.0 * NN);
    if (N >= 2)
        out.mu_large = large_ff / (2.0 * static_cast<double>(N) * static_cast<double>(N - 1));

    // paper's inequality chain: every member of I_L has r_i c_j / N >= eps
    assert(out.large_set_size == 0 ||
           out.gamma >= static_cast<double>(out.large_set_size) * epsilon * (1.0 - 1e-12));
    return out;
}

// ---------------------------------------------------------------------------
// Condition evaluation over a parametrized family.
// Asymptotic verdicts from finitely many N are heuristic by nature; every
// verdict ships with the per-grid-point evidence so a human can override.

enum class growth_verdict { bounded, diverging, inconclusive };
enum class limit_class { vanishes, bounded_below, inconclusive };
enum class cond2_verdict { holds, violated, inconclusive };
enum class overall_verdict { optimal, not_optimal, inconclusive };

inline const char* to_string(growth_verdict v) {
    switch (v) {
        case growth_verdict::bounded: return "bounded";
        case growth_verdict::diverging: return "diverging";
        default: return "inconclusive";
    }
}
inline const char* to_string(limit_class v) {
    switch (v) {
        case limit_class::vanishes: return "o(N)";
        case limit_class::bounded_below: return "Omega(N)";
        default: return "inconclusive";
    }
}
inline const char* to_string(cond2_verdict v) {
    switch (v) {
        case cond2_verdict::holds: return "holds";
        case cond2_verdict::violated: return "violated";
        default: return "inconclusive";
    }
}
inline const char* to_string(overall_verdict v) {
    switch (v) {
        case overall_verdict::optimal: return "optimal";
        case overall_verdict::not_optimal: return "not-optimal";
        default: return "inconclusive";
    }
}

struct evaluate_options {
    std::vector<std::uint64_t> grid;   // empty = default 1e3..1e7, 9 points
    double theta = 0.01;               // o(N)-vs-Omega(N) ratio threshold
    double growth_tol = 0.1;           // condition-1 exponent tolerance
    double slope_tol = 0.05;           // minimum decay slope to call a ratio vanishing
    std::uint32_t index_cap = 64;      // per-index classification stops here
};

inline std::vector<std::uint64_t> default_grid() {
    std::vector<std::uint64_t> g;
    for (int half = 6; half <= 14; ++half)
        g.push_back(static_cast<std::uint64_t>(std::llround(std::pow(10.0, half / 2.0))));
    return g;
}

struct condition_report {
    std::string family;
    std::vector<std::uint64_t> grid;

    std::vector<double> cond1_values;   // condition1_stat per grid point
    double cond1_exponent = 0.0;        // fitted growth exponent
    growth_verdict cond1 = growth_verdict::inconclusive;

    std::vector<limit_class> index_class;  // per row index, 1-based index i -> [i-1]
    std::uint32_t kappa = 0;               // first o(N) row index (1-based); 0 = beyond cap
    bool kappa_beyond_cap = false;
    bool kappa_uncertain = false;          // some earlier index was inconclusive

    std::vector<double> tail_mass;      // sum_{i >= kappa} r_i / N per grid point
    double tail_limsup = 0.0;
    limit_class tail_class = limit_class::inconclusive;

    std::vector<std::uint32_t> c1_values;
    double c1_limit = 0.0;              // limsup estimate of c_1

    std::uint32_t kappa_prime = 0;      // aux: first j with limsup c_j <= 1; 0 = beyond cap
    bool remark2_shortcut = false;      // cond2 settled by r_1 = o(N)
    bool role_swapped = false;          // rows/columns exchanged to restore r_1 >= c_1

    cond2_verdict cond2 = cond2_verdict::inconclusive;
    overall_verdict overall = overall_verdict::inconclusive;
};

namespace detail {

// least-squares slope of log y against log N over the positive entries
inline double loglog_slope(const std::vector<std::uint64_t>& grid,
                           const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(y[k] > 0)) continue;
        const double x = std::log(static_cast<double>(grid[k]));
        const double ly = std::log(y[k]);
        sx += x;
        sy += ly;
        sxx += x * x;
        sxy += x * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    const double denom = n * sxx - sx * sx;
    return denom == 0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

// a series oscillates when it swings both ways by more than half its local
// scale; growth or decay alone does not count
inline bool oscillates(const std::vector<double>& y) {
    bool up = false, down = false;
    for (std::size_t k = 0; k + 1 < y.size(); ++k) {
        const double hi = std::max(y[k], y[k + 1]);
        if (hi <= 0) continue;
        const double rel = (y[k + 1] - y[k]) / hi;
        if (rel > 0.5) up = true;
        if (rel < -0.5) down = true;
    }
    return up && down;
}

// classify the limit of a nonnegative ratio series: below theta and decaying
// -> vanishes; never below theta -> bounded below; otherwise undecidable
// from this grid
inline limit_class classify_ratio(const std::vector<std::uint64_t>& grid,
                                  const std::vector<double>& y, double theta,
                                  double slope_tol) {
    const bool all_zero = std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; });
    if (all_zero) return limit_class::vanishes;
    if (y.back() < theta) {
        if (y.back() == 0.0) return limit_class::vanishes;
        if (loglog_slope(grid, y) <= -slope_tol) return limit_class::vanishes;
        return limit_class::inconclusive;
    }
    if (*std::min_element(y.begin(), y.end()) >= theta) return limit_class::bounded_below;
    return limit_class::inconclusive;
}

}  // namespace detail

// Evaluates Theorem-style optimality of a family on a finite grid of N
// values: condition 1 via the fitted growth exponent of condition1_stat, and
// condition 2 via per-index classification of r_i(N)/N (kappa), the tail mass
// beyond kappa, and the limsup of c_1. Monotone families use the
// single-sequence form of condition 2; otherwise oscillating evidence
// downgrades the verdict to inconclusive.
inline condition_report evaluate_family(const sequence_family& f,
                                        const evaluate_options& opt = {}) {
    condition_report rep;
    rep.family = f.name;
    rep.grid = opt.grid.empty() ? default_grid() : opt.grid;
    std::sort(rep.grid.begin(), rep.grid.end());
    rep.grid.erase(std::unique(rep.grid.begin(), rep.grid.end()), rep.grid.end());
    const auto& grid = rep.grid;
    if (grid.size() < 4)
        throw validation_error("evaluate_family: grid needs at least 4 distinct points");
    if (grid.back() < grid.front() * 100)
        throw validation_error("evaluate_family: grid must span at least two decades");

    const std::uint32_t cap = opt.index_cap;
    const std::size_t K = grid.size();

    // kappa lives on the side with the larger first entry (the paper's
    // "without loss of generality r_1 >= c_1"); when the columns win at the
    // largest N, roles are exchanged for the whole evaluation and the swap is
    // recorded. Every other statistic here is symmetric in r and c.
    {
        const margins probe = f.generate(grid.back());
        rep.role_swapped = probe.cols()[0] > probe.rows()[0];
    }

    // per grid point: head of r (cap entries), head of c, total, cond1 stat
    std::vector<std::vector<std::uint64_t>> r_head(K), c_head(K);
    rep.cond1_values.resize(K);
    rep.c1_values.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const margins mk = f.generate(grid[k]);
        rep.cond1_values[k] = condition1_stat(mk);
        const auto& row_side = rep.role_swapped ? mk.cols() : mk.rows();
        const auto& col_side = rep.role_swapped ? mk.rows() : mk.cols();
        rep.c1_values[k] = col_side[0];
        auto take_head = [cap](const std::vector<std::uint32_t>& v) {
            std::vector<std::uint64_t> head(cap, 0);
            for (std::uint32_t t = 0; t < cap && t < v.size(); ++t) head[t] = v[t];
            return head;
        };
        r_head[k] = take_head(row_side);
        c_head[k] = take_head(col_side);
    }

    // condition 1: growth exponent of the statistic
    rep.cond1_exponent = detail::loglog_slope(grid, rep.cond1_values);
    if (detail::oscillates(rep.cond1_values))
        rep.cond1 = growth_verdict::inconclusive;
    else
        rep.cond1 = rep.cond1_exponent <= opt.growth_tol ? growth_verdict::bounded
                                                         : growth_verdict::diverging;

    // per-index classification of r_i(N)/N
    rep.index_class.resize(cap, limit_class::inconclusive);
    std::vector<double> ratio(K);
    for (std::uint32_t i = 0; i < cap; ++i) {
        for (std::size_t k = 0; k < K; ++k)
            ratio[k] = static_cast<double>(r_head[k][i]) / static_cast<double>(grid[k]);
        rep.index_class[i] = detail::classify_ratio(grid, ratio, opt.theta, opt.slope_tol);
    }
    for (std::uint32_t i = 0; i < cap && rep.kappa == 0; ++i) {
        if (rep.index_class[i] == limit_class::vanishes)
            rep.kappa = i + 1;
        else if (rep.index_class[i] == limit_class::inconclusive)
            rep.kappa_uncertain = true;
    }
    rep.kappa_beyond_cap = (rep.kappa == 0);

    // tail mass beyond kappa; by convention zero when kappa is unbounded
    rep.tail_mass.assign(K, 0.0);
    if (!rep.kappa_beyond_cap) {
        for (std::size_t k = 0; k < K; ++k) {
            std::uint64_t head_sum = 0;
            for (std::uint32_t i = 0; i + 1 < rep.kappa; ++i) head_sum += r_head[k][i];
            rep.tail_mass[k] = static_cast<double>(grid[k] - std::min(head_sum, grid[k])) /
                               static_cast<double>(grid[k]);
        }
    }
    // limsup estimates: max over the later half of the grid
    const std::size_t half = K / 2;
    for (std::size_t k = half; k < K; ++k) {
        rep.tail_limsup = std::max(rep.tail_limsup, rep.tail_mass[k]);
        rep.c1_limit = std::max(rep.c1_limit, static_cast<double>(rep.c1_values[k]));
    }
    rep.tail_class = rep.kappa_beyond_cap
                         ? limit_class::vanishes
                         : detail::classify_ratio(grid, rep.tail_mass, opt.theta, opt.slope_tol);

    // aux: kappa' = first column index whose limsup is <= 1
    for (std::uint32_t jidx = 0; jidx < cap && rep.kappa_prime == 0; ++jidx) {
        std::uint64_t sup = 0;
        for (std::size_t k = half; k < K; ++k) sup = std::max(sup, c_head[k][jidx]);
        if (sup <= 1) rep.kappa_prime = jidx + 1;
    }

    // condition 2: the r_1 = o(N) shortcut settles it outright
    if (rep.kappa == 1) {
        rep.remark2_shortcut = true;
        rep.cond2 = cond2_verdict::holds;
    } else {
        std::vector<double> c1_as_double(rep.c1_values.begin(), rep.c1_values.end());
        const bool shaky = !f.monotone && (detail::oscillates(rep.tail_mass) ||
                                           detail::oscillates(c1_as_double));
        const bool c1_below_kappa =
            rep.kappa_beyond_cap || rep.c1_limit < static_cast<double>(rep.kappa);
        if (shaky)
            rep.cond2 = cond2_verdict::inconclusive;
        else if (rep.tail_class == limit_class::bounded_below || rep.tail_limsup >= opt.theta ||
                 c1_below_kappa)
            rep.cond2 = cond2_verdict::holds;
        else if (rep.tail_class == limit_class::vanishes && !c1_below_kappa &&
                 !rep.kappa_uncertain)
            rep.cond2 = cond2_verdict::violated;
        else
            rep.cond2 = cond2_verdict::inconclusive;
    }

    if (rep.cond1 == growth_verdict::diverging || rep.cond2 == cond2_verdict::violated)
        rep.overall = overall_verdict::not_optimal;
    else if (rep.cond1 == growth_verdict::bounded && rep.cond2 == cond2_verdict::holds)
        rep.overall = overall_verdict::optimal;
    else
        rep.overall = overall_verdict::inconclusive;
    return rep;
}

}  // namespace bct
