#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "bct/errors.hpp"
#include "bct/margins.hpp"
#include "bct/numeric.hpp"
#include "bct/rng.hpp"
#include "bct/sampler.hpp"
#include "bct/statfun.hpp"

namespace bct {

struct count_estimate {
    double p_hat = 0.0;            // acceptance-rate point estimate
    double ci_low = 0.0;           // Wilson bounds on p at level 1 - delta
    double ci_high = 1.0;
    double log2_count = 0.0;       // log2 of p_hat * N! / prod r_i! c_j!
    std::optional<big_int> count_rounded;  // exact-rational reconstruction, N <= 20
    std::uint64_t samples_used = 0;
    std::uint64_t accepted = 0;
    double epsilon = 0.0;          // requested precision (0 when not requested)
    double delta = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

struct draw_tally {
    std::uint64_t samples = 0;
    std::uint64_t accepted = 0;
    std::uint64_t sum_f = 0;   // sum of double-edge counts F
    double sum_f2 = 0;         // sum of F^2
};

// Runs `samples` independent configuration draws split into fixed-size
// chunks. Chunk k draws from rng(child_seed(root, chunk_base + k)), and the
// merged tally is a sum over chunks, so the result depends only on
// (root seed, chunk_base, samples) — never on thread scheduling or count.
inline draw_tally tally_draws(const margins& m, std::uint64_t samples, std::uint64_t root_seed,
                              unsigned threads, bool need_double_edges,
                              std::uint64_t chunk_base = 0) {
    constexpr std::uint64_t chunk_size = 4096;
    const std::uint64_t chunks = (samples + chunk_size - 1) / chunk_size;
    std::vector<draw_tally> per_chunk(chunks);

    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::uint64_t k = next.fetch_add(1);
            if (k >= chunks) break;
            // stream state is per chunk, so a chunk's outcome depends only on
            // its child seed, not on which worker ran it
            attempt_stream stream(m);
            rng gen(child_seed(root_seed, chunk_base + k));
            draw_tally& t = per_chunk[k];
            const std::uint64_t batch = std::min(chunk_size, samples - k * chunk_size);
            for (std::uint64_t s = 0; s < batch; ++s) {
                const bool binary = stream.draw(gen, /*early_exit=*/!need_double_edges);
                ++t.samples;
                t.accepted += binary;
                if (need_double_edges) {
                    const std::uint64_t f = count_double_edges(stream.table());
                    t.sum_f += f;
                    t.sum_f2 += static_cast<double>(f) * static_cast<double>(f);
                }
            }
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    draw_tally total;
    for (const auto& t : per_chunk) {
        total.samples += t.samples;
        total.accepted += t.accepted;
        total.sum_f += t.sum_f;
        total.sum_f2 += t.sum_f2;
    }
    return total;
}

// log2( N! / prod r_i! c_j! ), the matching-to-table scale factor
inline double log2_count_scale(const margins& m) {
    constexpr double inv_ln2 = 1.4426950408889634;
    double s = std::lgamma(static_cast<double>(m.total()) + 1.0);
    for (auto x : m.rows()) s -= std::lgamma(static_cast<double>(x) + 1.0);
    for (auto x : m.cols()) s -= std::lgamma(static_cast<double>(x) + 1.0);
    return s * inv_ln2;
}

inline big_int round_to_int(const big_rat& q) {
    const big_int two_num = 2 * boost::multiprecision::numerator(q) +
                            boost::multiprecision::denominator(q);
    return two_num / (2 * boost::multiprecision::denominator(q));
}

inline void fill_count_fields(count_estimate& est, const margins& m) {
    if (est.accepted > 0)
        est.log2_count = std::log2(est.p_hat) + log2_count_scale(m);
    if (m.total() <= 20) {
        big_int scale = factorial(m.total());
        big_rat exact = big_rat(big_int(est.accepted), big_int(est.samples_used)) * scale;
        for (auto x : m.rows()) exact /= factorial(x);
        for (auto x : m.cols()) exact /= factorial(x);
        est.count_rounded = round_to_int(exact);
    }
}

}  // namespace detail

// Fixed-size Monte Carlo estimate of Pr[T in Omega]: the fraction of
// configuration draws that come out binary, with a Wilson interval at level
// 1 - delta. Deterministic for a fixed (seed, samples) pair.
inline count_estimate estimate_acceptance(const margins& m, std::uint64_t samples,
                                          std::uint64_t seed, double delta = 0.05,
                                          unsigned threads = 1) {
    if (samples == 0) throw validation_error("estimate_acceptance: samples must be positive");
    const auto tally = detail::tally_draws(m, samples, seed, threads, false);
    count_estimate est;
    est.samples_used = tally.samples;
    est.accepted = tally.accepted;
    est.p_hat = static_cast<double>(tally.accepted) / static_cast<double>(tally.samples);
    const auto ci = wilson_interval(tally.accepted, tally.samples, delta);
    est.ci_low = ci.low;
    est.ci_high = ci.high;
    est.delta = delta;
    est.seed = seed;
    detail::fill_count_fields(est, m);
    return est;
}

// Randomized approximation of |Omega_{r,c}|: sample in doubling batches until
// the accepted count reaches ceil(3 ln(2/delta) / epsilon^2), at which point
// the multiplicative Chernoff bound gives relative error <= epsilon with
// probability >= 1 - delta. The sequential rule self-tunes to the unknown
// acceptance rate and fails loudly (acceptance_too_low_error) at the sample
// cap instead of degrading silently.
inline count_estimate estimate_count(const margins& m, double epsilon, double delta,
                                     std::uint64_t seed, unsigned threads = 1,
                                     std::uint64_t sample_cap = 10'000'000) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw validation_error("estimate_count: epsilon must be in (0,1)");
    if (!(delta > 0.0 && delta < 1.0))
        throw validation_error("estimate_count: delta must be in (0,1)");
    if (!gale_ryser_feasible(m))
        throw infeasible_margins_error("estimate_count: Omega is empty for these margins");

    const std::uint64_t target =
        static_cast<std::uint64_t>(std::ceil(3.0 * std::log(2.0 / delta) / (epsilon * epsilon)));

    constexpr std::uint64_t chunk_size = 4096;
    std::uint64_t chunk_base = 0;
    std::uint64_t batch = 1024;
    detail::draw_tally total;
    while (total.accepted < target && total.samples < sample_cap) {
        const std::uint64_t this_batch = std::min(batch, sample_cap - total.samples);
        const auto t = detail::tally_draws(m, this_batch, seed, threads, false, chunk_base);
        chunk_base += (this_batch + chunk_size - 1) / chunk_size;
        total.samples += t.samples;
        total.accepted += t.accepted;
        batch *= 2;
    }

    count_estimate est;
    est.samples_used = total.samples;
    est.accepted = total.accepted;
    est.p_hat = static_cast<double>(total.accepted) / static_cast<double>(total.samples);
    const auto ci = wilson_interval(total.accepted, total.samples, delta);
    est.ci_low = ci.low;
    est.ci_high = ci.high;
    est.epsilon = epsilon;
    est.delta = delta;
    est.seed = seed;

    if (total.accepted < target)
        throw acceptance_too_low_error(
            "estimate_count: sample cap reached before the accepted-count target; "
            "acceptance is too low for the configuration model to be practical here",
            ci.high, total.samples);

    detail::fill_count_fields(est, m);
    return est;
}

struct double_edge_stats {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

// Mean of the matched-double-edge count F over independent configuration
// draws (early exit disabled: rejected draws count too). Its expectation is
// the mu statistic of the diagnostics module.
inline double_edge_stats empirical_double_edge_mean(const margins& m, std::uint64_t samples,
                                                    std::uint64_t seed, unsigned threads = 1) {
    if (samples == 0)
        throw validation_error("empirical_double_edge_mean: samples must be positive");
    const auto tally = detail::tally_draws(m, samples, seed, threads, true);
    double_edge_stats out;
    out.samples = tally.samples;
    const double n = static_cast<double>(tally.samples);
    out.mean = static_cast<double>(tally.sum_f) / n;
    const double var = std::max(0.0, tally.sum_f2 / n - out.mean * out.mean);
    out.std_error = std::sqrt(var / n);
    return out;
}

}  // namespace bct
