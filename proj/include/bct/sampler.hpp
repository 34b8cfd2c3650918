#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstdint>
#include <optional>
#include <vector>

#include "bct/errors.hpp"
#include "bct/margins.hpp"
#include "bct/rng.hpp"

namespace bct {

// One configuration-model draw: a uniformly random matching between the N
// type-1 tokens (r_i per row) and the N type-2 tokens (c_j per column).
// perm[k] is the type-2 token matched to type-1 token slot k.
struct token_pairing {
    std::vector<std::uint32_t> perm;
    std::vector<std::uint64_t> row_start;  // prefix sums of r, size m+1
    std::vector<std::uint32_t> col_of;     // type-2 token -> column index

    std::uint32_t row_of(std::uint64_t slot) const {
        const auto it = std::upper_bound(row_start.begin(), row_start.end(), slot);
        return static_cast<std::uint32_t>(it - row_start.begin() - 1);
    }
};

namespace detail {

// Linear-probe open-addressing map from packed (row, col) to a count.
// No deletion; grows by doubling at 60% load. Key 0 is reserved as "empty",
// so stored keys are packed+1.
class cell_map {
public:
    explicit cell_map(std::size_t expected = 0) { init_slots(slot_count_for(expected)); }

    std::uint32_t increment(std::uint64_t key) {
        if ((size_ + 1) * 10 > keys_.size() * 6) grow();
        std::size_t idx = probe(key + 1);
        if (keys_[idx] == 0) {
            keys_[idx] = key + 1;
            vals_[idx] = 0;
            ++size_;
        }
        return ++vals_[idx];
    }

    std::uint32_t get(std::uint64_t key) const {
        const std::size_t idx = probe(key + 1);
        return keys_[idx] == 0 ? 0 : vals_[idx];
    }

    std::size_t size() const { return size_; }

    template <typename F>
    void for_each(F&& f) const {
        for (std::size_t idx = 0; idx < keys_.size(); ++idx)
            if (keys_[idx] != 0) f(keys_[idx] - 1, vals_[idx]);
    }

    void clear() {
        std::fill(keys_.begin(), keys_.end(), 0);
        size_ = 0;
    }

private:
    static std::size_t slot_count_for(std::size_t expected) {
        return std::bit_ceil(std::max<std::size_t>(16, expected * 2));
    }

    void init_slots(std::size_t n) {
        keys_.assign(n, 0);
        vals_.assign(n, 0);
        mask_ = n - 1;
        size_ = 0;
    }

    std::size_t probe(std::uint64_t stored_key) const {
        std::size_t idx = static_cast<std::size_t>(splitmix64_mix(stored_key)) & mask_;
        while (keys_[idx] != 0 && keys_[idx] != stored_key) idx = (idx + 1) & mask_;
        return idx;
    }

    void grow() {
        std::vector<std::uint64_t> old_keys = std::move(keys_);
        std::vector<std::uint32_t> old_vals = std::move(vals_);
        const std::size_t old_size = size_;
        init_slots(old_keys.size() * 2);
        for (std::size_t i = 0; i < old_keys.size(); ++i) {
            if (old_keys[i] == 0) continue;
            const std::size_t idx = probe(old_keys[i]);
            keys_[idx] = old_keys[i];
            vals_[idx] = old_vals[i];
        }
        size_ = old_size;
    }

    std::vector<std::uint64_t> keys_;
    std::vector<std::uint32_t> vals_;
    std::size_t mask_ = 0;
    std::size_t size_ = 0;
};

}  // namespace detail

// The m x n nonnegative integer table induced by a pairing. Stored dense when
// m*n is small enough that zeroing it stays within the per-attempt Theta(N)
// budget, sparse (open addressing) otherwise; N can be 1e7 while m*n
// overflows memory. The margins pointer is non-owning: the instance must
// outlive tables built from it.
class contingency_table {
public:
    static constexpr std::uint64_t dense_limit = 10'000'000;

    explicit contingency_table(const margins& m)
        : src_(&m),
          m_(m.m()),
          n_(m.n()),
          dense_mode_(static_cast<std::uint64_t>(m.m()) * m.n() <=
                      std::min<std::uint64_t>(dense_limit, 4 * m.total() + 1024)) {
        if (dense_mode_)
            dense_.assign(m_ * n_, 0);
        else
            sparse_ = detail::cell_map(std::min<std::uint64_t>(m.total(), 1 << 20));
    }

    const margins& source_margins() const { return *src_; }
    std::size_t row_count() const { return m_; }
    std::size_t col_count() const { return n_; }

    std::uint32_t at(std::size_t i, std::size_t j) const {
        return dense_mode_ ? dense_[i * n_ + j] : sparse_.get(pack(i, j));
    }

    // returns the new count
    std::uint32_t increment(std::size_t i, std::size_t j) {
        return dense_mode_ ? ++dense_[i * n_ + j] : sparse_.increment(pack(i, j));
    }

    void reset() {
        if (dense_mode_)
            std::fill(dense_.begin(), dense_.end(), 0);
        else
            sparse_.clear();
    }

    // visits every nonzero entry as f(i, j, count)
    template <typename F>
    void for_each_nonzero(F&& f) const {
        if (dense_mode_) {
            for (std::size_t i = 0; i < m_; ++i)
                for (std::size_t j = 0; j < n_; ++j)
                    if (dense_[i * n_ + j]) f(i, j, dense_[i * n_ + j]);
        } else {
            sparse_.for_each([&](std::uint64_t key, std::uint32_t v) {
                f(static_cast<std::size_t>(key >> 32),
                  static_cast<std::size_t>(key & 0xFFFFFFFFull), v);
            });
        }
    }

    // dense row-major materialization; only for small tables
    std::vector<std::uint32_t> dense() const {
        if (static_cast<std::uint64_t>(m_) * n_ > dense_limit)
            throw instance_too_large_error("contingency_table: dense materialization too large");
        std::vector<std::uint32_t> out(m_ * n_, 0);
        for_each_nonzero([&](std::size_t i, std::size_t j, std::uint32_t v) { out[i * n_ + j] = v; });
        return out;
    }

private:
    static std::uint64_t pack(std::size_t i, std::size_t j) {
        return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
    }

    const margins* src_;
    std::size_t m_, n_;
    bool dense_mode_;
    std::vector<std::uint32_t> dense_;
    detail::cell_map sparse_;
};

// Z: number of entries >= 2. Z == 0 iff the table is binary.
inline std::uint64_t count_nonbinary(const contingency_table& t) {
    std::uint64_t z = 0;
    t.for_each_nonzero([&](std::size_t, std::size_t, std::uint32_t v) {
        if (v >= 2) ++z;
    });
    return z;
}

// F: number of matched double edges, sum over entries of C(T_ij, 2).
inline std::uint64_t count_double_edges(const contingency_table& t) {
    std::uint64_t f = 0;
    t.for_each_nonzero([&](std::size_t, std::size_t, std::uint32_t v) {
        f += static_cast<std::uint64_t>(v) * (v - 1) / 2;
    });
    return f;
}

namespace detail {

inline std::vector<std::uint64_t> prefix_sums(const std::vector<std::uint32_t>& v) {
    std::vector<std::uint64_t> p(v.size() + 1, 0);
    for (std::size_t k = 0; k < v.size(); ++k) p[k + 1] = p[k] + v[k];
    return p;
}

inline std::vector<std::uint32_t> expand_index(const std::vector<std::uint32_t>& sums,
                                               std::uint64_t total) {
    std::vector<std::uint32_t> out;
    out.reserve(total);
    for (std::uint32_t idx = 0; idx < sums.size(); ++idx)
        out.insert(out.end(), sums[idx], idx);
    return out;
}

}  // namespace detail

namespace detail {

// Fisher-Yates with the unbiased bounded sampler from rng::below. The swap
// targets depend only on the rng, never on array contents, so they are drawn
// a block at a time and prefetched before the swaps are applied; output is
// bit-identical to the naive loop but the random accesses overlap instead of
// serializing on cache misses once the array outgrows the cache.
inline void shuffle_tokens(std::vector<std::uint32_t>& tok, rng& gen) {
    const std::uint64_t N = tok.size();
    constexpr std::uint64_t block = 64;
    std::uint64_t targets[block];
    std::uint64_t k = 0;
    while (k + 1 < N) {
        const std::uint64_t b = std::min(block, N - 1 - k);
        for (std::uint64_t t = 0; t < b; ++t) {
            targets[t] = k + t + gen.below(N - k - t);
            __builtin_prefetch(&tok[targets[t]], 1);
        }
        for (std::uint64_t t = 0; t < b; ++t) std::swap(tok[k + t], tok[targets[t]]);
        k += b;
    }
}

}  // namespace detail

// Uniform draw over all N! token matchings, Theta(N) time and space; a fixed
// seed replays bit-exactly on any platform. The into-variant reuses the
// buffers of `out`, so repeated draws on one instance pay no allocation.
inline void sample_pairing_into(const margins& m, rng& gen, token_pairing& out) {
    const std::uint64_t N = m.total();
    out.row_start.resize(m.m() + 1);
    out.row_start[0] = 0;
    for (std::size_t i = 0; i < m.m(); ++i)
        out.row_start[i + 1] = out.row_start[i] + m.rows()[i];
    out.col_of.clear();
    out.col_of.reserve(N);
    for (std::uint32_t j = 0; j < m.n(); ++j)
        out.col_of.insert(out.col_of.end(), m.cols()[j], j);
    out.perm.resize(N);
    for (std::uint64_t k = 0; k < N; ++k) out.perm[k] = static_cast<std::uint32_t>(k);
    detail::shuffle_tokens(out.perm, gen);
}

inline token_pairing sample_pairing(const margins& m, rng& gen) {
    token_pairing p;
    sample_pairing_into(m, gen, p);
    return p;
}

// T[i,j] = number of type-1 tokens from row i matched to type-2 tokens from
// column j. Conserves both margins by construction.
inline contingency_table table_from_pairing(const token_pairing& p, const margins& m) {
    contingency_table t(m);
    for (std::size_t i = 0; i < m.m(); ++i)
        for (std::uint64_t k = p.row_start[i]; k < p.row_start[i + 1]; ++k)
            t.increment(i, p.col_of[p.perm[k]]);
    return t;
}

// Reusable workspace for repeated configuration draws on one instance; keeps
// the token array and table buffers alive across attempts. Re-shuffling an
// already permuted array is still a uniform draw (Fisher-Yates is uniform
// from any fixed start, and the new randomness is independent of the old), so
// nothing is re-initialized between attempts.
class attempt_stream {
public:
    explicit attempt_stream(const margins& m)
        : N_(m.total()),
          row_start_(detail::prefix_sums(m.rows())),
          col_of_(detail::expand_index(m.cols(), N_)),
          tok2_(N_),
          table_(m) {
        for (std::uint64_t k = 0; k < N_; ++k) tok2_[k] = static_cast<std::uint32_t>(k);
    }

    // One configuration draw; returns true iff the induced table is binary.
    // With early_exit the attempt aborts as soon as any entry reaches 2 —
    // the attempt is already doomed and entries never decrease, so the
    // accept/reject law is unchanged. Without it the full table is built and
    // table()/double_edges() are valid afterwards.
    bool draw(rng& gen, bool early_exit) {
        table_.reset();
        bool binary = true;
        std::size_t row = 0;
        // fused shuffle + table build: slot k is finalized, then scored
        for (std::uint64_t k = 0; k < N_; ++k) {
            if (k + 1 < N_) {
                const std::uint64_t j = k + gen.below(N_ - k);
                std::swap(tok2_[k], tok2_[j]);
            }
            while (k >= row_start_[row + 1]) ++row;
            if (table_.increment(row, col_of_[tok2_[k]]) >= 2) {
                binary = false;
                if (early_exit) return false;
            }
        }
        return binary;
    }

    // table of the last non-aborted draw
    const contingency_table& table() const { return table_; }

private:
    std::uint64_t N_;
    std::vector<std::uint64_t> row_start_;
    std::vector<std::uint32_t> col_of_;
    std::vector<std::uint32_t> tok2_;
    contingency_table table_;
};

struct rejection_result {
    std::optional<contingency_table> table;  // empty when attempts were exhausted
    std::uint64_t attempts = 0;
};

// Repeat configuration draws until the table is binary; the accepted table is
// an exactly uniform sample from Omega_{r,c}. Diagnostics that need Z or F of
// rejected draws should disable early_exit and use sample_pairing +
// table_from_pairing (or attempt_stream) instead.
inline rejection_result sample_binary_rejection(const margins& m, rng& gen,
                                                std::uint64_t max_attempts = 1000,
                                                bool early_exit = true) {
    if (!gale_ryser_feasible(m))
        throw infeasible_margins_error("sample_binary_rejection: Omega is empty for these margins");

    attempt_stream stream(m);
    for (std::uint64_t attempt = 1; attempt <= max_attempts; ++attempt)
        if (stream.draw(gen, early_exit)) return {stream.table(), attempt};
    return {std::nullopt, max_attempts};
}

}  // namespace bct
