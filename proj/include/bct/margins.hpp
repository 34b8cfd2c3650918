#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bct/errors.hpp"
#include "bct/numeric.hpp"

namespace bct {

// A problem instance: row sums r and column sums c with equal total N.
// Entries are stored sorted non-increasing and strictly positive; trailing
// zeros of the conceptually infinite vectors are never stored. Immutable
// after construction, so safe to share across threads.
class margins {
public:
    margins(std::vector<std::uint32_t> row_sums, std::vector<std::uint32_t> col_sums)
        : r_(std::move(row_sums)), c_(std::move(col_sums)) {
        if (r_.empty() || c_.empty())
            throw validation_error("margins: empty row or column vector");
        for (auto x : r_)
            if (x == 0) throw validation_error("margins: row sums must be positive");
        for (auto x : c_)
            if (x == 0) throw validation_error("margins: column sums must be positive");

        // remember input order before sorting; the table output path uses it to
        // label entries the way the user wrote them
        row_input_pos_ = sort_index(r_);
        col_input_pos_ = sort_index(c_);

        const std::uint64_t nr = std::accumulate(r_.begin(), r_.end(), std::uint64_t{0});
        const std::uint64_t nc = std::accumulate(c_.begin(), c_.end(), std::uint64_t{0});
        if (nr != nc) {
            std::ostringstream os;
            os << "margins: sum mismatch, sum(r)=" << nr << " != sum(c)=" << nc;
            throw validation_error(os.str());
        }
        total_ = nr;
    }

    const std::vector<std::uint32_t>& rows() const { return r_; }
    const std::vector<std::uint32_t>& cols() const { return c_; }
    std::uint64_t total() const { return total_; }
    std::size_t m() const { return r_.size(); }
    std::size_t n() const { return c_.size(); }

    // position of sorted row i in the user's input vector
    std::uint32_t row_input_pos(std::size_t i) const { return row_input_pos_[i]; }
    std::uint32_t col_input_pos(std::size_t j) const { return col_input_pos_[j]; }

    margins transposed() const { return margins(c_, r_); }

    bool operator==(const margins& o) const { return r_ == o.r_ && c_ == o.c_; }

private:
    // sorts v non-increasing (stable) and returns the original index of each
    // sorted slot
    static std::vector<std::uint32_t> sort_index(std::vector<std::uint32_t>& v) {
        std::vector<std::uint32_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0u);
        if (std::is_sorted(v.begin(), v.end(), std::greater<std::uint32_t>())) return idx;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return v[a] > v[b]; });
        std::vector<std::uint32_t> sorted(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) sorted[k] = v[idx[k]];
        v = std::move(sorted);
        return idx;
    }

    std::vector<std::uint32_t> r_, c_;
    std::vector<std::uint32_t> row_input_pos_, col_input_pos_;
    std::uint64_t total_ = 0;
};

namespace detail {

inline std::vector<std::uint32_t> parse_int_list(const std::string& s, const char* what) {
    std::vector<std::uint32_t> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(tok, &pos);
        } catch (const std::exception&) {
            throw parse_error(std::string("margins: bad integer '") + tok + "' in " + what);
        }
        if (pos != tok.size())
            throw parse_error(std::string("margins: bad integer '") + tok + "' in " + what);
        if (v <= 0)
            throw validation_error(std::string("margins: nonpositive entry in ") + what);
        out.push_back(static_cast<std::uint32_t>(v));
    }
    return out;
}

}  // namespace detail

// Accepts either the two-line text format
//     r: 3 2 1 1
//     c: 2 2 1 1 1
// ('#' starts a comment line) or a JSON object {"r": [...], "c": [...]}.
// Input order may be arbitrary; |Omega| is invariant under permuting the
// margins, so the constructor sorts.
inline margins parse_margins(const std::string& text) {
    // JSON variant: first non-space character is '{'
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(std::string("margins: invalid JSON: ") + e.what());
        }
        if (!j.contains("r") || !j.contains("c") || !j["r"].is_array() || !j["c"].is_array())
            throw parse_error("margins: JSON must have integer arrays \"r\" and \"c\"");
        std::vector<std::uint32_t> r, c;
        for (const auto& x : j["r"]) {
            if (!x.is_number_integer() || x.get<long long>() <= 0)
                throw validation_error("margins: entries must be positive integers");
            r.push_back(x.get<std::uint32_t>());
        }
        for (const auto& x : j["c"]) {
            if (!x.is_number_integer() || x.get<long long>() <= 0)
                throw validation_error("margins: entries must be positive integers");
            c.push_back(x.get<std::uint32_t>());
        }
        return margins(std::move(r), std::move(c));
    }

    std::vector<std::uint32_t> r, c;
    bool saw_r = false, saw_c = false;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        const auto colon = line.find(':', start);
        if (colon == std::string::npos)
            throw parse_error("margins: expected 'r: ...' or 'c: ...', got '" + line + "'");
        const std::string key = line.substr(start, colon - start);
        const std::string rest = line.substr(colon + 1);
        if (key == "r") {
            r = detail::parse_int_list(rest, "r");
            saw_r = true;
        } else if (key == "c") {
            c = detail::parse_int_list(rest, "c");
            saw_c = true;
        } else {
            throw parse_error("margins: unknown key '" + key + "'");
        }
    }
    if (!saw_r || !saw_c) throw parse_error("margins: need both an 'r:' and a 'c:' line");
    return margins(std::move(r), std::move(c));
}

// Gale-Ryser dominance criterion: a binary table with these margins exists
// iff for every k,  sum_{i<=k} r_i <= sum_j min(c_j, k)  (totals are equal by
// construction). Uses sortedness of c: columns with c_j >= k contribute k,
// the rest contribute c_j.
inline bool gale_ryser_feasible(const margins& m) {
    const auto& r = m.rows();
    const auto& c = m.cols();
    // prefix sums of c for the "rest contribute c_j" part
    std::vector<std::uint64_t> cpre(c.size() + 1, 0);
    for (std::size_t j = 0; j < c.size(); ++j) cpre[j + 1] = cpre[j] + c[j];

    std::uint64_t rpre = 0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        rpre += r[k];
        const std::uint32_t kk = static_cast<std::uint32_t>(k + 1);
        // first index with c_j < kk (c sorted non-increasing)
        const auto it = std::upper_bound(c.begin(), c.end(), kk,
                                         [](std::uint32_t a, std::uint32_t b) { return a > b; });
        const std::size_t big = static_cast<std::size_t>(it - c.begin());
        const std::uint64_t rhs = std::uint64_t{kk} * big + (cpre[c.size()] - cpre[big]);
        if (rpre > rhs) return false;
    }
    return true;
}

}  // namespace bct
