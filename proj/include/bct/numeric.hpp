#pragma once

#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace bct {

using big_int = boost::multiprecision::cpp_int;
using big_rat = boost::multiprecision::cpp_rational;

inline big_int factorial(std::uint64_t n) {
    big_int r = 1;
    for (std::uint64_t k = 2; k <= n; ++k) r *= k;
    return r;
}

// x!/(x-k)!, zero when k > x (the product then contains a zero factor).
inline big_int falling_factorial(std::uint64_t x, std::uint64_t k) {
    if (k > x) return 0;
    big_int r = 1;
    for (std::uint64_t t = 0; t < k; ++t) r *= (x - t);
    return r;
}

inline big_int binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    big_int r = 1;
    for (std::uint64_t t = 1; t <= k; ++t) {
        r *= (n - k + t);
        r /= t;  // exact at every step: r is C(n-k+t, t)
    }
    return r;
}

// r_i(r_i - 1) summed over a margin vector; fits in u64 since
// sum r_i(r_i-1) <= N * r_1 and both are bounded by ~1e7 in practice.
template <typename Vec>
std::uint64_t sum_second_falling(const Vec& v) {
    std::uint64_t s = 0;
    for (auto x : v) s += static_cast<std::uint64_t>(x) * (x - 1);
    return s;
}

}  // namespace bct
