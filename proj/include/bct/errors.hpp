#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bct {

// Input text could not be parsed (malformed margin line, bad family file, ...).
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parsed fine but violates a domain invariant (sum mismatch, nonpositive entry, ...).
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Gale-Ryser says no binary table exists for these margins.
struct infeasible_margins_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact computation would exceed its state budget; caller should fall back to estimation.
struct budget_exceeded_error : std::runtime_error {
    budget_exceeded_error(const std::string& what, std::uint64_t states)
        : std::runtime_error(what), states_visited(states) {}
    std::uint64_t states_visited;
};

// Instance too large for an exhaustive routine (N! enumeration, |Omega| enumeration).
struct instance_too_large_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sequential estimator hit its sample cap before reaching the accepted-count target.
struct acceptance_too_low_error : std::runtime_error {
    acceptance_too_low_error(const std::string& what, double p_upper, std::uint64_t samples)
        : std::runtime_error(what), p_hat_upper(p_upper), samples_used(samples) {}
    double p_hat_upper;        // upper confidence bound on the acceptance probability
    std::uint64_t samples_used;
};

}  // namespace bct
