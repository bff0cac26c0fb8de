#pragma once

// Randomized invariant suites behind `evcs fuzz`.

#include <cstdint>
#include <string>
#include <vector>

namespace evcs::app {

struct FuzzReport {
    std::string suite;
    std::size_t cases = 0;
    std::size_t violations = 0;
    std::string first_failure;
    double seconds = 0.0;

    bool passed() const { return violations == 0; }
};

/// Matched energy balances and every per-station flow split holds.
FuzzReport fuzz_clearing(std::size_t cases, std::uint64_t seed);
/// Masked grid actions keep the battery inside [capacity_min, soc_max * capacity_max].
FuzzReport fuzz_battery(std::size_t cases, std::uint64_t seed);
/// Profit recomputation, zero-sum trade payments, invariance of the total under the trade multiplier.
FuzzReport fuzz_profit(std::size_t cases, std::uint64_t seed);
/// Raising one agent's value never lowers the mixed value.
FuzzReport fuzz_monotonicity(std::size_t cases, std::uint64_t seed);

std::vector<FuzzReport> run_fuzz_suites(std::size_t cases, std::uint64_t seed);

}  // namespace evcs::app
