#pragma once

// Exhaustive and lookahead baselines over the agents' discrete action grid.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "evcs/data/scenario.hpp"
#include "evcs/marl/rollout.hpp"

namespace evcs::oracle {

using JointSequence = std::vector<std::vector<std::size_t>>;  // [slot][station]

inline constexpr std::size_t kMaxTinyStations = 3;
inline constexpr std::size_t kMaxTinySlots = 4;
inline constexpr std::size_t kMaxTinyActions = 8;
inline constexpr double kTinyBudget = 1e7;

struct TinyInstance {
    data::Episode episode;
    marl::EnvSpec spec;

    /// Throws ConfigError on size limits and BudgetExceeded when K^(I*T) > kTinyBudget.
    void validate() const;
};

struct OracleResult {
    double profit = 0.0;
    JointSequence actions;
    std::uint64_t nodes = 0;  // environment steps evaluated
    double wall_seconds = 0.0;
    std::uint64_t fingerprint = 0;
};

/// Maximum cumulative profit over every feasible joint action sequence.
/// Ties keep the lexicographically first sequence.
OracleResult brute_force(const TinyInstance& instance);

struct GreedyResult {
    double profit = 0.0;
    JointSequence actions;
    std::vector<marl::TraceRow> trace;
    std::uint64_t nodes = 0;
    std::uint64_t fingerprint = 0;
};

/// Per-slot leaf budget for rolling_greedy.
inline constexpr double kGreedyBudget = 1e8;

/// At each slot, searches the next `lookahead` slots with the episode's known
/// prices, renewables and arrivals, then executes the first joint action of the
/// best window plan. Throws ConfigError for lookahead 0 and BudgetExceeded when
/// a window would enumerate more than kGreedyBudget leaves.
GreedyResult rolling_greedy(const data::Episode& episode, const marl::EnvSpec& spec, std::size_t lookahead);

/// Replays a fixed joint sequence through the environment.
marl::EpisodeRecord replay_sequence(const data::Episode& episode, const marl::EnvSpec& spec,
                                    const JointSequence& actions, std::vector<marl::TraceRow>* trace = nullptr);

struct RunProfit {
    std::string algorithm;
    std::uint64_t fingerprint = 0;
    double profit = 0.0;
};

struct Gap {
    std::string algorithm;
    double profit = 0.0;
    double bound = 0.0;
    double absolute = 0.0;  // bound - profit
    double relative = 0.0;  // absolute / |bound|; 0 when both are 0
};

/// Throws ConfigError when a run was not played on the bound's episode.
std::vector<Gap> compare(const std::vector<RunProfit>& runs, double bound, std::uint64_t bound_fingerprint);

}  // namespace evcs::oracle
