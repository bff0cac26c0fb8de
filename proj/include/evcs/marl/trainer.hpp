#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "evcs/data/scenario.hpp"
#include "evcs/marl/learner.hpp"
#include "evcs/marl/rollout.hpp"

namespace evcs::marl {

/// Returns the episode to play at 0-based training episode `index`.
using EpisodeSource = std::function<data::Episode(std::size_t index)>;

struct EpisodeMetrics {
    std::size_t episode = 0;  // 1-based
    double total_profit = 0.0;
    std::vector<double> station_profit;
    double mixer_loss = 0.0;  // 0 when no update ran
    double agent_loss = 0.0;  // mean over agents
    double epsilon = 0.0;     // at the first slot of the episode
    bool trained = false;
    double wall_seconds = 0.0;
    std::size_t double_q_checks = 0;
    std::size_t double_q_violations = 0;
};

struct TrainResult {
    Learner learner;
    std::vector<EpisodeMetrics> metrics;
    std::size_t double_q_checks = 0;
    std::size_t double_q_violations = 0;
};

/// Independent 64-bit stream seed derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Runs config.episodes rounds of rollout, replay push, one update once the
/// buffer holds more than batch_episodes episodes, and target sync.
/// The random algorithm acts with epsilon 1 and never updates.
TrainResult train(const TrainConfig& config, const EnvSpec& spec, const NetworkConfig& net,
                  Algorithm algorithm, const EpisodeSource& source, std::uint64_t seed);

/// Greedy (epsilon 0) rollout of the learner's eval agents.
EpisodeRecord evaluate_greedy(const data::Episode& episode, const EnvSpec& spec, const Learner& learner,
                              double reward_scale, std::vector<TraceRow>* trace = nullptr);

}  // namespace evcs::marl
