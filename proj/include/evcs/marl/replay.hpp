#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "evcs/marl/observation.hpp"

namespace evcs::marl {

/// Everything a learner needs to re-unroll one episode from a zero hidden state.
struct EpisodeRecord {
    std::size_t agents = 0;
    std::size_t actions = 0;
    std::vector<std::vector<Observation>> obs;            // [slot][agent]
    std::vector<std::vector<double>> state;               // [slot] concatenated observations
    std::vector<std::vector<std::size_t>> joint_action;   // [slot][agent]
    std::vector<std::vector<std::uint8_t>> masks;         // [slot][agent * actions + a]
    std::vector<double> reward;                           // scaled total profit
    std::vector<double> profit;                           // unscaled total profit
    std::vector<double> station_profit;                   // per agent, summed over the episode

    std::size_t length() const { return reward.size(); }
    double total_profit() const;
    std::span<const std::uint8_t> mask(std::size_t slot, std::size_t agent) const {
        return std::span<const std::uint8_t>(masks[slot]).subspan(agent * actions, actions);
    }
};

/// Ring buffer of whole episodes with uniform sampling without replacement.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::uint64_t seed);

    void push(EpisodeRecord record);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }

    /// Throws ConfigError if count > size().
    std::vector<const EpisodeRecord*> sample(std::size_t count);

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<EpisodeRecord> items_;
    std::mt19937_64 rng_;
};

}  // namespace evcs::marl
