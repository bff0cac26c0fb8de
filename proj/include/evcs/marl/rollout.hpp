#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "evcs/core/microgrid.hpp"
#include "evcs/data/scenario.hpp"
#include "evcs/marl/learner.hpp"
#include "evcs/marl/observation.hpp"
#include "evcs/marl/replay.hpp"

namespace evcs::marl {

struct EnvSpec {
    core::EssParams params;
    ActionGrid grid;
    ObservationScales scales;
};

/// One row per (slot, station) of an executed episode. Battery and SOC are
/// the values at the start of the slot.
struct TraceRow {
    std::size_t slot = 0;
    std::size_t station = 0;
    double utility_price = 0.0;
    double renewable = 0.0;
    double urgent = 0.0;
    double regular = 0.0;
    double ev_supply = 0.0;
    double ess_control = 0.0;
    double matched_buy = 0.0;
    double matched_sell = 0.0;
    double utility_buy = 0.0;
    double utility_sell = 0.0;
    double battery = 0.0;
    double soc = 0.0;
    double station_profit = 0.0;
    double curtailed = 0.0;
};

/// Stepping wrapper around one episode.
class Environment {
public:
    Environment(const data::Episode& episode, const EnvSpec& spec);

    void reset();
    std::size_t slot() const { return slot_; }
    bool done() const { return slot_ >= episode_->length(); }
    std::size_t station_count() const { return states_.size(); }
    const std::vector<core::StationState>& states() const { return states_; }
    const data::Episode& episode() const { return *episode_; }
    const EnvSpec& spec() const { return spec_; }

    std::vector<Observation> observations() const;
    /// Concatenated per-agent observations.
    std::vector<double> global_state() const;
    std::vector<ActionMenu> menus() const;

    /// Decodes and executes a joint action. Throws InfeasibleAction for masked
    /// indices and ConstraintViolation if the environment rejects the action.
    core::StepOutcome step(std::span<const std::size_t> joint_action, std::vector<TraceRow>* trace = nullptr);

private:
    const data::Episode* episode_;
    EnvSpec spec_;
    std::size_t slot_ = 0;
    std::vector<core::StationState> states_;
};

struct ActResult {
    std::size_t action = 0;
    std::vector<double> hidden;
};

/// With probability epsilon a uniformly random unmasked action, otherwise the
/// masked argmax of the agent's Q-values. The hidden state always advances.
ActResult act_epsilon_greedy(const nn::RecurrentQNet& agent, const Observation& obs,
                             std::span<const double> hidden, double epsilon,
                             std::span<const std::uint8_t> mask, std::mt19937_64& rng);

/// Chooses a joint action for the environment's current slot.
using JointPolicy = std::function<std::vector<std::size_t>(const Environment&, std::span<const ActionMenu>)>;

/// Runs `policy` from reset to the end of the episode.
EpisodeRecord run_policy(const data::Episode& episode, const EnvSpec& spec, const JointPolicy& policy,
                         double reward_scale, std::vector<TraceRow>* trace = nullptr);

/// Epsilon-greedy rollout of the learner's eval agents. `epsilon_at(slot)` is
/// queried once per slot.
EpisodeRecord rollout_episode(const data::Episode& episode, const EnvSpec& spec, const Learner& learner,
                              const std::function<double(std::size_t)>& epsilon_at, std::mt19937_64& rng,
                              double reward_scale, std::vector<TraceRow>* trace = nullptr);

/// Uniformly random feasible joint actions.
JointPolicy random_policy(std::mt19937_64& rng);

}  // namespace evcs::marl
