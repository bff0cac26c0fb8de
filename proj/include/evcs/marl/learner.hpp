#pragma once

// Recurrent agents, monotone mixers and the value-decomposition update rules.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "evcs/marl/replay.hpp"
#include "evcs/nn/drqn.hpp"
#include "evcs/nn/mixer.hpp"
#include "evcs/nn/optim.hpp"

namespace evcs::marl {

enum class Algorithm { double_qmix, qmix, independent_dqn, random };

/// `direct`: each agent regresses its chosen-action value straight onto the
/// joint target y and the mixers see agent values as constants.
/// `mixer_grad`: agents receive dL_mix/dq through the eval mixers instead.
enum class AgentLossMode { direct, mixer_grad };

const char* algorithm_name(Algorithm a);
/// Throws ConfigError for unknown names.
Algorithm parse_algorithm(const std::string& name);
const char* agent_loss_mode_name(AgentLossMode m);
AgentLossMode parse_agent_loss_mode(const std::string& name);

struct NetworkConfig {
    std::size_t agent_body = 64;
    std::size_t rnn_hidden = 64;
    std::size_t mixer_embed = 32;
    std::size_t hyper_hidden = 64;

    void validate() const;
    bool operator==(const NetworkConfig&) const = default;
};

struct TrainConfig {
    double gamma = 0.99;
    double lr_drqn = 0.001;
    double lr_mix = 0.0005;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_decay_fraction = 0.5;
    std::size_t target_period = 10;
    std::size_t batch_episodes = 8;
    std::size_t buffer_capacity = 256;
    std::size_t episodes = 300;
    double reward_scale = 1e-3;
    AgentLossMode agent_loss_mode = AgentLossMode::direct;
    bool debug_checks = false;

    void validate() const;
    /// Linear decay from epsilon_start to epsilon_end over the first
    /// epsilon_decay_fraction of `total_steps`, constant afterwards.
    double epsilon_at(std::size_t step, std::size_t total_steps) const;

    bool operator==(const TrainConfig&) const = default;
};

/// Eval and target networks for all agents and mixers, plus optimizer state.
/// double_qmix owns two mixers, qmix one, independent_dqn and random none.
class Learner {
public:
    Learner(Algorithm algorithm, std::size_t agents, std::size_t actions, const NetworkConfig& net,
            std::uint64_t seed);

    Algorithm algorithm() const { return algorithm_; }
    std::size_t agent_count() const { return agents_eval.size(); }
    std::size_t action_count() const { return actions_; }
    std::size_t state_size() const { return agent_count() * kObservationSize; }

    nn::ParamRefs agent_parameters(std::size_t agent);
    nn::ParamRefs mixer_parameters();
    /// Eval networks followed by target networks, in a fixed order.
    nn::ParamRefs all_parameters();
    nn::ConstParamRefs all_parameters() const;

    std::vector<nn::RecurrentQNet> agents_eval;
    std::vector<nn::RecurrentQNet> agents_target;
    std::vector<nn::MonotonicMixer> mixers_eval;
    std::vector<nn::MonotonicMixer> mixers_target;
    std::vector<nn::Adam> agent_optimizers;
    nn::Adam mixer_optimizer;
    std::size_t train_steps = 0;
    std::size_t target_syncs = 0;

private:
    Algorithm algorithm_;
    std::size_t actions_;
};

/// Per-slot bootstrapped targets for one sampled episode.
struct EpisodeTargets {
    std::vector<double> y;                       // joint target
    std::vector<std::vector<double>> agent_y;    // [slot][agent], equals y except for independent_dqn
    std::vector<double> mix_a;                   // target mixer A at next state (0 at terminal)
    std::vector<double> mix_b;                   // target mixer B (== mix_a for qmix)
};

struct TargetBatch {
    std::vector<EpisodeTargets> episodes;
    std::size_t checks = 0;
    std::size_t double_q_violations = 0;
};

/// Re-unrolls eval and target agents from a zero hidden state and returns
///   y = r + gamma * min(MixA_target, MixB_target)  (double_qmix)
///   y = r + gamma * Mix_target                     (qmix)
///   y_i = r + gamma * q_i_target                   (independent_dqn)
/// where next-slot actions come from the masked eval argmax. The terminal slot uses y = r.
TargetBatch compute_targets(std::span<const EpisodeRecord* const> batch, const Learner& learner,
                            double gamma);

struct TrainLosses {
    double mixer_loss = 0.0;
    std::vector<double> agent_loss;
    std::size_t double_q_checks = 0;
    std::size_t double_q_violations = 0;
};

/// One gradient update on agents (lr_drqn) and mixers (lr_mix).
/// Throws DivergenceError on a non-finite loss or gradient.
TrainLosses train_step(std::span<const EpisodeRecord* const> batch, Learner& learner,
                       const TrainConfig& config);

/// Copies eval into target networks when episode_index % period == 0.
/// Returns whether a sync happened.
bool sync_targets(Learner& learner, std::size_t episode_index, std::size_t period);

}  // namespace evcs::marl
