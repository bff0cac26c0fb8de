#include "evcs/marl/trainer.hpp"

#include <chrono>
#include <numeric>

#include "evcs/error.hpp"

namespace evcs::marl {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over a mixed pair
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

TrainResult train(const TrainConfig& config, const EnvSpec& spec, const NetworkConfig& net,
                  Algorithm algorithm, const EpisodeSource& source, std::uint64_t seed) {
    config.validate();
    net.validate();
    const data::Episode first = source(0);
    const std::size_t T = first.length();
    const std::size_t total_steps = config.episodes * T;

    TrainResult result{Learner(algorithm, first.station_count(), spec.grid.size(), net, derive_seed(seed, 1)),
                       {}, 0, 0};
    Learner& learner = result.learner;
    ReplayBuffer replay(config.buffer_capacity, derive_seed(seed, 2));
    std::mt19937_64 act_rng(derive_seed(seed, 3));
    const bool learns = algorithm != Algorithm::random;

    for (std::size_t e = 0; e < config.episodes; ++e) {
        const auto t0 = std::chrono::steady_clock::now();
        const data::Episode episode = e == 0 ? first : source(e);
        if (episode.length() != T || episode.station_count() != first.station_count())
            throw ConfigError("episode source changed shape at episode " + std::to_string(e + 1));

        const std::size_t base = e * T;
        auto eps = [&](std::size_t slot) {
            return learns ? config.epsilon_at(base + slot, total_steps) : 1.0;
        };
        EpisodeMetrics m;
        m.episode = e + 1;
        m.epsilon = eps(0);
        EpisodeRecord rec = rollout_episode(episode, spec, learner, eps, act_rng, config.reward_scale);
        m.total_profit = rec.total_profit();
        m.station_profit = rec.station_profit;

        if (learns) {
            replay.push(std::move(rec));
            if (replay.size() > config.batch_episodes) {
                const auto batch = replay.sample(config.batch_episodes);
                const TrainLosses losses = train_step(batch, learner, config);
                m.trained = true;
                m.mixer_loss = losses.mixer_loss;
                m.agent_loss = std::accumulate(losses.agent_loss.begin(), losses.agent_loss.end(), 0.0) /
                               static_cast<double>(losses.agent_loss.size());
                m.double_q_checks = losses.double_q_checks;
                m.double_q_violations = losses.double_q_violations;
                result.double_q_checks += losses.double_q_checks;
                result.double_q_violations += losses.double_q_violations;
            }
            sync_targets(learner, e + 1, config.target_period);
        }
        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.metrics.push_back(std::move(m));
    }
    return result;
}

EpisodeRecord evaluate_greedy(const data::Episode& episode, const EnvSpec& spec, const Learner& learner,
                              double reward_scale, std::vector<TraceRow>* trace) {
    std::mt19937_64 unused(0);
    return rollout_episode(episode, spec, learner, [](std::size_t) { return 0.0; }, unused, reward_scale,
                           trace);
}

}  // namespace evcs::marl
