#include "evcs/marl/learner.hpp"

#include <algorithm>
#include <cmath>

#include "evcs/error.hpp"

namespace evcs::marl {

namespace {

using QTrace = std::vector<std::vector<double>>;  // [slot] -> action values

QTrace unroll_agent(const nn::RecurrentQNet& net, const EpisodeRecord& ep, std::size_t agent,
                    std::vector<nn::RecurrentQNet::StepCache>* caches) {
    QTrace q(ep.length());
    if (caches) caches->resize(ep.length());
    std::vector<double> h = net.initial_hidden();
    for (std::size_t t = 0; t < ep.length(); ++t) {
        auto out = net.forward(ep.obs[t][agent], h, caches ? &(*caches)[t] : nullptr);
        q[t] = std::move(out.q);
        h = std::move(out.hidden);
    }
    return q;
}

bool uses_mixers(Algorithm a) { return a == Algorithm::double_qmix || a == Algorithm::qmix; }

// q_eval[agent][slot], q_target[agent][slot]
EpisodeTargets targets_for_episode(const EpisodeRecord& ep, const std::vector<QTrace>& q_eval,
                                   const std::vector<QTrace>& q_target, const Learner& learner,
                                   double gamma, TargetBatch& stats) {
    const std::size_t T = ep.length();
    const std::size_t I = learner.agent_count();
    EpisodeTargets out;
    out.y.resize(T);
    out.agent_y.assign(T, std::vector<double>(I));
    out.mix_a.assign(T, 0.0);
    out.mix_b.assign(T, 0.0);

    for (std::size_t t = 0; t < T; ++t) {
        const double r = ep.reward[t];
        if (t + 1 == T) {
            out.y[t] = r;
            std::fill(out.agent_y[t].begin(), out.agent_y[t].end(), r);
            continue;
        }
        std::vector<double> next_q(I);
        for (std::size_t i = 0; i < I; ++i) {
            const std::size_t a = masked_argmax(q_eval[i][t + 1], ep.mask(t + 1, i));
            next_q[i] = q_target[i][t + 1][a];
        }
        switch (learner.algorithm()) {
            case Algorithm::double_qmix: {
                const double qa = learner.mixers_target[0].forward(ep.state[t + 1], next_q);
                const double qb = learner.mixers_target[1].forward(ep.state[t + 1], next_q);
                out.mix_a[t] = qa;
                out.mix_b[t] = qb;
                out.y[t] = r + gamma * std::min(qa, qb);
                const double tol = 1e-12 * std::max(1.0, std::abs(out.y[t]));
                ++stats.checks;
                if (out.y[t] - r > gamma * qa + tol || out.y[t] - r > gamma * qb + tol)
                    ++stats.double_q_violations;
                std::fill(out.agent_y[t].begin(), out.agent_y[t].end(), out.y[t]);
                break;
            }
            case Algorithm::qmix: {
                const double qa = learner.mixers_target[0].forward(ep.state[t + 1], next_q);
                out.mix_a[t] = qa;
                out.mix_b[t] = qa;
                out.y[t] = r + gamma * qa;
                std::fill(out.agent_y[t].begin(), out.agent_y[t].end(), out.y[t]);
                break;
            }
            case Algorithm::independent_dqn:
            case Algorithm::random: {
                double sum = 0.0;
                for (std::size_t i = 0; i < I; ++i) {
                    out.agent_y[t][i] = r + gamma * next_q[i];
                    sum += out.agent_y[t][i];
                }
                out.y[t] = sum / static_cast<double>(I);
                break;
            }
        }
    }
    return out;
}

}  // namespace

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::double_qmix: return "double_qmix";
        case Algorithm::qmix: return "qmix";
        case Algorithm::independent_dqn: return "independent_dqn";
        case Algorithm::random: return "random";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& name) {
    for (Algorithm a : {Algorithm::double_qmix, Algorithm::qmix, Algorithm::independent_dqn, Algorithm::random})
        if (name == algorithm_name(a)) return a;
    throw ConfigError("unknown algorithm '" + name +
                      "' (expected double_qmix, qmix, independent_dqn or random)");
}

const char* agent_loss_mode_name(AgentLossMode m) {
    return m == AgentLossMode::direct ? "direct" : "mixer_grad";
}

AgentLossMode parse_agent_loss_mode(const std::string& name) {
    if (name == "direct") return AgentLossMode::direct;
    if (name == "mixer_grad") return AgentLossMode::mixer_grad;
    throw ConfigError("unknown agent_loss_mode '" + name + "' (expected direct or mixer_grad)");
}

void NetworkConfig::validate() const {
    if (agent_body == 0 || rnn_hidden == 0 || mixer_embed == 0 || hyper_hidden == 0)
        throw ConfigError("network sizes must be >= 1");
}

void TrainConfig::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("train.gamma must lie in (0, 1)");
    if (!(lr_drqn > 0.0)) throw ConfigError("train.lr_drqn must be > 0");
    if (!(lr_mix > 0.0)) throw ConfigError("train.lr_mix must be > 0");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0))
        throw ConfigError("train epsilon values must lie in [0, 1]");
    if (!(epsilon_decay_fraction > 0.0 && epsilon_decay_fraction <= 1.0))
        throw ConfigError("train.epsilon_decay_fraction must lie in (0, 1]");
    if (target_period < 1) throw ConfigError("train.target_period must be >= 1");
    if (batch_episodes < 1) throw ConfigError("train.batch_episodes must be >= 1");
    if (buffer_capacity < batch_episodes)
        throw ConfigError("train.buffer_capacity must be >= train.batch_episodes");
    if (episodes < 1) throw ConfigError("train.episodes must be >= 1");
    if (!(reward_scale > 0.0)) throw ConfigError("train.reward_scale must be > 0");
}

double TrainConfig::epsilon_at(std::size_t step, std::size_t total_steps) const {
    const double horizon = epsilon_decay_fraction * static_cast<double>(total_steps);
    const double frac = horizon > 0.0 ? std::min(1.0, static_cast<double>(step) / horizon) : 1.0;
    return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

Learner::Learner(Algorithm algorithm, std::size_t agents, std::size_t actions, const NetworkConfig& net,
                 std::uint64_t seed)
    : algorithm_(algorithm), actions_(actions) {
    net.validate();
    if (agents == 0 || actions == 0) throw ConfigError("learner needs >= 1 agent and >= 1 action");
    std::mt19937_64 rng(seed);
    const nn::QNetSizes qs{kObservationSize, net.agent_body, net.rnn_hidden, actions};
    for (std::size_t i = 0; i < agents; ++i) {
        const std::string tag = "agent" + std::to_string(i);
        agents_eval.emplace_back(qs, tag + ".eval");
        agents_eval.back().init(rng);
        agents_target.emplace_back(qs, tag + ".target");
        nn::copy_values(nn::as_const(agents_eval.back().parameters()), agents_target.back().parameters());
        agent_optimizers.emplace_back();
    }
    const std::size_t mixers = algorithm == Algorithm::double_qmix ? 2 : (algorithm == Algorithm::qmix ? 1 : 0);
    const nn::MixerSizes ms{agents, agents * kObservationSize, net.mixer_embed, net.hyper_hidden};
    for (std::size_t m = 0; m < mixers; ++m) {
        const std::string tag = m == 0 ? "mixA" : "mixB";
        mixers_eval.emplace_back(ms, tag + ".eval");
        mixers_eval.back().init(rng);
        mixers_target.emplace_back(ms, tag + ".target");
        nn::copy_values(nn::as_const(mixers_eval.back().parameters()), mixers_target.back().parameters());
    }
}

nn::ParamRefs Learner::agent_parameters(std::size_t agent) { return agents_eval.at(agent).parameters(); }

nn::ParamRefs Learner::mixer_parameters() {
    nn::ParamRefs out;
    for (auto& m : mixers_eval)
        for (nn::Parameter* p : m.parameters()) out.push_back(p);
    return out;
}

nn::ParamRefs Learner::all_parameters() {
    nn::ParamRefs out;
    for (auto& a : agents_eval)
        for (nn::Parameter* p : a.parameters()) out.push_back(p);
    for (auto& m : mixers_eval)
        for (nn::Parameter* p : m.parameters()) out.push_back(p);
    for (auto& a : agents_target)
        for (nn::Parameter* p : a.parameters()) out.push_back(p);
    for (auto& m : mixers_target)
        for (nn::Parameter* p : m.parameters()) out.push_back(p);
    return out;
}

nn::ConstParamRefs Learner::all_parameters() const {
    return nn::as_const(const_cast<Learner*>(this)->all_parameters());
}

TargetBatch compute_targets(std::span<const EpisodeRecord* const> batch, const Learner& learner,
                            double gamma) {
    TargetBatch out;
    for (const EpisodeRecord* ep : batch) {
        std::vector<QTrace> q_eval, q_target;
        for (std::size_t i = 0; i < learner.agent_count(); ++i) {
            q_eval.push_back(unroll_agent(learner.agents_eval[i], *ep, i, nullptr));
            q_target.push_back(unroll_agent(learner.agents_target[i], *ep, i, nullptr));
        }
        out.episodes.push_back(targets_for_episode(*ep, q_eval, q_target, learner, gamma, out));
    }
    return out;
}

TrainLosses train_step(std::span<const EpisodeRecord* const> batch, Learner& learner,
                       const TrainConfig& config) {
    const std::size_t I = learner.agent_count();
    TrainLosses losses;
    losses.agent_loss.assign(I, 0.0);
    if (learner.algorithm() == Algorithm::random || batch.empty()) return losses;

    for (auto& a : learner.agents_eval) nn::zero_grads(a.parameters());
    nn::zero_grads(learner.mixer_parameters());

    std::size_t samples = 0;
    for (const EpisodeRecord* ep : batch) samples += ep->length();
    const double inv_n = 1.0 / static_cast<double>(samples);
    const bool mixer_algo = uses_mixers(learner.algorithm());
    const bool through_mixer = mixer_algo && config.agent_loss_mode == AgentLossMode::mixer_grad;

    TargetBatch stats;
    for (const EpisodeRecord* ep : batch) {
        const std::size_t T = ep->length();
        std::vector<QTrace> q_eval, q_target;
        std::vector<std::vector<nn::RecurrentQNet::StepCache>> caches(I);
        for (std::size_t i = 0; i < I; ++i) {
            q_eval.push_back(unroll_agent(learner.agents_eval[i], *ep, i, &caches[i]));
            q_target.push_back(unroll_agent(learner.agents_target[i], *ep, i, nullptr));
        }
        const EpisodeTargets tg = targets_for_episode(*ep, q_eval, q_target, learner, config.gamma, stats);

        std::vector<QTrace> grad_q(I, QTrace(T, std::vector<double>(learner.action_count(), 0.0)));
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<double> chosen(I);
            for (std::size_t i = 0; i < I; ++i) chosen[i] = q_eval[i][t][ep->joint_action[t][i]];

            if (mixer_algo) {
                for (auto& mixer : learner.mixers_eval) {
                    nn::MonotonicMixer::Cache cache;
                    const double q_tot = mixer.forward(ep->state[t], chosen, &cache);
                    const double err = tg.y[t] - q_tot;
                    losses.mixer_loss += err * err * inv_n;
                    const auto d_q = mixer.backward(cache, -2.0 * err * inv_n);
                    if (through_mixer)
                        for (std::size_t i = 0; i < I; ++i) grad_q[i][t][ep->joint_action[t][i]] += d_q[i];
                }
            }
            for (std::size_t i = 0; i < I; ++i) {
                const double err = tg.agent_y[t][i] - chosen[i];
                losses.agent_loss[i] += err * err * inv_n;
                if (!through_mixer) grad_q[i][t][ep->joint_action[t][i]] += -2.0 * err * inv_n;
            }
        }
        for (std::size_t i = 0; i < I; ++i) learner.agents_eval[i].backward_sequence(caches[i], grad_q[i]);
    }

    if (!std::isfinite(losses.mixer_loss))
        throw DivergenceError("non-finite mixer loss at train step " + std::to_string(learner.train_steps));
    for (std::size_t i = 0; i < I; ++i)
        if (!std::isfinite(losses.agent_loss[i]))
            throw DivergenceError("non-finite loss for agent " + std::to_string(i) + " at train step " +
                                  std::to_string(learner.train_steps));

    for (std::size_t i = 0; i < I; ++i)
        learner.agent_optimizers[i].step(learner.agent_parameters(i), config.lr_drqn);
    if (mixer_algo) learner.mixer_optimizer.step(learner.mixer_parameters(), config.lr_mix);
    ++learner.train_steps;

    losses.double_q_checks = stats.checks;
    losses.double_q_violations = stats.double_q_violations;
    if (config.debug_checks && stats.double_q_violations > 0)
        throw Error("double-Q target exceeded a target mixer bound in " +
                    std::to_string(stats.double_q_violations) + " slots");
    return losses;
}

bool sync_targets(Learner& learner, std::size_t episode_index, std::size_t period) {
    if (period == 0 || episode_index % period != 0) return false;
    for (std::size_t i = 0; i < learner.agent_count(); ++i)
        nn::copy_values(nn::as_const(learner.agents_eval[i].parameters()), learner.agents_target[i].parameters());
    for (std::size_t m = 0; m < learner.mixers_eval.size(); ++m)
        nn::copy_values(nn::as_const(learner.mixers_eval[m].parameters()), learner.mixers_target[m].parameters());
    ++learner.target_syncs;
    return true;
}

}  // namespace evcs::marl
