#include "evcs/marl/rollout.hpp"

#include "evcs/error.hpp"

namespace evcs::marl {

Environment::Environment(const data::Episode& episode, const EnvSpec& spec)
    : episode_(&episode), spec_(spec) {
    spec_.params.validate();
    spec_.grid.validate();
    spec_.scales.validate();
    if (episode.length() == 0) throw ConfigError("episode must have at least one slot");
    reset();
}

void Environment::reset() {
    slot_ = 0;
    states_ = episode_->initial;
}

std::vector<Observation> Environment::observations() const {
    double total = 0.0;
    for (const auto& s : states_) total += s.total_demand();
    std::vector<Observation> out;
    out.reserve(states_.size());
    const auto& quote = episode_->quotes[slot_];
    for (std::size_t i = 0; i < states_.size(); ++i)
        out.push_back(encode_observation(states_[i], total, quote, episode_->renewables[slot_][i],
                                         spec_.scales, spec_.params));
    return out;
}

std::vector<double> Environment::global_state() const {
    std::vector<double> out;
    for (const auto& o : observations()) out.insert(out.end(), o.begin(), o.end());
    return out;
}

std::vector<ActionMenu> Environment::menus() const {
    std::vector<ActionMenu> out;
    out.reserve(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i)
        out.push_back(build_menu(states_[i], episode_->renewables[slot_][i], spec_.params, spec_.grid));
    return out;
}

core::StepOutcome Environment::step(std::span<const std::size_t> joint_action, std::vector<TraceRow>* trace) {
    if (done()) throw Error("step called on a finished episode");
    if (joint_action.size() != states_.size()) throw ShapeError("joint action size differs from station count");
    std::vector<core::StationAction> actions;
    actions.reserve(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i)
        actions.push_back(decode_action(joint_action[i], states_[i], episode_->renewables[slot_][i],
                                        spec_.params, spec_.grid));
    const auto next = episode_->next_arrivals(slot_);
    auto outcome = core::step(states_, actions, episode_->renewables[slot_], episode_->quotes[slot_], next,
                              spec_.params);
    if (trace) {
        for (std::size_t i = 0; i < states_.size(); ++i) {
            TraceRow row;
            row.slot = slot_;
            row.station = i;
            row.utility_price = episode_->quotes[slot_].utility;
            row.renewable = episode_->renewables[slot_][i];
            row.urgent = states_[i].urgent_demand;
            row.regular = states_[i].regular_demand;
            row.ev_supply = actions[i].ev_supply;
            row.ess_control = actions[i].ess_control;
            row.matched_buy = outcome.trade.matched_buy[i];
            row.matched_sell = outcome.trade.matched_sell[i];
            row.utility_buy = outcome.trade.utility_buy[i];
            row.utility_sell = outcome.trade.utility_sell[i];
            row.battery = states_[i].battery_kwh;
            row.soc = core::soc(states_[i], spec_.params);
            row.station_profit = outcome.profit.station_profit[i];
            row.curtailed = outcome.curtailed_kwh[i];
            trace->push_back(row);
        }
    }
    states_ = outcome.next_states;
    ++slot_;
    return outcome;
}

ActResult act_epsilon_greedy(const nn::RecurrentQNet& agent, const Observation& obs,
                             std::span<const double> hidden, double epsilon,
                             std::span<const std::uint8_t> mask, std::mt19937_64& rng) {
    auto out = agent.forward(obs, hidden);
    ActResult res;
    res.hidden = std::move(out.hidden);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
        std::vector<std::size_t> feasible;
        for (std::size_t k = 0; k < mask.size(); ++k)
            if (mask[k]) feasible.push_back(k);
        if (feasible.empty()) throw InfeasibleAction("epsilon-greedy over an empty mask");
        std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
        res.action = feasible[pick(rng)];
    } else {
        res.action = masked_argmax(out.q, mask);
    }
    return res;
}

namespace {

EpisodeRecord start_record(const Environment& env, std::size_t actions) {
    EpisodeRecord rec;
    rec.agents = env.station_count();
    rec.actions = actions;
    rec.station_profit.assign(rec.agents, 0.0);
    return rec;
}

void record_slot(EpisodeRecord& rec, const Environment& env, std::span<const ActionMenu> menus,
                 std::vector<std::size_t> joint) {
    rec.obs.push_back(env.observations());
    rec.state.push_back(env.global_state());
    std::vector<std::uint8_t> masks;
    for (const auto& m : menus) masks.insert(masks.end(), m.mask.begin(), m.mask.end());
    rec.masks.push_back(std::move(masks));
    rec.joint_action.push_back(std::move(joint));
}

void record_outcome(EpisodeRecord& rec, const core::StepOutcome& outcome, double reward_scale) {
    rec.profit.push_back(outcome.profit.total_profit);
    rec.reward.push_back(outcome.profit.total_profit * reward_scale);
    for (std::size_t i = 0; i < rec.agents; ++i) rec.station_profit[i] += outcome.profit.station_profit[i];
}

}  // namespace

EpisodeRecord run_policy(const data::Episode& episode, const EnvSpec& spec, const JointPolicy& policy,
                         double reward_scale, std::vector<TraceRow>* trace) {
    Environment env(episode, spec);
    EpisodeRecord rec = start_record(env, spec.grid.size());
    while (!env.done()) {
        const auto menus = env.menus();
        auto joint = policy(env, menus);
        record_slot(rec, env, menus, joint);
        const auto outcome = env.step(joint, trace);
        record_outcome(rec, outcome, reward_scale);
    }
    return rec;
}

EpisodeRecord rollout_episode(const data::Episode& episode, const EnvSpec& spec, const Learner& learner,
                              const std::function<double(std::size_t)>& epsilon_at, std::mt19937_64& rng,
                              double reward_scale, std::vector<TraceRow>* trace) {
    if (learner.agent_count() != episode.station_count() || learner.action_count() != spec.grid.size())
        throw ShapeError("learner shape does not match the episode and action grid");
    std::vector<std::vector<double>> hidden;
    for (const auto& a : learner.agents_eval) hidden.push_back(a.initial_hidden());
    JointPolicy policy = [&](const Environment& env, std::span<const ActionMenu> menus) {
        const double eps = epsilon_at(env.slot());
        const auto obs = env.observations();
        std::vector<std::size_t> joint(env.station_count());
        for (std::size_t i = 0; i < joint.size(); ++i) {
            auto res = act_epsilon_greedy(learner.agents_eval[i], obs[i], hidden[i], eps, menus[i].mask, rng);
            joint[i] = res.action;
            hidden[i] = std::move(res.hidden);
        }
        return joint;
    };
    return run_policy(episode, spec, policy, reward_scale, trace);
}

JointPolicy random_policy(std::mt19937_64& rng) {
    return [&rng](const Environment& env, std::span<const ActionMenu> menus) {
        std::vector<std::size_t> joint(env.station_count());
        for (std::size_t i = 0; i < joint.size(); ++i) {
            std::vector<std::size_t> feasible;
            for (std::size_t k = 0; k < menus[i].mask.size(); ++k)
                if (menus[i].mask[k]) feasible.push_back(k);
            std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
            joint[i] = feasible[pick(rng)];
        }
        return joint;
    };
}

}  // namespace evcs::marl
