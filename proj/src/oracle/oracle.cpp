#include "evcs/oracle/oracle.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "evcs/error.hpp"

namespace evcs::oracle {

namespace {

double leaf_count(std::size_t actions, std::size_t stations, std::size_t slots) {
    return std::pow(static_cast<double>(actions), static_cast<double>(stations * slots));
}

// Depth-first search over slots [slot, end) from `states`.
class Search {
public:
    Search(const data::Episode& episode, const marl::EnvSpec& spec, std::size_t end)
        : ep_(episode), spec_(spec), end_(end) {}

    double best = -std::numeric_limits<double>::infinity();
    JointSequence best_plan;
    std::uint64_t nodes = 0;

    void run(const std::vector<core::StationState>& states, std::size_t slot) {
        plan_.clear();
        best = -std::numeric_limits<double>::infinity();
        best_plan.clear();
        visit(states, slot, 0.0);
    }

private:
    void visit(const std::vector<core::StationState>& states, std::size_t slot, double acc) {
        if (slot == end_) {
            if (acc > best) {
                best = acc;
                best_plan = plan_;
            }
            return;
        }
        const std::size_t n = states.size();
        std::vector<marl::ActionMenu> menus;
        std::vector<std::vector<std::size_t>> feasible(n);
        for (std::size_t i = 0; i < n; ++i) {
            menus.push_back(marl::build_menu(states[i], ep_.renewables[slot][i], spec_.params, spec_.grid));
            for (std::size_t k = 0; k < menus[i].mask.size(); ++k)
                if (menus[i].mask[k]) feasible[i].push_back(k);
        }
        const auto next = ep_.next_arrivals(slot);
        std::vector<std::size_t> odo(n, 0);
        std::vector<core::StationAction> actions(n);
        std::vector<std::size_t> joint(n);
        for (;;) {
            for (std::size_t i = 0; i < n; ++i) {
                joint[i] = feasible[i][odo[i]];
                actions[i] = menus[i].actions[joint[i]];
            }
            const auto out = core::step(states, actions, ep_.renewables[slot], ep_.quotes[slot], next, spec_.params);
            ++nodes;
            plan_.push_back(joint);
            visit(out.next_states, slot + 1, acc + out.profit.total_profit);
            plan_.pop_back();

            // Odometer with station 0 as the most significant digit.
            std::size_t d = n;
            while (d > 0) {
                --d;
                if (++odo[d] < feasible[d].size()) break;
                odo[d] = 0;
                if (d == 0) return;
            }
            if (n == 0) return;
        }
    }

    const data::Episode& ep_;
    const marl::EnvSpec& spec_;
    std::size_t end_;
    JointSequence plan_;
};

}  // namespace

void TinyInstance::validate() const {
    const std::size_t I = episode.station_count();
    const std::size_t T = episode.length();
    const std::size_t K = spec.grid.size();
    if (I == 0 || I > kMaxTinyStations)
        throw ConfigError("tiny instance needs 1.." + std::to_string(kMaxTinyStations) + " stations");
    if (T == 0 || T > kMaxTinySlots)
        throw ConfigError("tiny instance needs 1.." + std::to_string(kMaxTinySlots) + " slots");
    if (K > kMaxTinyActions)
        throw ConfigError("tiny instance action grid has " + std::to_string(K) + " actions, limit " +
                          std::to_string(kMaxTinyActions));
    const double leaves = leaf_count(K, I, T);
    if (leaves > kTinyBudget)
        throw BudgetExceeded("enumeration needs " + std::to_string(leaves) + " leaves, budget " +
                             std::to_string(kTinyBudget));
}

OracleResult brute_force(const TinyInstance& instance) {
    instance.validate();
    const auto t0 = std::chrono::steady_clock::now();
    Search search(instance.episode, instance.spec, instance.episode.length());
    search.run(instance.episode.initial, 0);
    OracleResult out;
    out.profit = search.best;
    out.actions = std::move(search.best_plan);
    out.nodes = search.nodes;
    out.fingerprint = instance.episode.fingerprint();
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

GreedyResult rolling_greedy(const data::Episode& episode, const marl::EnvSpec& spec, std::size_t lookahead) {
    if (lookahead == 0) throw ConfigError("greedy lookahead must be >= 1");
    const std::size_t T = episode.length();
    const std::size_t window = std::min(lookahead, T);
    const double leaves = leaf_count(spec.grid.size(), episode.station_count(), window);
    if (leaves > kGreedyBudget)
        throw BudgetExceeded("greedy window needs " + std::to_string(leaves) + " leaves per slot, budget " +
                             std::to_string(kGreedyBudget));

    GreedyResult out;
    out.fingerprint = episode.fingerprint();
    marl::Environment env(episode, spec);
    while (!env.done()) {
        const std::size_t t = env.slot();
        Search search(episode, spec, std::min(t + window, T));
        search.run(env.states(), t);
        out.nodes += search.nodes;
        const auto& joint = search.best_plan.front();
        out.actions.push_back(joint);
        out.profit += env.step(joint, &out.trace).profit.total_profit;
    }
    return out;
}

marl::EpisodeRecord replay_sequence(const data::Episode& episode, const marl::EnvSpec& spec,
                                    const JointSequence& actions, std::vector<marl::TraceRow>* trace) {
    if (actions.size() != episode.length()) throw ShapeError("action sequence length differs from episode length");
    marl::JointPolicy policy = [&](const marl::Environment& env, std::span<const marl::ActionMenu>) {
        return actions[env.slot()];
    };
    return marl::run_policy(episode, spec, policy, 1.0, trace);
}

std::vector<Gap> compare(const std::vector<RunProfit>& runs, double bound, std::uint64_t bound_fingerprint) {
    std::vector<Gap> out;
    for (const auto& r : runs) {
        if (r.fingerprint != bound_fingerprint)
            throw ConfigError("run '" + r.algorithm + "' was played on a different episode than the bound");
        Gap g;
        g.algorithm = r.algorithm;
        g.profit = r.profit;
        g.bound = bound;
        g.absolute = bound - r.profit;
        if (bound != 0.0)
            g.relative = g.absolute / std::abs(bound);
        else
            g.relative = g.absolute == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), g.absolute);
        out.push_back(g);
    }
    return out;
}

}  // namespace evcs::oracle
