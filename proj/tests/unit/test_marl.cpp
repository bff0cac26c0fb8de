#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "evcs/app/config.hpp"
#include "evcs/app/scenario_builder.hpp"
#include "evcs/error.hpp"
#include "evcs/marl/learner.hpp"
#include "evcs/marl/observation.hpp"
#include "evcs/marl/replay.hpp"
#include "evcs/marl/rollout.hpp"
#include "evcs/marl/trainer.hpp"

using namespace evcs;
using namespace evcs::marl;

namespace {

const NetworkConfig kSmallNet{8, 8, 4, 8};

void zero_all(const nn::ParamRefs& params) {
    for (nn::Parameter* p : params) std::fill(p->value.data.begin(), p->value.data.end(), 0.0);
}

// Turns a mixer into the constant c by zeroing everything but the output bias.
void make_constant(nn::MonotonicMixer& m, double c) {
    zero_all(m.parameters());
    m.hyper_b2.layers.back().bias.value(0, 0) = c;
}

nn::Parameter& head_bias(nn::RecurrentQNet& net) {
    auto params = net.parameters();
    return *params.back();
}

EpisodeRecord blank_record(std::size_t agents, std::size_t actions, std::size_t slots) {
    EpisodeRecord r;
    r.agents = agents;
    r.actions = actions;
    r.station_profit.assign(agents, 0.0);
    for (std::size_t t = 0; t < slots; ++t) {
        std::vector<Observation> obs(agents);
        for (std::size_t i = 0; i < agents; ++i)
            for (std::size_t k = 0; k < kObservationSize; ++k) obs[i][k] = 0.1 * static_cast<double>(t + i + k);
        std::vector<double> state;
        for (const auto& o : obs) state.insert(state.end(), o.begin(), o.end());
        r.obs.push_back(obs);
        r.state.push_back(state);
        r.joint_action.push_back(std::vector<std::size_t>(agents, t % actions));
        r.masks.push_back(std::vector<std::uint8_t>(agents * actions, 1));
        r.reward.push_back(0.0);
        r.profit.push_back(0.0);
    }
    return r;
}

app::RunConfig small_config() {
    app::RunConfig cfg;
    cfg.scenario.slots = 12;
    cfg.network = kSmallNet;
    cfg.train.episodes = 30;
    cfg.train.batch_episodes = 4;
    cfg.train.buffer_capacity = 16;
    cfg.train.reward_scale = 0.01;
    return cfg;
}

}  // namespace

TEST_CASE("observation encoding") {
    const core::EssParams params;
    const ObservationScales scales;
    SUBCASE("empty station") {
        const auto o = encode_observation({0.0, 0.0, 0.0}, 0.0, {}, 0.0, scales, params);
        CHECK(o[1] == 0.0);
        for (std::size_t k : {0, 2, 3, 4, 5}) CHECK(o[k] == 0.0);
        const auto half = encode_observation({100.0, 0.0, 0.0}, 0.0, {}, 0.0, scales, params);
        CHECK(half[1] == doctest::Approx(0.5));
    }
    SUBCASE("aggregate demand over two stations") {
        data::Episode ep;
        ep.quotes = {core::PriceQuote::from_utility(0.1, {})};
        ep.renewables = {{0.0, 0.0}};
        ep.arrivals = {{{4.0, 6.0}, {3.0, 7.0}}};
        ep.initial = {{100.0, 4.0, 6.0}, {100.0, 3.0, 7.0}};
        Environment env(ep, EnvSpec{});
        const auto obs = env.observations();
        CHECK(obs[0][0] == doctest::Approx(20.0 / scales.total_demand));
        CHECK(obs[1][0] == obs[0][0]);
        CHECK(env.global_state().size() == 2 * kObservationSize);
    }
    SUBCASE("unit price scale") {
        ObservationScales s;
        s.price = 1.0;
        const auto o = encode_observation({}, 0.0, core::PriceQuote::from_utility(0.10, {}), 0.0, s, params);
        CHECK(o[5] == doctest::Approx(0.10));
    }
}

TEST_CASE("action grid decoding") {
    const core::EssParams params;
    const ActionGrid grid;
    CHECK(control_levels({-84.0, 96.0}, 5) == std::vector<double>{-84.0, -39.0, 6.0, 51.0, 96.0});
    CHECK(grid.size() == 15);

    const core::StationState st{100.0, 4.0, 10.0};
    const auto full = decode_action(2 * grid.control_levels, st, 0.0, params, grid);
    CHECK(full.ev_supply == 14.0);
    const auto none = decode_action(0, st, 0.0, params, grid);
    CHECK(none.ev_supply == 4.0);
    CHECK_THROWS_AS(decode_action(15, st, 0.0, params, grid), InfeasibleAction);

    const auto menu = build_menu(st, 20.0, params, grid);
    CHECK(menu.actions.size() == 15);
    CHECK(menu.feasible_count() == 15);
}

TEST_CASE("masked argmax and epsilon-greedy") {
    const std::vector<std::uint8_t> all{1, 1, 1};
    CHECK(masked_argmax(std::vector<double>{1, 3, 2}, all) == 1);
    CHECK(masked_argmax(std::vector<double>{1, 3, 2}, std::vector<std::uint8_t>{1, 0, 1}) == 2);
    CHECK(masked_argmax(std::vector<double>{2, 2, 1}, all) == 0);
    CHECK_THROWS_AS(masked_argmax(std::vector<double>{1, 2}, std::vector<std::uint8_t>{0, 0}), InfeasibleAction);

    nn::RecurrentQNet net({kObservationSize, 4, 4, 3}, "agent");
    head_bias(net).value.data = {1.0, 3.0, 2.0};
    std::mt19937_64 rng(1);
    const Observation obs{};
    const auto h0 = net.initial_hidden();
    CHECK(act_epsilon_greedy(net, obs, h0, 0.0, all, rng).action == 1);
    CHECK(act_epsilon_greedy(net, obs, h0, 0.0, std::vector<std::uint8_t>{1, 0, 1}, rng).action == 2);

    SUBCASE("epsilon one is uniform over the mask") {
        nn::RecurrentQNet wide({kObservationSize, 4, 4, 7}, "agent");
        const std::vector<std::uint8_t> mask{1, 0, 1, 1, 0, 1, 1};
        std::map<std::size_t, int> counts;
        const int draws = 10000;
        for (int k = 0; k < draws; ++k) ++counts[act_epsilon_greedy(wide, obs, h0, 1.0, mask, rng).action];
        CHECK(counts.count(1) == 0);
        CHECK(counts.count(4) == 0);
        double chi2 = 0.0;
        const double expected = draws / 5.0;
        for (const auto& [a, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
        // 4 degrees of freedom, p = 0.001
        CHECK(chi2 < 18.47);
    }
}

TEST_CASE("double-Q targets") {
    Learner dq(Algorithm::double_qmix, 2, 3, kSmallNet, 5);
    make_constant(dq.mixers_target[0], 2.0);
    make_constant(dq.mixers_target[1], 3.0);
    auto rec = blank_record(2, 3, 2);
    rec.reward = {1.0, 5.0};
    const EpisodeRecord* batch[] = {&rec};

    const auto tg = compute_targets(batch, dq, 0.99);
    REQUIRE(tg.episodes.size() == 1);
    CHECK(tg.episodes[0].y[0] == doctest::Approx(2.98).epsilon(1e-15));
    CHECK(tg.episodes[0].y[1] == 5.0);
    CHECK(tg.checks == 1);
    CHECK(tg.double_q_violations == 0);

    SUBCASE("equal mixers reduce to the single-mixer target") {
        make_constant(dq.mixers_target[1], 2.0);
        Learner qm(Algorithm::qmix, 2, 3, kSmallNet, 5);
        make_constant(qm.mixers_target[0], 2.0);
        const auto a = compute_targets(batch, dq, 0.99);
        const auto b = compute_targets(batch, qm, 0.99);
        CHECK(a.episodes[0].y == b.episodes[0].y);
    }
    SUBCASE("independent learners bootstrap from their own target values") {
        Learner iq(Algorithm::independent_dqn, 2, 3, kSmallNet, 5);
        for (auto* net : {&iq.agents_target[0], &iq.agents_target[1]}) {
            zero_all(net->parameters());
            head_bias(*net).value.data = {1.0, 1.0, 1.0};
        }
        const auto t = compute_targets(batch, iq, 0.5);
        CHECK(t.episodes[0].agent_y[0][0] == doctest::Approx(1.5));
        CHECK(t.episodes[0].agent_y[0][1] == doctest::Approx(1.5));
    }
}

TEST_CASE("train step losses") {
    TrainConfig cfg;
    SUBCASE("single terminal transition, constant mixers") {
        Learner dq(Algorithm::double_qmix, 2, 3, kSmallNet, 5);
        make_constant(dq.mixers_eval[0], 0.3);
        make_constant(dq.mixers_eval[1], -0.2);
        auto rec = blank_record(2, 3, 1);
        rec.reward = {1.0};
        const EpisodeRecord* batch[] = {&rec};
        const auto losses = train_step(batch, dq, cfg);
        // (1 - 0.3)^2 + (1 + 0.2)^2
        CHECK(std::abs(losses.mixer_loss - 1.93) <= 1e-12);
    }
    SUBCASE("targets equal to current values give zero loss and no movement") {
        Learner dq(Algorithm::double_qmix, 2, 3, kSmallNet, 5);
        zero_all(dq.all_parameters());
        auto rec = blank_record(2, 3, 4);
        const EpisodeRecord* batch[] = {&rec};
        const auto losses = train_step(batch, dq, cfg);
        CHECK(losses.mixer_loss == 0.0);
        for (double l : losses.agent_loss) CHECK(l == 0.0);
        for (const nn::Parameter* p : std::as_const(dq).all_parameters())
            for (double v : p->value.data) CHECK(v == 0.0);
    }
    SUBCASE("repeated steps on a fixed batch reduce the mixer loss") {
        for (AgentLossMode mode : {AgentLossMode::direct, AgentLossMode::mixer_grad}) {
            CAPTURE(agent_loss_mode_name(mode));
            Learner dq(Algorithm::double_qmix, 2, 3, kSmallNet, 5);
            std::vector<EpisodeRecord> recs;
            for (int e = 0; e < 3; ++e) {
                auto r = blank_record(2, 3, 6);
                for (std::size_t t = 0; t < 6; ++t) r.reward[t] = 0.2 * std::sin(static_cast<double>(t + e));
                recs.push_back(r);
            }
            std::vector<const EpisodeRecord*> batch;
            for (const auto& r : recs) batch.push_back(&r);
            TrainConfig c = cfg;
            c.agent_loss_mode = mode;
            const double first = train_step(batch, dq, c).mixer_loss;
            double last = first;
            for (int it = 0; it < 99; ++it) last = train_step(batch, dq, c).mixer_loss;
            CHECK(last < first);
            CHECK(dq.train_steps == 100);
        }
    }
    SUBCASE("random algorithm does not learn") {
        Learner rnd(Algorithm::random, 2, 3, kSmallNet, 5);
        auto rec = blank_record(2, 3, 2);
        rec.reward = {1.0, 1.0};
        const EpisodeRecord* batch[] = {&rec};
        train_step(batch, rnd, cfg);
        CHECK(rnd.train_steps == 0);
    }
}

TEST_CASE("target synchronization") {
    Learner dq(Algorithm::double_qmix, 2, 3, kSmallNet, 5);
    auto rec = blank_record(2, 3, 3);
    rec.reward = {0.5, -0.5, 1.0};
    const EpisodeRecord* batch[] = {&rec};
    train_step(batch, dq, TrainConfig{});

    auto target_snapshot = [&] {
        std::vector<std::vector<double>> out;
        for (const auto& a : dq.agents_target)
            for (const nn::Parameter* p : a.parameters()) out.push_back(p->value.data);
        for (const auto& m : dq.mixers_target)
            for (const nn::Parameter* p : m.parameters()) out.push_back(p->value.data);
        return out;
    };
    const auto before = target_snapshot();
    CHECK_FALSE(sync_targets(dq, 7, 10));
    CHECK(target_snapshot() == before);
    CHECK(dq.agents_eval[0].forward(rec.obs[0][0], dq.agents_eval[0].initial_hidden()).q !=
          dq.agents_target[0].forward(rec.obs[0][0], dq.agents_target[0].initial_hidden()).q);

    CHECK(sync_targets(dq, 10, 10));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 20; ++k) {
        Observation o;
        for (auto& v : o) v = u(rng);
        std::vector<double> h(kSmallNet.rnn_hidden);
        for (auto& v : h) v = u(rng) / 3.0;
        const auto e = dq.agents_eval[1].forward(o, h);
        const auto t = dq.agents_target[1].forward(o, h);
        CHECK(e.q == t.q);
        CHECK(e.hidden == t.hidden);
        std::vector<double> s(dq.state_size());
        for (auto& v : s) v = u(rng);
        const std::vector<double> q{u(rng), u(rng)};
        for (std::size_t m = 0; m < 2; ++m) CHECK(dq.mixers_eval[m].forward(s, q) == dq.mixers_target[m].forward(s, q));
    }
    for (std::size_t e = 1; e <= 5; ++e) CHECK(sync_targets(dq, e, 1));
    CHECK(dq.target_syncs == 6);
}

TEST_CASE("replay buffer") {
    ReplayBuffer buf(3, 1);
    for (int k = 0; k < 5; ++k) {
        auto r = blank_record(1, 2, 1);
        r.reward = {static_cast<double>(k)};
        buf.push(r);
    }
    CHECK(buf.size() == 3);
    const auto s = buf.sample(3);
    std::vector<double> seen;
    for (const auto* r : s) seen.push_back(r->reward[0]);
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<double>{2.0, 3.0, 4.0});
    CHECK_THROWS_AS(buf.sample(4), ConfigError);

    ReplayBuffer a(8, 42), b(8, 42);
    for (int k = 0; k < 8; ++k) {
        auto r = blank_record(1, 2, 1);
        r.reward = {static_cast<double>(k)};
        a.push(r);
        b.push(r);
    }
    for (int trial = 0; trial < 5; ++trial) {
        const auto x = a.sample(4), y = b.sample(4);
        for (std::size_t k = 0; k < 4; ++k) CHECK(x[k]->reward[0] == y[k]->reward[0]);
    }
}

TEST_CASE("rollouts") {
    const auto cfg = small_config();
    const auto sc = app::load_scenario(cfg);
    const auto ep = app::make_episode(sc, cfg, 1, 0);
    const auto spec = cfg.env_spec();

    SUBCASE("record length and reward bookkeeping") {
        Learner dq(Algorithm::double_qmix, 2, spec.grid.size(), kSmallNet, 3);
        std::mt19937_64 rng(2);
        const double scale = 0.01;
        std::vector<TraceRow> trace;
        const auto rec = rollout_episode(ep, spec, dq, [](std::size_t) { return 0.3; }, rng, scale, &trace);
        CHECK(rec.length() == ep.length());
        CHECK(rec.obs.size() == ep.length());
        CHECK(trace.size() == ep.length() * 2);
        double from_reward = 0.0, from_profit = 0.0, from_stations = 0.0;
        for (std::size_t t = 0; t < rec.length(); ++t) {
            from_reward += rec.reward[t] / scale;
            from_profit += rec.profit[t];
        }
        for (double p : rec.station_profit) from_stations += p;
        CHECK(std::abs(from_reward - from_profit) <= 1e-9);
        CHECK(std::abs(from_stations - from_profit) <= 1e-9);
        CHECK(std::abs(rec.total_profit() - from_profit) <= 1e-9);
    }
    SUBCASE("idle stations earn nothing") {
        data::Episode idle;
        const std::size_t T = 6;
        for (std::size_t t = 0; t < T; ++t) {
            idle.quotes.push_back(core::PriceQuote::from_utility(0.1, {}));
            idle.renewables.push_back({0.0, 0.0});
            idle.arrivals.push_back({{}, {}});
        }
        idle.initial = {{100.0, 0.0, 0.0}, {100.0, 0.0, 0.0}};
        EnvSpec s = spec;
        s.params.leakage_beta = 1.0;
        // Symmetric interval (-90, 90): the middle of five levels is exactly 0.
        const JointPolicy hold = [](const Environment& env, std::span<const ActionMenu> menus) {
            for (const auto& m : menus) CHECK(m.actions[2].ess_control == 0.0);
            return std::vector<std::size_t>(env.station_count(), 2);
        };
        const auto rec = run_policy(idle, s, hold, 1.0);
        CHECK(rec.length() == T);
        CHECK(rec.total_profit() == 0.0);
    }
    SUBCASE("masked ids are rejected by the environment") {
        Environment env(ep, spec);
        CHECK_THROWS_AS(env.step(std::vector<std::size_t>{99, 0}), InfeasibleAction);
        CHECK_THROWS_AS(env.step(std::vector<std::size_t>{0}), ShapeError);
    }
}

TEST_CASE("training runs") {
    auto cfg = small_config();
    const auto sc = app::load_scenario(cfg);
    const auto source = app::episode_source(sc, cfg, 7);
    const auto spec = cfg.env_spec();

    SUBCASE("same seed, same metrics") {
        const auto a = train(cfg.train, spec, cfg.network, Algorithm::double_qmix, source, 7);
        const auto b = train(cfg.train, spec, cfg.network, Algorithm::double_qmix, source, 7);
        REQUIRE(a.metrics.size() == cfg.train.episodes);
        for (std::size_t e = 0; e < a.metrics.size(); ++e) {
            CHECK(a.metrics[e].total_profit == b.metrics[e].total_profit);
            CHECK(a.metrics[e].mixer_loss == b.metrics[e].mixer_loss);
            CHECK(a.metrics[e].episode == e + 1);
        }
        CHECK(a.double_q_violations == 0);
        CHECK(a.double_q_checks > 0);
        // Updates start once the buffer holds more than B episodes.
        CHECK_FALSE(a.metrics[cfg.train.batch_episodes - 1].trained);
        CHECK(a.metrics[cfg.train.batch_episodes].trained);
        CHECK(a.metrics.front().epsilon == 1.0);
        CHECK(a.learner.target_syncs == cfg.train.episodes / cfg.train.target_period);
    }
    SUBCASE("random policy has no trend") {
        cfg.train.episodes = 120;
        const auto r = train(cfg.train, spec, cfg.network, Algorithm::random, source, 3);
        const double n = static_cast<double>(r.metrics.size());
        double mx = 0.0, my = 0.0;
        for (const auto& m : r.metrics) {
            mx += static_cast<double>(m.episode);
            my += m.total_profit;
        }
        mx /= n;
        my /= n;
        double sxx = 0.0, sxy = 0.0;
        for (const auto& m : r.metrics) {
            sxx += (m.episode - mx) * (m.episode - mx);
            sxy += (m.episode - mx) * (m.total_profit - my);
        }
        const double slope = sxy / sxx, icpt = my - slope * mx;
        double sse = 0.0;
        for (const auto& m : r.metrics) {
            const double e = m.total_profit - (icpt + slope * m.episode);
            sse += e * e;
        }
        const double se = std::sqrt(sse / (n - 2.0) / sxx);
        CHECK(std::abs(slope / se) < 3.29);
        for (const auto& m : r.metrics) CHECK_FALSE(m.trained);
        CHECK(r.learner.train_steps == 0);
    }
}
