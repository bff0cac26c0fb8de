#include <doctest.h>

#include <cmath>
#include <random>

#include "evcs/error.hpp"
#include "evcs/oracle/oracle.hpp"
#include "tiny_instances.hpp"

using namespace evcs;
using namespace evcs::oracle;

namespace {

// One station that can buy 10 kWh cheap and sell it back later.
TinyInstance arbitrage_case() {
    TinyInstance inst;
    inst.spec.params.capacity_max = 100.0;
    inst.spec.params.soc_min = 0.05;
    inst.spec.params.soc_max = 0.15;
    inst.spec.params.leakage_beta = 1.0;
    inst.spec.grid.supply_fractions = {1.0};
    inst.spec.grid.control_levels = 2;
    auto& ep = inst.episode;
    ep.quotes = {core::PriceQuote::from_utility(0.05, {}), core::PriceQuote::from_utility(0.50, {})};
    ep.renewables = {{0.0}, {0.0}};
    ep.arrivals = {{{}}, {{}}};
    ep.initial = {{5.0, 0.0, 0.0}};
    return inst;
}

marl::EpisodeRecord random_sequence(const TinyInstance& inst, std::mt19937_64& rng) {
    return marl::run_policy(inst.episode, inst.spec, marl::random_policy(rng), 1.0);
}

}  // namespace

TEST_CASE("exhaustive search on the arbitrage case") {
    const auto inst = arbitrage_case();
    const auto res = brute_force(inst);
    CHECK(res.profit == doctest::Approx(3.5).epsilon(1e-12));
    REQUIRE(res.actions.size() == 2);
    CHECK(res.actions[0][0] == 1);  // charge to the top
    CHECK(res.actions[1][0] == 0);  // discharge to the floor
    CHECK(res.nodes > 0);
    CHECK(res.fingerprint == inst.episode.fingerprint());

    const auto rec = replay_sequence(inst.episode, inst.spec, res.actions);
    CHECK(std::abs(rec.total_profit() - res.profit) <= 1e-9);

    const auto greedy = rolling_greedy(inst.episode, inst.spec, 2);
    CHECK(greedy.profit == doctest::Approx(3.5).epsilon(1e-12));
    // A one-slot window never pays for a purchase it cannot yet resell.
    CHECK(rolling_greedy(inst.episode, inst.spec, 1).profit == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("idle instance has zero optimum") {
    auto inst = arbitrage_case();
    // Flat prices: every purchase is resold at a loss, so holding is optimal.
    inst.episode.quotes = {core::PriceQuote::from_utility(0.1, {}), core::PriceQuote::from_utility(0.1, {})};
    const auto res = brute_force(inst);
    CHECK(res.profit == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(res.actions == JointSequence{{0}, {0}});
}

TEST_CASE("exhaustive search dominates random, lookahead and fixed plans") {
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 25; ++k) {
        const auto inst = random_tiny(rng, 2, 3);
        const auto best = brute_force(inst);
        const auto full = rolling_greedy(inst.episode, inst.spec, 3);
        const auto one = rolling_greedy(inst.episode, inst.spec, 1);
        CHECK(std::abs(full.profit - best.profit) <= 1e-9);
        CHECK(one.profit <= best.profit + 1e-9);
        for (int r = 0; r < 5; ++r) CHECK(random_sequence(inst, rng).total_profit() <= best.profit + 1e-9);
        const auto replay = replay_sequence(inst.episode, inst.spec, best.actions);
        CHECK(std::abs(replay.total_profit() - best.profit) <= 1e-9);
        CHECK(std::abs(replay_sequence(inst.episode, inst.spec, one.actions).total_profit() - one.profit) <= 1e-9);
    }
}

TEST_CASE("size limits and budgets") {
    std::mt19937_64 rng(5);
    auto big = random_tiny(rng, 2, 5);
    CHECK_THROWS_AS(brute_force(big), ConfigError);
    auto wide = random_tiny(rng, 4, 2);
    CHECK_THROWS_AS(brute_force(wide), ConfigError);
    auto many = random_tiny(rng, 2, 2);
    many.spec.grid.control_levels = 5;  // K = 10
    CHECK_THROWS_AS(brute_force(many), ConfigError);

    // 3 stations, 4 slots, K = 6: 6^12 > 1e7
    auto heavy = random_tiny(rng, 3, 4);
    CHECK_THROWS_AS(brute_force(heavy), BudgetExceeded);

    auto inst = random_tiny(rng, 2, 3);
    CHECK_THROWS_AS(rolling_greedy(inst.episode, inst.spec, 0), ConfigError);
    marl::EnvSpec huge = inst.spec;
    huge.grid.supply_fractions = {0.0, 0.25, 0.5, 0.75, 1.0};
    huge.grid.control_levels = 20;  // K = 100, window of 3 slots: 100^6 leaves
    CHECK_THROWS_AS(rolling_greedy(inst.episode, huge, 3), BudgetExceeded);
}

TEST_CASE("gap comparison") {
    const std::uint64_t fp = 77;
    const auto gaps = compare({{"oracle", fp, 10.0}, {"greedy-2", fp, 8.0}, {"random", fp, -2.0}}, 10.0, fp);
    REQUIRE(gaps.size() == 3);
    CHECK(gaps[0].absolute == 0.0);
    CHECK(gaps[0].relative == 0.0);
    CHECK(gaps[1].absolute == doctest::Approx(2.0));
    CHECK(gaps[1].relative == doctest::Approx(0.2));
    CHECK(gaps[2].absolute == doctest::Approx(12.0));
    for (const auto& g : gaps) CHECK(g.absolute >= 0.0);
    CHECK(compare({{"x", fp, 0.0}}, 0.0, fp)[0].relative == 0.0);
    CHECK_THROWS_AS(compare({{"other", fp + 1, 1.0}}, 10.0, fp), ConfigError);
}
