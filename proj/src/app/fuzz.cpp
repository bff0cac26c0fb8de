#include "evcs/app/fuzz.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "evcs/core/microgrid.hpp"
#include "evcs/error.hpp"
#include "evcs/marl/observation.hpp"
#include "evcs/nn/mixer.hpp"

namespace evcs::app {

namespace {

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void fail(FuzzReport& r, const std::string& what) {
    if (r.violations++ == 0) r.first_failure = "case " + std::to_string(r.cases) + ": " + what;
}

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)}); }

double signed_control(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, 9);
    std::uniform_real_distribution<double> mag(0.0, 200.0);
    const int k = kind(rng);
    if (k == 0) return 0.0;
    if (k == 1) return std::round(mag(rng)) * (rng() % 2 ? 1.0 : -1.0);
    return mag(rng) * (rng() % 2 ? 1.0 : -1.0);
}

struct RandomStation {
    core::StationState state;
    double renewable = 0.0;
};

RandomStation random_station(std::mt19937_64& rng, const core::EssParams& p) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RandomStation s;
    const double r = u(rng);
    if (r < 0.1)
        s.state.battery_kwh = p.capacity_min();
    else if (r < 0.2)
        s.state.battery_kwh = p.capacity_upper();
    else
        s.state.battery_kwh = p.capacity_min() + u(rng) * (p.capacity_upper() - p.capacity_min());
    s.state.urgent_demand = u(rng) < 0.2 ? 0.0 : 60.0 * u(rng);
    s.state.regular_demand = u(rng) < 0.2 ? 0.0 : 60.0 * u(rng);
    s.renewable = u(rng) < 0.3 ? 0.0 : (u(rng) < 0.1 ? 2000.0 * u(rng) : 80.0 * u(rng));
    return s;
}

core::EssParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    core::EssParams p;
    p.capacity_max = 50.0 + 300.0 * u(rng);
    p.soc_min = 0.01 + 0.2 * u(rng);
    p.soc_max = p.soc_min + 0.1 + (0.99 - p.soc_min - 0.1) * u(rng);
    p.leakage_beta = u(rng) < 0.2 ? 1.0 : 0.9 + 0.1 * u(rng);
    p.export_cap = u(rng) < 0.5 ? 2000.0 : 5.0 + 100.0 * u(rng);
    p.import_cap = u(rng) < 0.5 ? 2000.0 : 60.0 + 100.0 * u(rng);
    return p;
}

}  // namespace

FuzzReport fuzz_clearing(std::size_t cases, std::uint64_t seed) {
    Timer timer;
    FuzzReport r;
    r.suite = "clearing";
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> count(1, 6);
    for (; r.cases < cases; ++r.cases) {
        std::vector<double> c(count(rng));
        for (double& v : c) v = signed_control(rng);
        const auto t = core::clear_trades(c);
        double buy = 0.0, sell = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            buy += t.matched_buy[i];
            sell += t.matched_sell[i];
            if (t.matched_buy[i] < 0 || t.matched_sell[i] < 0 || t.utility_buy[i] < 0 || t.utility_sell[i] < 0)
                fail(r, "negative flow at station " + std::to_string(i));
            if (t.matched_buy[i] != 0 && t.matched_sell[i] != 0) fail(r, "station both buys and sells internally");
            if (t.utility_buy[i] != 0 && t.utility_sell[i] != 0) fail(r, "station both buys and sells to the utility");
            if (!close(t.matched_buy[i] + t.utility_buy[i], std::max(c[i], 0.0), 1e-12))
                fail(r, "buy split does not add up");
            if (!close(t.matched_sell[i] + t.utility_sell[i], std::max(-c[i], 0.0), 1e-12))
                fail(r, "sell split does not add up");
        }
        if (std::abs(buy - sell) > 1e-9 * std::max({1.0, buy, sell})) fail(r, "matched buy and sell differ");
    }
    r.seconds = timer.seconds();
    return r;
}

FuzzReport fuzz_battery(std::size_t cases, std::uint64_t seed) {
    Timer timer;
    FuzzReport r;
    r.suite = "battery";
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> count(1, 4);
    marl::ActionGrid grid;
    for (; r.cases < cases; ++r.cases) {
        const core::EssParams p = random_params(rng);
        const std::size_t n = count(rng);
        std::vector<core::StationState> states;
        std::vector<double> ren;
        std::vector<core::StationAction> actions;
        bool skip = false;
        for (std::size_t i = 0; i < n && !skip; ++i) {
            const auto s = random_station(rng, p);
            try {
                const auto menu = marl::build_menu(s.state, s.renewable, p, grid);
                std::vector<std::size_t> ok;
                for (std::size_t k = 0; k < menu.mask.size(); ++k)
                    if (menu.mask[k]) ok.push_back(k);
                actions.push_back(menu.actions[ok[rng() % ok.size()]]);
            } catch (const InfeasibleAction&) {
                skip = true;  // urgent deficit above the import cap; no action exists
            }
            states.push_back(s.state);
            ren.push_back(s.renewable);
        }
        if (skip) {
            --r.cases;
            continue;
        }
        core::PriceQuote q = core::PriceQuote::from_utility(0.1, {});
        std::vector<core::Arrivals> next(n);
        try {
            const auto out = core::step(states, actions, ren, q, next, p);
            for (std::size_t i = 0; i < n; ++i) {
                const double b = out.next_states[i].battery_kwh;
                if (b < p.capacity_min() || b > p.capacity_upper()) fail(r, "battery left its range");
                const double raw = p.leakage_beta * states[i].battery_kwh + actions[i].ess_control + out.internal_flow[i];
                if (raw < p.capacity_min() - 1e-9 || raw > p.capacity_upper() + 1e-9)
                    fail(r, "unclamped battery outside range by more than 1e-9");
            }
        } catch (const std::exception& e) {
            fail(r, e.what());
        }
    }
    r.seconds = timer.seconds();
    return r;
}

FuzzReport fuzz_profit(std::size_t cases, std::uint64_t seed) {
    Timer timer;
    FuzzReport r;
    r.suite = "profit";
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> count(1, 6);
    for (; r.cases < cases; ++r.cases) {
        const std::size_t n = count(rng);
        std::vector<double> c(n), supply(n);
        for (std::size_t i = 0; i < n; ++i) {
            c[i] = signed_control(rng);
            supply[i] = 50.0 * u(rng);
        }
        core::PriceMultipliers m;
        m.buyback = 0.5 + 0.3 * u(rng);
        m.trade = m.buyback + (1.0 - m.buyback) * (0.05 + 0.9 * u(rng));
        m.ev = 1.0 + u(rng);
        const auto q = core::PriceQuote::from_utility(0.02 + 0.3 * u(rng), m);
        const auto t = core::clear_trades(c);
        const auto p = core::profit(supply, t, q);
        double total = 0.0, trade_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double expect = supply[i] * q.ev - t.utility_buy[i] * q.utility +
                                  (t.matched_sell[i] - t.matched_buy[i]) * q.trade + t.utility_sell[i] * q.buyback;
            if (!close(p.station_profit[i], expect, 1e-9)) fail(r, "station profit recomputation differs");
            total += expect;
            trade_sum += p.trade_net[i];
        }
        if (!close(p.total_profit, total, 1e-9)) fail(r, "total profit is not the station sum");
        if (std::abs(trade_sum) > 1e-9) fail(r, "trade payments do not cancel");

        core::PriceMultipliers m2 = m;
        m2.trade = m.buyback + (1.0 - m.buyback) * (0.05 + 0.9 * u(rng));
        const auto p2 = core::profit(supply, t, core::PriceQuote::from_utility(q.utility, m2));
        if (std::abs(p2.total_profit - p.total_profit) > 1e-9) fail(r, "total profit moved with the trade price");
    }
    r.seconds = timer.seconds();
    return r;
}

FuzzReport fuzz_monotonicity(std::size_t cases, std::uint64_t seed) {
    Timer timer;
    FuzzReport r;
    r.suite = "monotonicity";
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    const nn::MixerSizes sizes{3, 18, 16, 32};
    nn::MonotonicMixer mixer(sizes, "fuzz");
    for (; r.cases < cases; ++r.cases) {
        if (r.cases % 50 == 0) mixer.init(rng);
        std::vector<double> s(sizes.state), q(sizes.agents);
        for (double& v : s) v = z(rng);
        for (double& v : q) v = 3.0 * z(rng);
        const std::size_t agent = rng() % sizes.agents;
        const double base = mixer.forward(s, q);
        q[agent] += 1e-3;
        const double bumped = mixer.forward(s, q);
        if (bumped < base - 1e-9) fail(r, "mixed value decreased");
    }
    r.seconds = timer.seconds();
    return r;
}

std::vector<FuzzReport> run_fuzz_suites(std::size_t cases, std::uint64_t seed) {
    return {fuzz_clearing(cases, seed), fuzz_battery(cases, seed + 1), fuzz_profit(cases, seed + 2),
            fuzz_monotonicity(cases, seed + 3)};
}

}  // namespace evcs::app
