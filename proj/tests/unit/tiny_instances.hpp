#pragma once

#include <random>

#include "evcs/oracle/oracle.hpp"

// Random instances small enough for exhaustive search: K = 6 actions.
inline evcs::oracle::TinyInstance random_tiny(std::mt19937_64& rng, std::size_t stations, std::size_t slots) {
    using namespace evcs;
    std::uniform_real_distribution<double> price(0.05, 0.5), pv(0.0, 20.0), demand(0.0, 10.0), soc(0.2, 0.8);
    oracle::TinyInstance inst;
    inst.spec.grid.supply_fractions = {0.0, 1.0};
    inst.spec.grid.control_levels = 3;
    auto& ep = inst.episode;
    for (std::size_t t = 0; t < slots; ++t) {
        ep.quotes.push_back(core::PriceQuote::from_utility(price(rng), {}));
        std::vector<double> r;
        std::vector<core::Arrivals> a;
        for (std::size_t i = 0; i < stations; ++i) {
            r.push_back(pv(rng));
            a.push_back({0.3 * demand(rng), demand(rng)});
        }
        ep.renewables.push_back(r);
        ep.arrivals.push_back(a);
    }
    for (std::size_t i = 0; i < stations; ++i)
        ep.initial.push_back({soc(rng) * inst.spec.params.capacity_max, ep.arrivals[0][i].urgent,
                              ep.arrivals[0][i].regular});
    return inst;
}
