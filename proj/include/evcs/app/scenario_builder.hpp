#pragma once

#include <cstdint>

#include "evcs/app/config.hpp"
#include "evcs/data/scenario.hpp"
#include "evcs/marl/trainer.hpp"

namespace evcs::app {

/// Start hour used by synthetic scenarios when scenario.start is empty.
inline constexpr const char* kSyntheticStart = "2023-06-01T00:00";

/// Price and PV series cut to the configured episode window.
struct Scenario {
    data::PriceSeries price;
    data::PvSeries pv;

    std::size_t first_hour_of_day() const;
};

data::PriceSeries synth_prices(const SyntheticSeries& s, data::HourStamp start, std::size_t hours,
                               const core::PriceMultipliers& multipliers);
data::PvSeries synth_pv(const SyntheticSeries& s, data::HourStamp start, std::size_t hours, std::size_t stations);

/// Loads or synthesizes the series. Throws ConfigError/ParseError/IoError.
Scenario load_scenario(const RunConfig& cfg);

/// Episode `index` of run `seed`. Demand is redrawn per index when
/// scenario.resample_demand is set, otherwise fixed per seed.
data::Episode make_episode(const Scenario& sc, const RunConfig& cfg, std::uint64_t seed, std::size_t index);

marl::EpisodeSource episode_source(const Scenario& sc, const RunConfig& cfg, std::uint64_t seed);

}  // namespace evcs::app
