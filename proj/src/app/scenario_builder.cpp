#include "evcs/app/scenario_builder.hpp"

#include <cmath>
#include <numbers>

#include "evcs/error.hpp"

namespace evcs::app {

std::size_t Scenario::first_hour_of_day() const {
    const auto h = price.start % 24;
    return static_cast<std::size_t>(h < 0 ? h + 24 : h);
}

data::PriceSeries synth_prices(const SyntheticSeries& s, data::HourStamp start, std::size_t hours,
                               const core::PriceMultipliers& multipliers) {
    data::PriceSeries out;
    out.start = start;
    out.multipliers = multipliers;
    out.utility.resize(hours);
    for (std::size_t t = 0; t < hours; ++t) {
        const double hod = static_cast<double>((start + static_cast<data::HourStamp>(t)) % 24);
        out.utility[t] = s.price_base + s.price_amplitude * std::cos(2.0 * std::numbers::pi * (hod - s.price_peak_hour) / 24.0);
    }
    return out;
}

data::PvSeries synth_pv(const SyntheticSeries& s, data::HourStamp start, std::size_t hours, std::size_t stations) {
    data::PvSeries out;
    out.start = start;
    out.station_count = stations;
    out.generation.assign(hours, std::vector<double>(stations, 0.0));
    const double day = s.sunset_hour - s.sunrise_hour;
    for (std::size_t t = 0; t < hours; ++t) {
        const double hod = static_cast<double>((start + static_cast<data::HourStamp>(t)) % 24);
        const double shape = hod > s.sunrise_hour && hod < s.sunset_hour
                                 ? std::sin(std::numbers::pi * (hod - s.sunrise_hour) / day)
                                 : 0.0;
        for (std::size_t i = 0; i < stations; ++i) {
            const double peak = s.pv_peak[std::min(i, s.pv_peak.size() - 1)];
            out.generation[t][i] = peak * shape;
        }
    }
    return out;
}

Scenario load_scenario(const RunConfig& cfg) {
    const auto& sc = cfg.scenario;
    Scenario out;
    if (sc.mode == ScenarioMode::synthetic) {
        const data::HourStamp start = data::parse_hour(sc.start.empty() ? kSyntheticStart : sc.start);
        out.price = synth_prices(sc.synthetic, start, sc.slots, cfg.prices);
        out.pv = synth_pv(sc.synthetic, start, sc.slots, sc.stations);
        return out;
    }
    const auto price = data::load_price_csv(sc.price_csv, cfg.prices);
    const auto pv = data::load_pv_csv(sc.pv_csv, sc.stations);
    if (pv.start != price.start || pv.size() != price.size())
        throw ConfigError("scenario: price and pv files cover different hours (" + data::format_hour(price.start) +
                          " +" + std::to_string(price.size()) + "h vs " + data::format_hour(pv.start) + " +" +
                          std::to_string(pv.size()) + "h)");
    data::HourStamp start = price.start;
    if (!sc.start.empty()) start = data::parse_hour(sc.start);
    if (start < price.start)
        throw ConfigError("scenario.start: " + sc.start + " precedes the series start " + data::format_hour(price.start));
    const auto offset = static_cast<std::size_t>(start - price.start);
    out.price = price.slice(offset, sc.slots);
    out.pv = pv.slice(offset, sc.slots);
    return out;
}

data::Episode make_episode(const Scenario& sc, const RunConfig& cfg, std::uint64_t seed, std::size_t index) {
    data::DemandModel model = cfg.demand;
    const std::uint64_t run = marl::derive_seed(cfg.demand.rng_seed, seed);
    model.rng_seed = marl::derive_seed(run, cfg.scenario.resample_demand ? index : 0);
    const auto arrivals = data::synth_demand(model, sc.price.size(), sc.pv.station_count, sc.first_hour_of_day());
    return data::build_episode(sc.price, sc.pv, arrivals, cfg.scenario.initial_soc, cfg.ess);
}

marl::EpisodeSource episode_source(const Scenario& sc, const RunConfig& cfg, std::uint64_t seed) {
    return [sc, cfg, seed](std::size_t index) { return make_episode(sc, cfg, seed, index); };
}

}  // namespace evcs::app
