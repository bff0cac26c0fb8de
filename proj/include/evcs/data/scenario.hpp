#pragma once

// Hourly price and PV series, seeded EV demand traces, and episode assembly.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evcs/core/microgrid.hpp"

namespace evcs::data {

/// Hours since 1970-01-01T00:00 (local wall clock, no time zone handling).
using HourStamp = std::int64_t;

/// Parses `YYYY-MM-DDTHH:MM` (seconds optional); minutes and seconds must be zero.
/// Throws ConfigError on malformed input.
HourStamp parse_hour(const std::string& text);
std::string format_hour(HourStamp hour);

struct PriceSeries {
    HourStamp start = 0;
    std::vector<double> utility;
    core::PriceMultipliers multipliers;

    std::size_t size() const { return utility.size(); }
    core::PriceQuote quote(std::size_t slot) const {
        return core::PriceQuote::from_utility(utility.at(slot), multipliers);
    }
    PriceSeries slice(std::size_t offset, std::size_t length) const;
};

/// Dense generation table, generation[slot][station].
struct PvSeries {
    HourStamp start = 0;
    std::size_t station_count = 0;
    std::vector<std::vector<double>> generation;

    std::size_t size() const { return generation.size(); }
    std::size_t point_count() const { return generation.size() * station_count; }
    PvSeries slice(std::size_t offset, std::size_t length) const;
};

struct DemandModel {
    /// One 24-hour mean profile per station (kWh/h). A single profile is shared by all stations.
    std::vector<std::array<double, 24>> profiles;
    double noise_sigma = 2.0;
    double urgent_fraction = 0.3;
    std::uint64_t rng_seed = 1;

    void validate() const;
    const std::array<double, 24>& profile_for(std::size_t station) const;
};

/// arrivals[slot][station]
using ArrivalTrace = std::vector<std::vector<core::Arrivals>>;

struct Episode {
    std::vector<core::PriceQuote> quotes;
    std::vector<std::vector<double>> renewables;  // [slot][station]
    ArrivalTrace arrivals;                         // [slot][station]
    std::vector<core::StationState> initial;

    std::size_t length() const { return quotes.size(); }
    std::size_t station_count() const { return initial.size(); }

    /// Arrivals entering at slot + 1, or zeros after the last slot.
    std::vector<core::Arrivals> next_arrivals(std::size_t slot) const;

    /// Stable 64-bit digest of every number in the episode.
    std::uint64_t fingerprint() const;

    bool operator==(const Episode&) const = default;
};

/// Reads `timestamp,price_usd_per_kwh`. Throws ParseError (with line), IoError.
PriceSeries load_price_csv(const std::filesystem::path& path,
                           const core::PriceMultipliers& multipliers);

/// Reads `timestamp,station_id,kwh` into a dense table covering every station-hour.
PvSeries load_pv_csv(const std::filesystem::path& path, std::size_t station_count);

/// Truncated-Gaussian arrivals around the hourly profile. `first_hour_of_day` is
/// the hour (0..23) of slot 0.
ArrivalTrace synth_demand(const DemandModel& model, std::size_t slots, std::size_t station_count,
                          std::size_t first_hour_of_day = 0);

Episode build_episode(const PriceSeries& price, const PvSeries& pv, const ArrivalTrace& arrivals,
                      double initial_soc, const core::EssParams& params);

}  // namespace evcs::data
