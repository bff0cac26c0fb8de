#pragma once

// Per-agent observation encoding and the discrete action grid.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "evcs/core/microgrid.hpp"

namespace evcs::marl {

inline constexpr std::size_t kObservationSize = 6;

/// [total demand of all stations, SOC, urgent demand, regular demand, renewable, utility price],
/// each divided by its scale.
using Observation = std::array<double, kObservationSize>;

struct ObservationScales {
    double total_demand = 100.0;
    double soc = 1.0;
    double urgent = 50.0;
    double regular = 50.0;
    double renewable = 50.0;
    double price = 0.1;

    void validate() const;
    bool operator==(const ObservationScales&) const = default;
};

Observation encode_observation(const core::StationState& state, double total_demand_all,
                               const core::PriceQuote& quote, double renewable,
                               const ObservationScales& scales, const core::EssParams& params);

/// Cartesian grid of supply fractions and battery control levels.
/// Index layout: supply_index * control_levels + control_index.
/// Supply = urgent + fraction * regular; control levels are spaced linearly
/// over the ess_bounds interval obtained after curtailment for that supply.
struct ActionGrid {
    std::vector<double> supply_fractions{0.0, 0.5, 1.0};
    std::size_t control_levels = 5;

    std::size_t size() const { return supply_fractions.size() * control_levels; }
    std::size_t supply_index(std::size_t index) const { return index / control_levels; }
    std::size_t control_index(std::size_t index) const { return index % control_levels; }

    /// Fractions in [0, 1], at least one of them; control_levels >= 2.
    void validate() const;
    bool operator==(const ActionGrid&) const = default;
};

/// Decoded actions and feasibility for one station at one slot.
struct ActionMenu {
    std::vector<core::StationAction> actions;
    std::vector<std::uint8_t> mask;

    std::size_t feasible_count() const;
};

/// Values `levels` points linearly spaced over [lower, upper], endpoints exact.
std::vector<double> control_levels(const core::Interval& bounds, std::size_t levels);

/// Throws InfeasibleAction if no action at all is feasible (urgent demand
/// deficit above the import cap).
ActionMenu build_menu(const core::StationState& state, double renewable,
                      const core::EssParams& params, const ActionGrid& grid);

/// Throws InfeasibleAction for an out-of-range or masked index.
core::StationAction decode_action(std::size_t index, const core::StationState& state,
                                  double renewable, const core::EssParams& params,
                                  const ActionGrid& grid);

/// Highest value among unmasked entries; ties go to the lowest index.
/// Throws InfeasibleAction if the mask is empty.
std::size_t masked_argmax(std::span<const double> values, std::span<const std::uint8_t> mask);

}  // namespace evcs::marl
