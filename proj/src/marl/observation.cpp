#include "evcs/marl/observation.hpp"

#include <algorithm>
#include <optional>

#include "evcs/error.hpp"

namespace evcs::marl {

void ObservationScales::validate() const {
    for (double s : {total_demand, soc, urgent, regular, renewable, price})
        if (!(s > 0.0)) throw ConfigError("observation scales must be > 0");
}

Observation encode_observation(const core::StationState& state, double total_demand_all,
                               const core::PriceQuote& quote, double renewable,
                               const ObservationScales& scales, const core::EssParams& params) {
    return {total_demand_all / scales.total_demand,
            core::soc(state, params) / scales.soc,
            state.urgent_demand / scales.urgent,
            state.regular_demand / scales.regular,
            renewable / scales.renewable,
            quote.utility / scales.price};
}

void ActionGrid::validate() const {
    if (supply_fractions.empty()) throw ConfigError("action_grid.supply_fractions must not be empty");
    for (double f : supply_fractions)
        if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("action_grid supply fractions must lie in [0, 1]");
    if (control_levels < 2) throw ConfigError("action_grid.control_levels must be >= 2");
}

std::size_t ActionMenu::feasible_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::vector<double> control_levels(const core::Interval& bounds, std::size_t levels) {
    std::vector<double> out(levels);
    const double step = (bounds.upper - bounds.lower) / static_cast<double>(levels - 1);
    for (std::size_t k = 0; k < levels; ++k)
        out[k] = k + 1 == levels ? bounds.upper : bounds.lower + static_cast<double>(k) * step;
    return out;
}

namespace {

std::optional<core::Interval> supply_bounds(double supply, const core::StationState& state,
                                            double renewable, const core::EssParams& params) {
    const auto cut = core::curtail_renewable(renewable, supply, state.battery_kwh, params);
    try {
        return core::ess_bounds(state.battery_kwh, cut.internal_flow, params);
    } catch (const InfeasibleInterval&) {
        return std::nullopt;
    }
}

double supply_for(double fraction, const core::StationState& state) {
    return fraction >= 1.0 ? state.total_demand() : state.urgent_demand + fraction * state.regular_demand;
}

}  // namespace

ActionMenu build_menu(const core::StationState& state, double renewable,
                      const core::EssParams& params, const ActionGrid& grid) {
    ActionMenu menu;
    menu.actions.resize(grid.size());
    menu.mask.assign(grid.size(), 0);
    for (std::size_t s = 0; s < grid.supply_fractions.size(); ++s) {
        const double supply = supply_for(grid.supply_fractions[s], state);
        const auto bounds = supply_bounds(supply, state, renewable, params);
        if (!bounds) continue;
        const auto levels = control_levels(*bounds, grid.control_levels);
        for (std::size_t c = 0; c < grid.control_levels; ++c) {
            const std::size_t idx = s * grid.control_levels + c;
            menu.actions[idx] = {supply, levels[c]};
            menu.mask[idx] = 1;
        }
    }
    if (menu.feasible_count() == 0)
        throw InfeasibleAction("no feasible action: urgent demand deficit exceeds the import cap");
    return menu;
}

core::StationAction decode_action(std::size_t index, const core::StationState& state,
                                  double renewable, const core::EssParams& params,
                                  const ActionGrid& grid) {
    if (index >= grid.size())
        throw InfeasibleAction("action index " + std::to_string(index) + " outside grid of " +
                               std::to_string(grid.size()));
    const double supply = supply_for(grid.supply_fractions[grid.supply_index(index)], state);
    const auto bounds = supply_bounds(supply, state, renewable, params);
    if (!bounds) throw InfeasibleAction("action index " + std::to_string(index) + " is masked");
    return {supply, control_levels(*bounds, grid.control_levels)[grid.control_index(index)]};
}

std::size_t masked_argmax(std::span<const double> values, std::span<const std::uint8_t> mask) {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!mask[k]) continue;
        if (!best || values[k] > values[*best]) best = k;
    }
    if (!best) throw InfeasibleAction("masked argmax over an empty mask");
    return *best;
}

}  // namespace evcs::marl
