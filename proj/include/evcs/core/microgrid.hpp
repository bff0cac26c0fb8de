#pragma once

// Per-slot dynamics of a group of EV charging stations sharing one utility feeder.
// Every station owns a battery (ESS) and a renewable source. Energy quantities
// are kWh per slot and prices are $/kWh.

#include <cstddef>
#include <span>
#include <vector>

namespace evcs::core {

/// Absolute slack used when checking actions against the physical envelope.
inline constexpr double kFeasibilityTol = 1e-9;

struct EssParams {
    double capacity_max = 200.0;
    double soc_min = 0.05;
    double soc_max = 0.95;
    double leakage_beta = 0.99;
    double export_cap = 2000.0;
    double import_cap = 2000.0;

    double capacity_min() const { return soc_min * capacity_max; }
    double capacity_upper() const { return soc_max * capacity_max; }

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;

    bool operator==(const EssParams&) const = default;
};

struct StationState {
    double battery_kwh = 0.0;
    double urgent_demand = 0.0;
    double regular_demand = 0.0;

    double total_demand() const { return urgent_demand + regular_demand; }

    bool operator==(const StationState&) const = default;
};

struct PriceMultipliers {
    double ev = 1.2;
    double trade = 0.9;
    double buyback = 0.8;

    /// Requires buyback < trade < 1 < ev.
    void validate() const;

    bool operator==(const PriceMultipliers&) const = default;
};

struct PriceQuote {
    double utility = 0.0;
    double ev = 0.0;
    double trade = 0.0;
    double buyback = 0.0;

    static PriceQuote from_utility(double utility_price, const PriceMultipliers& m);

    /// buyback < trade < utility < ev
    bool ordered() const;
    void validate() const;

    bool operator==(const PriceQuote&) const = default;
};

/// ess_control > 0 charges the battery with bought energy, < 0 discharges and sells.
struct StationAction {
    double ev_supply = 0.0;
    double ess_control = 0.0;

    bool operator==(const StationAction&) const = default;
};

struct Arrivals {
    double urgent = 0.0;
    double regular = 0.0;

    bool operator==(const Arrivals&) const = default;
};

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

struct CurtailResult {
    double internal_flow = 0.0;
    double curtailed = 0.0;
};

/// Internal matching is stored as nonnegative buy/sell magnitudes. The signed
/// traded quantity of a station is matched_sell - matched_buy.
struct TradeOutcome {
    std::vector<double> matched_buy;
    std::vector<double> matched_sell;
    std::vector<double> utility_buy;
    std::vector<double> utility_sell;
    double charge_total = 0.0;
    double discharge_total = 0.0;

    std::size_t size() const { return matched_buy.size(); }
};

struct ProfitBreakdown {
    std::vector<double> ev_income;
    std::vector<double> utility_cost;
    std::vector<double> trade_net;
    std::vector<double> buyback_income;
    std::vector<double> station_profit;
    double total_profit = 0.0;
};

struct StepOutcome {
    std::vector<StationState> next_states;
    TradeOutcome trade;
    ProfitBreakdown profit;
    std::vector<double> curtailed_kwh;
    std::vector<double> internal_flow;
};

double soc(const StationState& state, const EssParams& params);

/// Feasible ess_control interval keeping the next battery level inside
/// [capacity_min, soc_max * capacity_max], clipped to the export/import caps.
/// Throws InfeasibleInterval when the clipped interval is empty.
Interval ess_bounds(double prev_battery, double internal_flow, const EssParams& params);

/// Splits renewable - ev_supply into the part the station can absorb (battery
/// headroom plus export cap) and the part that is discarded.
CurtailResult curtail_renewable(double renewable, double ev_supply, double prev_battery,
                                const EssParams& params);

/// Proportional matching of chargers against dischargers; residuals go to the utility.
TradeOutcome clear_trades(std::span<const double> ess_controls);

/// Throws ConfigError if the quote violates the price ordering.
ProfitBreakdown profit(std::span<const double> ev_supplies, const TradeOutcome& trade,
                       const PriceQuote& quote);

/// Advances every station by one slot. Throws ConstraintViolation naming the
/// station and bound if an action leaves the feasible envelope.
StepOutcome step(std::span<const StationState> states, std::span<const StationAction> actions,
                 std::span<const double> renewables, const PriceQuote& quote,
                 std::span<const Arrivals> next_arrivals, const EssParams& params);

}  // namespace evcs::core
