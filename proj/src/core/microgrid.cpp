#include "evcs/core/microgrid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "evcs/error.hpp"

namespace evcs::core {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

bool within(double value, double lo, double hi) {
    return value >= lo - kFeasibilityTol && value <= hi + kFeasibilityTol;
}

}  // namespace

void EssParams::validate() const {
    if (!(capacity_max > 0.0)) throw ConfigError("ess.capacity_max must be > 0");
    if (!(soc_min > 0.0 && soc_min < soc_max && soc_max <= 1.0))
        throw ConfigError("ess SOC bounds must satisfy 0 < soc_min < soc_max <= 1");
    if (!(leakage_beta > 0.0 && leakage_beta <= 1.0))
        throw ConfigError("ess.leakage_beta must lie in (0, 1]");
    if (!(export_cap > 0.0)) throw ConfigError("ess.export_cap must be > 0");
    if (!(import_cap > 0.0)) throw ConfigError("ess.import_cap must be > 0");
}

void PriceMultipliers::validate() const {
    if (!(buyback > 0.0 && buyback < trade && trade < 1.0 && 1.0 < ev))
        throw ConfigError("price multipliers must satisfy 0 < buyback < trade < 1 < ev (got buyback=" +
                          fmt(buyback) + ", trade=" + fmt(trade) + ", ev=" + fmt(ev) + ")");
}

PriceQuote PriceQuote::from_utility(double utility_price, const PriceMultipliers& m) {
    return {utility_price, m.ev * utility_price, m.trade * utility_price, m.buyback * utility_price};
}

bool PriceQuote::ordered() const { return buyback < trade && trade < utility && utility < ev; }

void PriceQuote::validate() const {
    if (!ordered())
        throw ConfigError("price quote violates buyback < trade < utility < ev: (" + fmt(buyback) +
                          ", " + fmt(trade) + ", " + fmt(utility) + ", " + fmt(ev) + ")");
}

double soc(const StationState& state, const EssParams& params) {
    return state.battery_kwh / params.capacity_max;
}

Interval ess_bounds(double prev_battery, double internal_flow, const EssParams& params) {
    const double retained = params.leakage_beta * prev_battery;
    Interval out;
    out.lower = std::max((params.capacity_min() - retained) - internal_flow, -params.export_cap);
    out.upper = std::min((params.capacity_upper() - retained) - internal_flow, params.import_cap);
    if (out.lower > out.upper)
        throw InfeasibleInterval("ess control interval is empty: lower " + fmt(out.lower) +
                                 " > upper " + fmt(out.upper));
    return out;
}

CurtailResult curtail_renewable(double renewable, double ev_supply, double prev_battery,
                                const EssParams& params) {
    const double raw = renewable - ev_supply;
    const double headroom =
        (params.capacity_upper() - params.leakage_beta * prev_battery) + params.export_cap;
    CurtailResult out;
    out.internal_flow = std::min(raw, headroom);
    out.curtailed = raw - out.internal_flow;
    return out;
}

TradeOutcome clear_trades(std::span<const double> ess_controls) {
    const std::size_t n = ess_controls.size();
    TradeOutcome out;
    out.matched_buy.assign(n, 0.0);
    out.matched_sell.assign(n, 0.0);
    out.utility_buy.assign(n, 0.0);
    out.utility_sell.assign(n, 0.0);

    double charge = 0.0;
    double discharge_signed = 0.0;
    for (double c : ess_controls) {
        charge += std::max(c, 0.0);
        discharge_signed += std::min(c, 0.0);
    }
    const double discharge = std::abs(discharge_signed);
    out.charge_total = charge;
    out.discharge_total = discharge;

    if (charge > discharge) {
        // Sellers are exhausted; buyers share them pro rata.
        const double ratio = charge > 0.0 ? discharge / charge : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = ess_controls[i];
            if (c > 0.0) {
                out.matched_buy[i] = ratio * c;
                out.utility_buy[i] = c - out.matched_buy[i];
            } else if (c < 0.0) {
                out.matched_sell[i] = -c;
            }
        }
    } else {
        const double ratio = discharge > 0.0 ? charge / discharge : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = ess_controls[i];
            if (c > 0.0) {
                out.matched_buy[i] = c;
            } else if (c < 0.0) {
                out.matched_sell[i] = ratio * -c;
                out.utility_sell[i] = -c - out.matched_sell[i];
            }
        }
    }
    return out;
}

ProfitBreakdown profit(std::span<const double> ev_supplies, const TradeOutcome& trade,
                       const PriceQuote& quote) {
    quote.validate();
    const std::size_t n = ev_supplies.size();
    if (trade.size() != n) throw ShapeError("profit: ev_supplies and trade outcome differ in size");

    ProfitBreakdown out;
    out.ev_income.resize(n);
    out.utility_cost.resize(n);
    out.trade_net.resize(n);
    out.buyback_income.resize(n);
    out.station_profit.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.ev_income[i] = ev_supplies[i] * quote.ev;
        out.utility_cost[i] = trade.utility_buy[i] * quote.utility;
        out.trade_net[i] = (trade.matched_sell[i] - trade.matched_buy[i]) * quote.trade;
        out.buyback_income[i] = trade.utility_sell[i] * quote.buyback;
        out.station_profit[i] =
            out.ev_income[i] - out.utility_cost[i] + out.trade_net[i] + out.buyback_income[i];
        out.total_profit += out.station_profit[i];
    }
    return out;
}

StepOutcome step(std::span<const StationState> states, std::span<const StationAction> actions,
                 std::span<const double> renewables, const PriceQuote& quote,
                 std::span<const Arrivals> next_arrivals, const EssParams& params) {
    const std::size_t n = states.size();
    if (actions.size() != n || renewables.size() != n || next_arrivals.size() != n)
        throw ShapeError("step: per-station inputs differ in length");

    StepOutcome out;
    out.next_states.resize(n);
    out.curtailed_kwh.resize(n);
    out.internal_flow.resize(n);

    const double lo_batt = params.capacity_min();
    const double hi_batt = params.capacity_upper();

    std::vector<double> controls(n);
    std::vector<double> supplies(n);
    for (std::size_t i = 0; i < n; ++i) {
        const StationState& s = states[i];
        const StationAction& a = actions[i];
        if (!within(s.battery_kwh, lo_batt, hi_batt))
            throw ConstraintViolation(i, "battery range", "battery " + fmt(s.battery_kwh) +
                                                              " outside [" + fmt(lo_batt) + ", " +
                                                              fmt(hi_batt) + "]");
        if (!(renewables[i] >= 0.0))
            throw ConstraintViolation(i, "renewable", "negative renewable " + fmt(renewables[i]));
        if (!(next_arrivals[i].urgent >= 0.0 && next_arrivals[i].regular >= 0.0))
            throw ConstraintViolation(i, "arrivals", "negative arrivals");
        if (!within(a.ev_supply, s.urgent_demand, s.total_demand()))
            throw ConstraintViolation(i, "ev supply bound",
                                      "supply " + fmt(a.ev_supply) + " outside [" +
                                          fmt(s.urgent_demand) + ", " + fmt(s.total_demand()) + "]");

        const CurtailResult cut = curtail_renewable(renewables[i], a.ev_supply, s.battery_kwh, params);
        Interval bounds;
        try {
            bounds = ess_bounds(s.battery_kwh, cut.internal_flow, params);
        } catch (const InfeasibleInterval& e) {
            throw ConstraintViolation(i, "ess control bound", e.what());
        }
        if (!within(a.ess_control, bounds.lower, bounds.upper))
            throw ConstraintViolation(i, "ess control bound",
                                      "control " + fmt(a.ess_control) + " outside [" +
                                          fmt(bounds.lower) + ", " + fmt(bounds.upper) + "]");

        // Rounding residue of at most kFeasibilityTol is absorbed by the clamp.
        const double next_battery =
            params.leakage_beta * s.battery_kwh + a.ess_control + cut.internal_flow;
        out.next_states[i].battery_kwh = std::clamp(next_battery, lo_batt, hi_batt);

        const double unmet = std::max(0.0, s.total_demand() - a.ev_supply);
        out.next_states[i].urgent_demand = next_arrivals[i].urgent + unmet;
        out.next_states[i].regular_demand = next_arrivals[i].regular;

        out.curtailed_kwh[i] = cut.curtailed;
        out.internal_flow[i] = cut.internal_flow;
        controls[i] = a.ess_control;
        supplies[i] = a.ev_supply;
    }

    out.trade = clear_trades(controls);
    out.profit = profit(supplies, out.trade, quote);
    return out;
}

}  // namespace evcs::core
