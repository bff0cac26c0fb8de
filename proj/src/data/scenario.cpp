#include "evcs/data/scenario.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string_view>

#include "evcs/error.hpp"

namespace evcs::data {

namespace {

// Howard Hinnant's days_from_civil.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

bool parse_uint(std::string_view s, unsigned& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(',', pos);
        out.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

double parse_number(std::string_view s, std::size_t line, const char* field) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
        throw ParseError(std::string("invalid ") + field + " '" + std::string(s) + "'", line);
    return v;
}

struct CsvLines {
    std::vector<std::string> lines;  // lines[0] is the header
};

CsvLines read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    CsvLines out;
    std::string line;
    while (std::getline(in, line)) out.lines.push_back(line);
    if (!out.lines.empty() && out.lines[0].starts_with("\xEF\xBB\xBF")) out.lines[0].erase(0, 3);
    return out;
}

void expect_header(const CsvLines& csv, std::string_view header, const std::filesystem::path& path) {
    if (csv.lines.empty()) throw ParseError("empty file " + path.string(), 1);
    if (trim(csv.lines[0]) != header)
        throw ParseError("expected header '" + std::string(header) + "' in " + path.string(), 1);
}

HourStamp parse_hour_at(std::string_view s, std::size_t line) {
    try {
        return parse_hour(std::string(s));
    } catch (const ConfigError& e) {
        throw ParseError(e.what(), line);
    }
}

void fnv_mix(std::uint64_t& h, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xFFu;
        h *= 0x100000001b3ULL;
    }
}

}  // namespace

HourStamp parse_hour(const std::string& text) {
    const std::string_view s = trim(text);
    // YYYY-MM-DDTHH:MM[:SS]
    if (s.size() != 16 && s.size() != 19) throw ConfigError("malformed timestamp '" + text + "'");
    if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' ||
        (s.size() == 19 && s[16] != ':'))
        throw ConfigError("malformed timestamp '" + text + "'");
    unsigned y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    if (!parse_uint(s.substr(0, 4), y) || !parse_uint(s.substr(5, 2), mo) ||
        !parse_uint(s.substr(8, 2), d) || !parse_uint(s.substr(11, 2), h) ||
        !parse_uint(s.substr(14, 2), mi) || (s.size() == 19 && !parse_uint(s.substr(17, 2), se)))
        throw ConfigError("malformed timestamp '" + text + "'");
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23)
        throw ConfigError("timestamp out of range '" + text + "'");
    if (mi != 0 || se != 0) throw ConfigError("timestamp is not on the hour '" + text + "'");
    const std::int64_t days = days_from_civil(y, mo, d);
    std::int64_t yy = 0;
    unsigned mm = 0, dd = 0;
    civil_from_days(days, yy, mm, dd);
    if (mm != mo || dd != d) throw ConfigError("invalid calendar date '" + text + "'");
    return days * 24 + h;
}

std::string format_hour(HourStamp hour) {
    std::int64_t days = hour >= 0 ? hour / 24 : (hour - 23) / 24;
    const auto h = static_cast<unsigned>(hour - days * 24);
    std::int64_t y = 0;
    unsigned m = 0, d = 0;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02u:00", static_cast<long long>(y), m, d, h);
    return buf;
}

PriceSeries PriceSeries::slice(std::size_t offset, std::size_t length) const {
    if (offset + length > utility.size())
        throw ConfigError("price window [" + std::to_string(offset) + ", " +
                          std::to_string(offset + length) + ") exceeds series of " +
                          std::to_string(utility.size()) + " hours");
    PriceSeries out;
    out.start = start + static_cast<HourStamp>(offset);
    out.multipliers = multipliers;
    out.utility.assign(utility.begin() + static_cast<std::ptrdiff_t>(offset),
                       utility.begin() + static_cast<std::ptrdiff_t>(offset + length));
    return out;
}

PvSeries PvSeries::slice(std::size_t offset, std::size_t length) const {
    if (offset + length > generation.size())
        throw ConfigError("pv window [" + std::to_string(offset) + ", " +
                          std::to_string(offset + length) + ") exceeds series of " +
                          std::to_string(generation.size()) + " hours");
    PvSeries out;
    out.start = start + static_cast<HourStamp>(offset);
    out.station_count = station_count;
    out.generation.assign(generation.begin() + static_cast<std::ptrdiff_t>(offset),
                          generation.begin() + static_cast<std::ptrdiff_t>(offset + length));
    return out;
}

void DemandModel::validate() const {
    if (profiles.empty()) throw ConfigError("demand.profiles must contain at least one profile");
    for (const auto& p : profiles)
        for (double v : p)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw ConfigError("demand profile values must be finite and >= 0");
    if (!(noise_sigma >= 0.0)) throw ConfigError("demand.noise_sigma must be >= 0");
    if (!(urgent_fraction >= 0.0 && urgent_fraction <= 1.0))
        throw ConfigError("demand.urgent_fraction must lie in [0, 1]");
}

const std::array<double, 24>& DemandModel::profile_for(std::size_t station) const {
    return profiles.size() == 1 ? profiles.front() : profiles.at(station);
}

std::vector<core::Arrivals> Episode::next_arrivals(std::size_t slot) const {
    if (slot + 1 < arrivals.size()) return arrivals[slot + 1];
    return std::vector<core::Arrivals>(station_count());
}

std::uint64_t Episode::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    fnv_mix(h, static_cast<double>(length()));
    fnv_mix(h, static_cast<double>(station_count()));
    for (const auto& q : quotes) {
        fnv_mix(h, q.utility);
        fnv_mix(h, q.ev);
        fnv_mix(h, q.trade);
        fnv_mix(h, q.buyback);
    }
    for (const auto& row : renewables)
        for (double v : row) fnv_mix(h, v);
    for (const auto& row : arrivals)
        for (const auto& a : row) {
            fnv_mix(h, a.urgent);
            fnv_mix(h, a.regular);
        }
    for (const auto& s : initial) {
        fnv_mix(h, s.battery_kwh);
        fnv_mix(h, s.urgent_demand);
        fnv_mix(h, s.regular_demand);
    }
    return h;
}

PriceSeries load_price_csv(const std::filesystem::path& path,
                           const core::PriceMultipliers& multipliers) {
    multipliers.validate();
    const CsvLines csv = read_lines(path);
    expect_header(csv, "timestamp,price_usd_per_kwh", path);

    PriceSeries out;
    out.multipliers = multipliers;
    std::optional<HourStamp> prev;
    for (std::size_t k = 1; k < csv.lines.size(); ++k) {
        const std::size_t line = k + 1;
        if (trim(csv.lines[k]).empty()) continue;
        const auto fields = split_commas(csv.lines[k]);
        if (fields.size() != 2) throw ParseError("expected 2 fields", line);
        const HourStamp hour = parse_hour_at(fields[0], line);
        const double price = parse_number(fields[1], line, "price");
        if (!(price > 0.0)) throw ParseError("price must be > 0", line);
        if (prev) {
            if (hour <= *prev)
                throw ParseError("duplicate or out-of-order hour " + format_hour(hour), line);
            if (hour != *prev + 1)
                throw ParseError("missing hour " + format_hour(*prev + 1), line);
        } else {
            out.start = hour;
        }
        prev = hour;
        out.utility.push_back(price);
    }
    if (out.utility.empty()) throw ParseError("no data rows in " + path.string(), csv.lines.size());
    return out;
}

PvSeries load_pv_csv(const std::filesystem::path& path, std::size_t station_count) {
    if (station_count == 0) throw ConfigError("station_count must be >= 1");
    const CsvLines csv = read_lines(path);
    expect_header(csv, "timestamp,station_id,kwh", path);

    struct Row {
        std::vector<std::optional<double>> kwh;
        std::size_t first_line = 0;
    };
    std::map<HourStamp, Row> table;
    for (std::size_t k = 1; k < csv.lines.size(); ++k) {
        const std::size_t line = k + 1;
        if (trim(csv.lines[k]).empty()) continue;
        const auto fields = split_commas(csv.lines[k]);
        if (fields.size() != 3) throw ParseError("expected 3 fields", line);
        const HourStamp hour = parse_hour_at(fields[0], line);
        unsigned station = 0;
        if (!parse_uint(fields[1], station))
            throw ParseError("invalid station_id '" + std::string(fields[1]) + "'", line);
        if (station >= station_count)
            throw ParseError("unknown station id " + std::to_string(station) + " (station_count " +
                                 std::to_string(station_count) + ")",
                             line);
        const double kwh = parse_number(fields[2], line, "kwh");
        if (kwh < 0.0) throw ParseError("negative kwh", line);
        Row& row = table[hour];
        if (row.kwh.empty()) {
            row.kwh.resize(station_count);
            row.first_line = line;
        }
        if (row.kwh[station]) throw ParseError("duplicate station-hour " + format_hour(hour), line);
        row.kwh[station] = kwh;
    }
    if (table.empty()) throw ParseError("no data rows in " + path.string(), csv.lines.size());

    PvSeries out;
    out.station_count = station_count;
    out.start = table.begin()->first;
    HourStamp expect = out.start;
    for (const auto& [hour, row] : table) {
        if (hour != expect) throw ParseError("missing hour " + format_hour(expect), row.first_line);
        std::vector<double> dense(station_count);
        for (std::size_t s = 0; s < station_count; ++s) {
            if (!row.kwh[s])
                throw ParseError("missing station " + std::to_string(s) + " at hour " + format_hour(hour),
                                 row.first_line);
            dense[s] = *row.kwh[s];
        }
        out.generation.push_back(std::move(dense));
        ++expect;
    }
    return out;
}

ArrivalTrace synth_demand(const DemandModel& model, std::size_t slots, std::size_t station_count,
                          std::size_t first_hour_of_day) {
    model.validate();
    if (slots == 0) throw ConfigError("demand horizon must be >= 1");
    if (model.profiles.size() != 1 && model.profiles.size() != station_count)
        throw ConfigError("demand.profiles must hold 1 or station_count profiles");

    std::mt19937_64 rng(model.rng_seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    ArrivalTrace out(slots, std::vector<core::Arrivals>(station_count));
    for (std::size_t t = 0; t < slots; ++t) {
        const std::size_t hour = (first_hour_of_day + t) % 24;
        for (std::size_t i = 0; i < station_count; ++i) {
            // Draw unconditionally so the stream layout does not depend on sigma.
            const double z = noise(rng);
            const double total = std::max(0.0, model.profile_for(i)[hour] + model.noise_sigma * z);
            out[t][i].urgent = model.urgent_fraction * total;
            out[t][i].regular = total - out[t][i].urgent;
        }
    }
    return out;
}

Episode build_episode(const PriceSeries& price, const PvSeries& pv, const ArrivalTrace& arrivals,
                      double initial_soc, const core::EssParams& params) {
    params.validate();
    const std::size_t slots = price.size();
    if (slots == 0) throw ConfigError("episode needs at least one slot");
    if (pv.size() != slots)
        throw ConfigError("pv series has " + std::to_string(pv.size()) + " hours, price series has " +
                          std::to_string(slots));
    if (pv.start != price.start)
        throw ConfigError("pv series starts at " + format_hour(pv.start) + ", price series at " +
                          format_hour(price.start));
    if (arrivals.size() != slots)
        throw ConfigError("demand trace has " + std::to_string(arrivals.size()) +
                          " slots, price series has " + std::to_string(slots));
    for (const auto& row : arrivals)
        if (row.size() != pv.station_count) throw ConfigError("demand trace station count mismatch");
    if (!(initial_soc >= params.soc_min && initial_soc <= params.soc_max))
        throw ConfigError("initial_soc must lie in [soc_min, soc_max]");

    Episode ep;
    ep.quotes.reserve(slots);
    for (std::size_t t = 0; t < slots; ++t) {
        ep.quotes.push_back(price.quote(t));
        ep.quotes.back().validate();
    }
    ep.renewables = pv.generation;
    ep.arrivals = arrivals;
    ep.initial.resize(pv.station_count);
    for (std::size_t i = 0; i < pv.station_count; ++i) {
        ep.initial[i].battery_kwh = initial_soc * params.capacity_max;
        ep.initial[i].urgent_demand = arrivals[0][i].urgent;
        ep.initial[i].regular_demand = arrivals[0][i].regular;
    }
    return ep;
}

}  // namespace evcs::data
