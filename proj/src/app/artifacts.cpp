#include "evcs/app/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "evcs/error.hpp"

namespace evcs::app {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double to_double(const std::string& s, const fs::path& path, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path.string() + ": bad number '" + s + "'", line);
    }
}

std::uint64_t to_uint(const std::string& s, const fs::path& path, std::size_t line) {
    try {
        std::size_t pos = 0;
        const auto v = std::stoull(s, &pos);
        if (pos != s.size() || s.front() == '-') throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path.string() + ": bad integer '" + s + "'", line);
    }
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

const char* const kTraceHeader =
    "slot,station,utility_price,renewable,urgent,regular,ev_supply,ess_control,matched_buy,matched_sell,"
    "utility_buy,utility_sell,battery,soc,station_profit,curtailed";

}  // namespace

void write_metrics_csv(const fs::path& path, const RunMetrics& run) {
    auto out = open_out(path);
    out << "episode,algorithm,seed,total_profit";
    for (std::size_t i = 0; i < run.stations; ++i) out << ",station_" << i << "_profit";
    out << ",mixer_loss,agent_loss,epsilon\n";
    for (const auto& m : run.episodes) {
        out << m.episode << ',' << run.algorithm << ',' << run.seed << ',' << format_double(m.total_profit);
        for (double p : m.station_profit) out << ',' << format_double(p);
        out << ',' << format_double(m.mixer_loss) << ',' << format_double(m.agent_loss) << ','
            << format_double(m.epsilon) << '\n';
    }
    close_out(out, path);
}

void write_timing_csv(const fs::path& path, const RunMetrics& run) {
    auto out = open_out(path);
    out << "episode,wall_seconds\n";
    for (const auto& m : run.episodes) out << m.episode << ',' << format_double(m.wall_seconds) << '\n';
    close_out(out, path);
}

RunMetrics read_metrics_csv(const fs::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError(path.string() + ": empty metrics file", 1);
    const auto header = split(lines[0]);
    if (header.size() < 7 || header[0] != "episode" || header[1] != "algorithm" || header[2] != "seed" ||
        header[3] != "total_profit")
        throw ParseError(path.string() + ": not a metrics file", 1);
    RunMetrics run;
    run.stations = header.size() - 7;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        if (lines[n].empty()) continue;
        const auto cells = split(lines[n]);
        const std::size_t line = n + 1;
        if (cells.size() != header.size())
            throw ParseError(path.string() + ": expected " + std::to_string(header.size()) + " columns", line);
        marl::EpisodeMetrics m;
        m.episode = to_uint(cells[0], path, line);
        if (run.algorithm.empty()) {
            run.algorithm = cells[1];
            run.seed = to_uint(cells[2], path, line);
        } else if (cells[1] != run.algorithm || to_uint(cells[2], path, line) != run.seed) {
            throw ParseError(path.string() + ": mixed runs in one metrics file", line);
        }
        if (!run.episodes.empty() && m.episode <= run.episodes.back().episode)
            throw ParseError(path.string() + ": episode index not increasing", line);
        m.total_profit = to_double(cells[3], path, line);
        for (std::size_t i = 0; i < run.stations; ++i) m.station_profit.push_back(to_double(cells[4 + i], path, line));
        m.mixer_loss = to_double(cells[4 + run.stations], path, line);
        m.agent_loss = to_double(cells[5 + run.stations], path, line);
        m.epsilon = to_double(cells[6 + run.stations], path, line);
        run.episodes.push_back(std::move(m));
    }
    return run;
}

void write_trace_csv(const fs::path& path, const std::vector<marl::TraceRow>& rows) {
    auto out = open_out(path);
    out << kTraceHeader << '\n';
    for (const auto& r : rows) {
        out << r.slot << ',' << r.station;
        for (double v : {r.utility_price, r.renewable, r.urgent, r.regular, r.ev_supply, r.ess_control,
                         r.matched_buy, r.matched_sell, r.utility_buy, r.utility_sell, r.battery, r.soc,
                         r.station_profit, r.curtailed})
            out << ',' << format_double(v);
        out << '\n';
    }
    close_out(out, path);
}

std::vector<marl::TraceRow> read_trace_csv(const fs::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines[0] != kTraceHeader) throw ParseError(path.string() + ": not a trace file", 1);
    std::vector<marl::TraceRow> rows;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        if (lines[n].empty()) continue;
        const auto c = split(lines[n]);
        const std::size_t line = n + 1;
        if (c.size() != 16) throw ParseError(path.string() + ": expected 16 columns", line);
        marl::TraceRow r;
        r.slot = to_uint(c[0], path, line);
        r.station = to_uint(c[1], path, line);
        double* fields[] = {&r.utility_price, &r.renewable,   &r.urgent,       &r.regular,     &r.ev_supply,
                            &r.ess_control,   &r.matched_buy, &r.matched_sell, &r.utility_buy, &r.utility_sell,
                            &r.battery,       &r.soc,         &r.station_profit, &r.curtailed};
        for (std::size_t k = 0; k < 14; ++k) *fields[k] = to_double(c[2 + k], path, line);
        rows.push_back(r);
    }
    return rows;
}

double window_mean(const RunMetrics& run, std::size_t window) {
    if (run.episodes.empty()) throw ConfigError("run " + run.algorithm + " has no episodes");
    const std::size_t n = std::min(window, run.episodes.size());
    double sum = 0.0;
    for (std::size_t k = run.episodes.size() - n; k < run.episodes.size(); ++k) sum += run.episodes[k].total_profit;
    return sum / static_cast<double>(n);
}

std::vector<SummaryRow> summarize(const std::vector<RunMetrics>& runs, std::size_t window) {
    if (runs.empty()) throw ConfigError("summary needs at least one completed run");
    if (window == 0) throw ConfigError("summary window must be >= 1");
    std::vector<std::string> order;
    std::vector<std::vector<double>> values;
    for (const auto& r : runs) {
        auto it = std::find(order.begin(), order.end(), r.algorithm);
        if (it == order.end()) {
            order.push_back(r.algorithm);
            values.emplace_back();
            it = order.end() - 1;
        }
        values[static_cast<std::size_t>(it - order.begin())].push_back(window_mean(r, window));
    }
    std::vector<SummaryRow> out;
    for (std::size_t a = 0; a < order.size(); ++a) {
        auto v = values[a];
        SummaryRow row;
        row.algorithm = order[a];
        row.runs = v.size();
        row.window = window;
        double sum = 0.0;
        for (double x : v) sum += x;
        row.mean = sum / static_cast<double>(v.size());
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        row.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        if (n > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - row.mean) * (x - row.mean);
            row.stddev = std::sqrt(ss / static_cast<double>(n - 1));
        }
        out.push_back(row);
    }
    return out;
}

std::vector<SummaryRow> emit_summary(const std::vector<RunMetrics>& runs, std::size_t window, const fs::path& dir) {
    const auto rows = summarize(runs, window);
    {
        const fs::path p = dir / "summary.csv";
        auto out = open_out(p);
        out << "algorithm,runs,window,mean_profit,median_profit,stddev_profit\n";
        for (const auto& r : rows)
            out << r.algorithm << ',' << r.runs << ',' << r.window << ',' << format_double(r.mean) << ','
                << format_double(r.median) << ',' << format_double(r.stddev) << '\n';
        close_out(out, p);
    }
    {
        const fs::path p = dir / "long.csv";
        auto out = open_out(p);
        out << "algorithm,seed,episode,total_profit\n";
        for (const auto& r : runs)
            for (const auto& m : r.episodes)
                out << r.algorithm << ',' << r.seed << ',' << m.episode << ',' << format_double(m.total_profit) << '\n';
        close_out(out, p);
    }
    return rows;
}

}  // namespace evcs::app
