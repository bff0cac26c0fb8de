#pragma once

// CSV artifacts: per-episode metrics, wall-clock sidecar, traces and summaries.
// Doubles are written with %.17g so files round-trip exactly.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evcs/marl/rollout.hpp"
#include "evcs/marl/trainer.hpp"

namespace evcs::app {

struct RunMetrics {
    std::string algorithm;
    std::uint64_t seed = 0;
    std::size_t stations = 0;
    std::vector<marl::EpisodeMetrics> episodes;
};

/// episode,algorithm,seed,total_profit,station_<i>_profit...,mixer_loss,agent_loss,epsilon
void write_metrics_csv(const std::filesystem::path& path, const RunMetrics& run);
/// episode,wall_seconds; kept apart so metrics.csv is byte-stable across runs.
void write_timing_csv(const std::filesystem::path& path, const RunMetrics& run);
/// Throws IoError / ParseError.
RunMetrics read_metrics_csv(const std::filesystem::path& path);

void write_trace_csv(const std::filesystem::path& path, const std::vector<marl::TraceRow>& rows);
std::vector<marl::TraceRow> read_trace_csv(const std::filesystem::path& path);

struct SummaryRow {
    std::string algorithm;
    std::size_t runs = 0;
    std::size_t window = 0;
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single run
};

/// Mean of the last `window` episode profits of one run (all of them if shorter).
double window_mean(const RunMetrics& run, std::size_t window);

/// One row per algorithm, in order of first appearance. Throws ConfigError on empty input.
std::vector<SummaryRow> summarize(const std::vector<RunMetrics>& runs, std::size_t window);

/// Writes summary.csv and long.csv (algorithm,seed,episode,total_profit) into `dir`.
std::vector<SummaryRow> emit_summary(const std::vector<RunMetrics>& runs, std::size_t window,
                                     const std::filesystem::path& dir);

std::string format_double(double v);

}  // namespace evcs::app
