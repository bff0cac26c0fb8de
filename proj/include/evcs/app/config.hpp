#pragma once

// JSON run configuration. Every key is optional; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "evcs/core/microgrid.hpp"
#include "evcs/data/scenario.hpp"
#include "evcs/marl/learner.hpp"
#include "evcs/marl/rollout.hpp"

namespace evcs::app {

enum class ScenarioMode { synthetic, csv };

/// Shapes of the built-in synthetic price and PV series.
struct SyntheticSeries {
    double price_base = 0.10;       // $/kWh
    double price_amplitude = 0.04;  // peak-to-mean swing, cosine with its maximum at price_peak_hour
    double price_peak_hour = 18.0;
    std::vector<double> pv_peak{30.0, 20.0};  // kWh/h at noon, per station (last value repeats)
    double sunrise_hour = 6.0;
    double sunset_hour = 18.0;

    bool operator==(const SyntheticSeries&) const = default;
};

struct ScenarioConfig {
    ScenarioMode mode = ScenarioMode::synthetic;
    std::filesystem::path price_csv;
    std::filesystem::path pv_csv;
    std::size_t stations = 2;
    std::size_t slots = 48;
    /// First hour of the episode window; empty means the start of the series.
    std::string start;
    double initial_soc = 0.5;
    /// Draw fresh demand for every training episode.
    bool resample_demand = true;
    SyntheticSeries synthetic;

    bool operator==(const ScenarioConfig&) const = default;
};

struct OracleConfig {
    std::size_t lookahead = 2;
    bool operator==(const OracleConfig&) const = default;
};

struct SummaryConfig {
    std::size_t window = 50;
    bool operator==(const SummaryConfig&) const = default;
};

/// Default 24-hour demand profile (kWh/h) used when none is configured.
std::array<double, 24> default_demand_profile();
data::DemandModel default_demand_model();

struct RunConfig {
    ScenarioConfig scenario;
    core::PriceMultipliers prices;
    core::EssParams ess;
    data::DemandModel demand = default_demand_model();
    marl::ActionGrid grid;
    marl::ObservationScales scales;
    marl::NetworkConfig network;
    marl::TrainConfig train;
    marl::Algorithm algorithm = marl::Algorithm::double_qmix;
    std::vector<std::uint64_t> seeds{1};
    std::filesystem::path output_dir = "runs";
    OracleConfig oracle;
    SummaryConfig summary;

    marl::EnvSpec env_spec() const { return {ess, grid, scales}; }
    /// Cross-field checks; throws ConfigError with the offending field path.
    void validate() const;
};

/// Relative paths are resolved against `base_dir`. Throws ConfigError with the field path.
RunConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Reads and validates a config file. Throws IoError if unreadable, ConfigError otherwise.
RunConfig load_config(const std::filesystem::path& path);
/// Writes the fully resolved config (absolute paths, all defaults).
void write_config(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace evcs::app
