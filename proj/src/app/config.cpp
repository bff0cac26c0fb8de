#include "evcs/app/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "evcs/error.hpp"

namespace evcs::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Typed view over one JSON object that remembers which keys were read.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(label() + ": expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(at(key) + ": expected a number");
            out = v->get<double>();
        }
    }

    void count(const std::string& key, std::size_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned())
                throw ConfigError(at(key) + ": expected a nonnegative integer");
            out = v->get<std::size_t>();
        }
    }

    void flag(const std::string& key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(at(key) + ": expected true or false");
            out = v->get<bool>();
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(at(key) + ": expected a string");
            out = v->get<std::string>();
        }
    }

    void numbers(const std::string& key, std::vector<double>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) throw ConfigError(at(key) + ": expected an array of numbers");
            out.clear();
            for (std::size_t i = 0; i < v->size(); ++i) {
                if (!(*v)[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]: expected a number");
                out.push_back((*v)[i].get<double>());
            }
        }
    }

    Fields child(const std::string& key) {
        static const json empty = json::object();
        const json* v = find(key);
        return Fields(v ? *v : empty, at(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(at(it.key()) + ": unknown key");
    }

private:
    std::string label() const { return path_.empty() ? "config" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

fs::path resolve(const std::string& text, const fs::path& base) {
    if (text.empty()) return {};
    fs::path p(text);
    if (p.is_relative()) p = base / p;
    return p.lexically_normal();
}

std::string mode_name(ScenarioMode m) { return m == ScenarioMode::csv ? "csv" : "synthetic"; }

void read_scenario(Fields f, ScenarioConfig& s, const fs::path& base) {
    std::string mode = mode_name(s.mode);
    f.text("mode", mode);
    if (mode == "synthetic")
        s.mode = ScenarioMode::synthetic;
    else if (mode == "csv")
        s.mode = ScenarioMode::csv;
    else
        throw ConfigError(f.at("mode") + ": expected \"synthetic\" or \"csv\", got \"" + mode + "\"");
    std::string price = s.price_csv.string(), pv = s.pv_csv.string();
    f.text("price_csv", price);
    f.text("pv_csv", pv);
    s.price_csv = resolve(price, base);
    s.pv_csv = resolve(pv, base);
    f.count("stations", s.stations);
    f.count("slots", s.slots);
    f.text("start", s.start);
    f.number("initial_soc", s.initial_soc);
    f.flag("resample_demand", s.resample_demand);

    Fields syn = f.child("synthetic");
    syn.number("price_base", s.synthetic.price_base);
    syn.number("price_amplitude", s.synthetic.price_amplitude);
    syn.number("price_peak_hour", s.synthetic.price_peak_hour);
    syn.numbers("pv_peak", s.synthetic.pv_peak);
    syn.number("sunrise_hour", s.synthetic.sunrise_hour);
    syn.number("sunset_hour", s.synthetic.sunset_hour);
    syn.finish();
    f.finish();
}

void read_demand(Fields f, data::DemandModel& d) {
    if (const json* v = f.find("profiles")) {
        if (!v->is_array()) throw ConfigError(f.at("profiles") + ": expected an array of 24-value arrays");
        d.profiles.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            const json& p = (*v)[i];
            const std::string where = f.at("profiles") + "[" + std::to_string(i) + "]";
            if (!p.is_array() || p.size() != 24) throw ConfigError(where + ": expected 24 numbers");
            std::array<double, 24> row{};
            for (std::size_t h = 0; h < 24; ++h) {
                if (!p[h].is_number()) throw ConfigError(where + "[" + std::to_string(h) + "]: expected a number");
                row[h] = p[h].get<double>();
            }
            d.profiles.push_back(row);
        }
    }
    f.number("noise_sigma", d.noise_sigma);
    f.number("urgent_fraction", d.urgent_fraction);
    std::size_t seed = d.rng_seed;
    f.count("seed", seed);
    d.rng_seed = seed;
    f.finish();
}

void read_train(Fields f, marl::TrainConfig& t) {
    f.number("gamma", t.gamma);
    f.number("lr_drqn", t.lr_drqn);
    f.number("lr_mix", t.lr_mix);
    f.number("epsilon_start", t.epsilon_start);
    f.number("epsilon_end", t.epsilon_end);
    f.number("epsilon_decay_fraction", t.epsilon_decay_fraction);
    f.count("target_period", t.target_period);
    f.count("batch_episodes", t.batch_episodes);
    f.count("buffer_capacity", t.buffer_capacity);
    f.count("episodes", t.episodes);
    f.number("reward_scale", t.reward_scale);
    std::string mode = marl::agent_loss_mode_name(t.agent_loss_mode);
    f.text("agent_loss_mode", mode);
    try {
        t.agent_loss_mode = marl::parse_agent_loss_mode(mode);
    } catch (const ConfigError& e) {
        throw ConfigError(f.at("agent_loss_mode") + ": " + e.what());
    }
    f.flag("debug_checks", t.debug_checks);
    f.finish();
}

// Re-raises a validation failure with the section it came from.
template <class Fn>
void check(const std::string& section, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        throw ConfigError(section + ": " + e.what());
    }
}

}  // namespace

std::array<double, 24> default_demand_profile() {
    return {4, 3, 3, 2, 2, 3, 6, 12, 18, 16, 12, 10, 10, 11, 12, 14, 18, 24, 26, 22, 16, 11, 8, 6};
}

data::DemandModel default_demand_model() {
    data::DemandModel m;
    m.profiles = {default_demand_profile()};
    return m;
}

void RunConfig::validate() const {
    check("prices", [&] { prices.validate(); });
    check("ess", [&] { ess.validate(); });
    check("demand", [&] { demand.validate(); });
    check("action_grid", [&] { grid.validate(); });
    check("observation_scales", [&] { scales.validate(); });
    check("network", [&] { network.validate(); });
    check("train", [&] { train.validate(); });

    const auto& s = scenario;
    if (s.stations < 1) throw ConfigError("scenario.stations: must be >= 1");
    if (s.slots < 1) throw ConfigError("scenario.slots: must be >= 1");
    if (!(s.initial_soc >= ess.soc_min && s.initial_soc <= ess.soc_max))
        throw ConfigError("scenario.initial_soc: must lie in [ess.soc_min, ess.soc_max]");
    if (demand.profiles.size() != 1 && demand.profiles.size() != s.stations)
        throw ConfigError("demand.profiles: need 1 profile or one per station (" + std::to_string(s.stations) + ")");
    if (!s.start.empty()) check("scenario.start", [&] { data::parse_hour(s.start); });
    if (s.mode == ScenarioMode::csv) {
        if (s.price_csv.empty()) throw ConfigError("scenario.price_csv: required when scenario.mode is \"csv\"");
        if (s.pv_csv.empty()) throw ConfigError("scenario.pv_csv: required when scenario.mode is \"csv\"");
        if (!fs::exists(s.price_csv))
            throw ConfigError("scenario.price_csv: file not found: " + s.price_csv.string());
        if (!fs::exists(s.pv_csv)) throw ConfigError("scenario.pv_csv: file not found: " + s.pv_csv.string());
    } else {
        const auto& y = s.synthetic;
        if (!(y.price_base > 0.0)) throw ConfigError("scenario.synthetic.price_base: must be > 0");
        if (!(y.price_amplitude >= 0.0 && y.price_amplitude < y.price_base))
            throw ConfigError("scenario.synthetic.price_amplitude: must lie in [0, price_base)");
        if (y.pv_peak.empty()) throw ConfigError("scenario.synthetic.pv_peak: needs at least one value");
        for (double v : y.pv_peak)
            if (!(v >= 0.0)) throw ConfigError("scenario.synthetic.pv_peak: values must be >= 0");
        if (!(y.sunrise_hour >= 0.0 && y.sunrise_hour < y.sunset_hour && y.sunset_hour <= 24.0))
            throw ConfigError("scenario.synthetic: need 0 <= sunrise_hour < sunset_hour <= 24");
    }
    if (seeds.empty()) throw ConfigError("seeds: need at least one seed");
    if (oracle.lookahead < 1) throw ConfigError("oracle.lookahead: must be >= 1");
    if (summary.window < 1) throw ConfigError("summary.window: must be >= 1");
}

RunConfig config_from_json(const json& doc, const fs::path& base_dir) {
    RunConfig c;
    Fields root(doc, "");
    read_scenario(root.child("scenario"), c.scenario, base_dir);

    Fields p = root.child("prices");
    p.number("ev", c.prices.ev);
    p.number("trade", c.prices.trade);
    p.number("buyback", c.prices.buyback);
    p.finish();

    Fields e = root.child("ess");
    e.number("capacity_max", c.ess.capacity_max);
    e.number("soc_min", c.ess.soc_min);
    e.number("soc_max", c.ess.soc_max);
    e.number("leakage_beta", c.ess.leakage_beta);
    e.number("export_cap", c.ess.export_cap);
    e.number("import_cap", c.ess.import_cap);
    e.finish();

    read_demand(root.child("demand"), c.demand);

    Fields g = root.child("action_grid");
    g.numbers("supply_fractions", c.grid.supply_fractions);
    g.count("control_levels", c.grid.control_levels);
    g.finish();

    Fields o = root.child("observation_scales");
    o.number("total_demand", c.scales.total_demand);
    o.number("soc", c.scales.soc);
    o.number("urgent", c.scales.urgent);
    o.number("regular", c.scales.regular);
    o.number("renewable", c.scales.renewable);
    o.number("price", c.scales.price);
    o.finish();

    Fields n = root.child("network");
    n.count("agent_body", c.network.agent_body);
    n.count("rnn_hidden", c.network.rnn_hidden);
    n.count("mixer_embed", c.network.mixer_embed);
    n.count("hyper_hidden", c.network.hyper_hidden);
    n.finish();

    read_train(root.child("train"), c.train);

    std::string algo = marl::algorithm_name(c.algorithm);
    root.text("algorithm", algo);
    try {
        c.algorithm = marl::parse_algorithm(algo);
    } catch (const ConfigError& ex) {
        throw ConfigError(std::string("algorithm: ") + ex.what());
    }

    if (const json* v = root.find("seeds")) {
        if (!v->is_array()) throw ConfigError("seeds: expected an array of nonnegative integers");
        c.seeds.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_number_unsigned())
                throw ConfigError("seeds[" + std::to_string(i) + "]: expected a nonnegative integer");
            c.seeds.push_back((*v)[i].get<std::uint64_t>());
        }
    }
    std::string out = c.output_dir.string();
    root.text("output_dir", out);
    c.output_dir = resolve(out, base_dir);

    Fields orc = root.child("oracle");
    orc.count("lookahead", c.oracle.lookahead);
    orc.finish();
    Fields sum = root.child("summary");
    sum.count("window", c.summary.window);
    sum.finish();

    root.finish();
    c.validate();
    return c;
}

json config_to_json(const RunConfig& c) {
    json j;
    const auto& s = c.scenario;
    j["scenario"] = {{"mode", mode_name(s.mode)},
                     {"price_csv", s.price_csv.string()},
                     {"pv_csv", s.pv_csv.string()},
                     {"stations", s.stations},
                     {"slots", s.slots},
                     {"start", s.start},
                     {"initial_soc", s.initial_soc},
                     {"resample_demand", s.resample_demand},
                     {"synthetic",
                      {{"price_base", s.synthetic.price_base},
                       {"price_amplitude", s.synthetic.price_amplitude},
                       {"price_peak_hour", s.synthetic.price_peak_hour},
                       {"pv_peak", s.synthetic.pv_peak},
                       {"sunrise_hour", s.synthetic.sunrise_hour},
                       {"sunset_hour", s.synthetic.sunset_hour}}}};
    j["prices"] = {{"ev", c.prices.ev}, {"trade", c.prices.trade}, {"buyback", c.prices.buyback}};
    j["ess"] = {{"capacity_max", c.ess.capacity_max}, {"soc_min", c.ess.soc_min},
                {"soc_max", c.ess.soc_max},           {"leakage_beta", c.ess.leakage_beta},
                {"export_cap", c.ess.export_cap},     {"import_cap", c.ess.import_cap}};
    json profiles = json::array();
    for (const auto& p : c.demand.profiles) profiles.push_back(std::vector<double>(p.begin(), p.end()));
    j["demand"] = {{"profiles", profiles},
                   {"noise_sigma", c.demand.noise_sigma},
                   {"urgent_fraction", c.demand.urgent_fraction},
                   {"seed", c.demand.rng_seed}};
    j["action_grid"] = {{"supply_fractions", c.grid.supply_fractions}, {"control_levels", c.grid.control_levels}};
    j["observation_scales"] = {{"total_demand", c.scales.total_demand}, {"soc", c.scales.soc},
                               {"urgent", c.scales.urgent},             {"regular", c.scales.regular},
                               {"renewable", c.scales.renewable},       {"price", c.scales.price}};
    j["network"] = {{"agent_body", c.network.agent_body},
                    {"rnn_hidden", c.network.rnn_hidden},
                    {"mixer_embed", c.network.mixer_embed},
                    {"hyper_hidden", c.network.hyper_hidden}};
    const auto& t = c.train;
    j["train"] = {{"gamma", t.gamma},
                  {"lr_drqn", t.lr_drqn},
                  {"lr_mix", t.lr_mix},
                  {"epsilon_start", t.epsilon_start},
                  {"epsilon_end", t.epsilon_end},
                  {"epsilon_decay_fraction", t.epsilon_decay_fraction},
                  {"target_period", t.target_period},
                  {"batch_episodes", t.batch_episodes},
                  {"buffer_capacity", t.buffer_capacity},
                  {"episodes", t.episodes},
                  {"reward_scale", t.reward_scale},
                  {"agent_loss_mode", marl::agent_loss_mode_name(t.agent_loss_mode)},
                  {"debug_checks", t.debug_checks}};
    j["algorithm"] = marl::algorithm_name(c.algorithm);
    j["seeds"] = c.seeds;
    j["output_dir"] = c.output_dir.string();
    j["oracle"] = {{"lookahead", c.oracle.lookahead}};
    j["summary"] = {{"window", c.summary.window}};
    return j;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json doc;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        doc = json::object();
    } else {
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(path.string() + ": invalid JSON: " + e.what());
        }
    }
    return config_from_json(doc, fs::absolute(path).parent_path());
}

void write_config(const RunConfig& cfg, const fs::path& path) {
    RunConfig abs = cfg;
    auto absolutize = [](fs::path& p) {
        if (!p.empty()) p = fs::absolute(p).lexically_normal();
    };
    absolutize(abs.scenario.price_csv);
    absolutize(abs.scenario.pv_csv);
    absolutize(abs.output_dir);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << config_to_json(abs).dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace evcs::app
