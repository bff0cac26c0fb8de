#include "evcs/app/commands.hpp"

#include <algorithm>
#include <utility>
#include <ostream>

#include "evcs/app/artifacts.hpp"
#include "evcs/app/fuzz.hpp"
#include "evcs/app/scenario_builder.hpp"
#include "evcs/error.hpp"
#include "evcs/nn/checkpoint.hpp"
#include "evcs/oracle/oracle.hpp"

namespace evcs::app {

namespace fs = std::filesystem;

namespace {

RunMetrics to_run(const std::string& algorithm, std::uint64_t seed, std::size_t stations,
                  std::vector<marl::EpisodeMetrics> episodes) {
    RunMetrics r;
    r.algorithm = algorithm;
    r.seed = seed;
    r.stations = stations;
    r.episodes = std::move(episodes);
    return r;
}

marl::EpisodeMetrics single_episode_metrics(double total, const std::vector<double>& station_profit) {
    marl::EpisodeMetrics m;
    m.episode = 1;
    m.total_profit = total;
    m.station_profit = station_profit;
    return m;
}

std::vector<double> station_totals(const std::vector<marl::TraceRow>& trace, std::size_t stations) {
    std::vector<double> out(stations, 0.0);
    for (const auto& row : trace) out[row.station] += row.station_profit;
    return out;
}

}  // namespace

RunConfig resolve_config(const CommandOptions& opt) {
    RunConfig cfg = opt.config ? load_config(*opt.config) : config_from_json(nlohmann::json::object(), fs::current_path());
    if (opt.algorithm) {
        try {
            cfg.algorithm = marl::parse_algorithm(*opt.algorithm);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("--algorithm: ") + e.what());
        }
    }
    if (opt.seed) cfg.seeds = {*opt.seed};
    if (opt.out) cfg.output_dir = fs::absolute(*opt.out).lexically_normal();
    return cfg;
}

std::vector<std::pair<std::uint64_t, fs::path>> run_targets(const RunConfig& cfg, const CommandOptions& opt) {
    std::vector<std::pair<std::uint64_t, fs::path>> out;
    if (opt.seed) {
        out.emplace_back(*opt.seed, cfg.output_dir);
        return out;
    }
    for (auto s : cfg.seeds) out.emplace_back(s, cfg.output_dir / ("seed_" + std::to_string(s)));
    return out;
}

void cmd_train(const CommandOptions& opt, std::ostream& log) {
    const RunConfig cfg = resolve_config(opt);
    const Scenario sc = load_scenario(cfg);
    const std::string algo = marl::algorithm_name(cfg.algorithm);
    for (const auto& [seed, dir] : run_targets(cfg, opt)) {
        fs::create_directories(dir);
        RunConfig echo = cfg;
        echo.seeds = {seed};
        echo.output_dir = dir;
        write_config(echo, dir / "config.resolved.json");

        auto result = marl::train(cfg.train, cfg.env_spec(), cfg.network, cfg.algorithm,
                                  episode_source(sc, cfg, seed), seed);
        const RunMetrics run = to_run(algo, seed, cfg.scenario.stations, result.metrics);
        write_metrics_csv(dir / "metrics.csv", run);
        write_timing_csv(dir / "timing.csv", run);
        nn::save_checkpoint(dir / "model.ckpt", std::as_const(result.learner).all_parameters());
        log << algo << " seed " << seed << ": final-" << cfg.summary.window << " mean profit "
            << format_double(window_mean(run, cfg.summary.window)) << " -> " << dir.string() << "\n";
        if (result.double_q_violations > 0)
            log << "warning: " << result.double_q_violations << " double-Q bound violations\n";
    }
}

void cmd_evaluate(const CommandOptions& opt, std::ostream& log) {
    const RunConfig cfg = resolve_config(opt);
    const Scenario sc = load_scenario(cfg);
    const std::string algo = marl::algorithm_name(cfg.algorithm);
    for (const auto& [seed, dir] : run_targets(cfg, opt)) {
        marl::Learner learner(cfg.algorithm, cfg.scenario.stations, cfg.grid.size(), cfg.network, 0);
        const fs::path ckpt = opt.checkpoint ? *opt.checkpoint : dir / "model.ckpt";
        nn::load_checkpoint(ckpt, learner.all_parameters());

        const data::Episode ep = make_episode(sc, cfg, seed, 0);
        std::vector<marl::TraceRow> trace;
        const auto rec = marl::evaluate_greedy(ep, cfg.env_spec(), learner, cfg.train.reward_scale, &trace);
        fs::create_directories(dir);
        write_trace_csv(dir / "trace.csv", trace);
        write_metrics_csv(dir / "eval_metrics.csv",
                          to_run(algo, seed, cfg.scenario.stations,
                                 {single_episode_metrics(rec.total_profit(), rec.station_profit)}));
        log << "evaluate " << algo << " seed " << seed << ": greedy profit " << format_double(rec.total_profit())
            << " -> " << (dir / "trace.csv").string() << "\n";
    }
}

void cmd_oracle(const CommandOptions& opt, std::ostream& log) {
    const RunConfig cfg = resolve_config(opt);
    const Scenario sc = load_scenario(cfg);
    const std::size_t lookahead = opt.lookahead ? *opt.lookahead : cfg.oracle.lookahead;
    for (const auto& [seed, dir] : run_targets(cfg, opt)) {
        const data::Episode ep = make_episode(sc, cfg, seed, 0);
        oracle::TinyInstance tiny{ep, cfg.env_spec()};
        bool exact = true;
        try {
            tiny.validate();
        } catch (const Error&) {
            exact = false;
        }
        std::string name;
        std::vector<marl::TraceRow> trace;
        double profit = 0.0;
        if (exact) {
            const auto res = oracle::brute_force(tiny);
            oracle::replay_sequence(ep, cfg.env_spec(), res.actions, &trace);
            profit = res.profit;
            name = "oracle";
            log << "oracle seed " << seed << ": optimum " << format_double(profit) << " over " << res.nodes
                << " steps\n";
        } else {
            const auto res = oracle::rolling_greedy(ep, cfg.env_spec(), lookahead);
            trace = res.trace;
            profit = res.profit;
            name = "greedy-" + std::to_string(lookahead);
            log << name << " seed " << seed << ": profit " << format_double(profit) << "\n";
        }
        fs::create_directories(dir);
        write_trace_csv(dir / "trace.csv", trace);
        write_metrics_csv(dir / "metrics.csv",
                          to_run(name, seed, cfg.scenario.stations,
                                 {single_episode_metrics(profit, station_totals(trace, cfg.scenario.stations))}));
    }
}

bool cmd_fuzz(const CommandOptions& opt, std::ostream& log) {
    const std::uint64_t seed = opt.seed ? *opt.seed : 1;
    bool ok = true;
    for (const auto& r : run_fuzz_suites(opt.fuzz_cases, seed)) {
        log << (r.passed() ? "PASS " : "FAIL ") << r.suite << ": " << r.cases << " cases, " << r.violations
            << " violations, " << format_double(r.seconds) << " s\n";
        if (!r.passed()) {
            log << "  first failure: " << r.first_failure << "\n";
            ok = false;
        }
    }
    return ok;
}

void cmd_compare(const CommandOptions& opt, std::ostream& log) {
    if (opt.runs.empty()) throw ConfigError("compare needs at least one run directory or metrics file");
    std::vector<fs::path> files;
    for (const auto& p : opt.runs) {
        if (fs::is_regular_file(p)) {
            files.push_back(p);
        } else if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::recursive_directory_iterator(p))
                if (e.is_regular_file() && e.path().filename() == "metrics.csv") found.push_back(e.path());
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            throw IoError("no such run: " + p.string());
        }
    }
    std::vector<RunMetrics> runs;
    for (const auto& f : files) runs.push_back(read_metrics_csv(f));
    std::size_t window = 50;
    if (opt.config) window = load_config(*opt.config).summary.window;
    if (opt.window) window = *opt.window;
    const fs::path out = opt.out ? *opt.out : fs::current_path();
    fs::create_directories(out);
    const auto rows = emit_summary(runs, window, out);
    log << "algorithm,runs,window,mean_profit,median_profit,stddev_profit\n";
    for (const auto& r : rows)
        log << r.algorithm << ',' << r.runs << ',' << r.window << ',' << format_double(r.mean) << ','
            << format_double(r.median) << ',' << format_double(r.stddev) << '\n';
}

int dispatch(const std::string& command, const CommandOptions& opt, std::ostream& log, std::ostream& err) {
    try {
        if (command == "train") {
            cmd_train(opt, log);
        } else if (command == "evaluate") {
            cmd_evaluate(opt, log);
        } else if (command == "oracle") {
            cmd_oracle(opt, log);
        } else if (command == "fuzz") {
            if (!cmd_fuzz(opt, log)) return kRuntimeExit;
        } else if (command == "compare") {
            cmd_compare(opt, log);
        } else {
            err << "error: unknown command '" << command << "'\n";
            return kConfigExit;
        }
        return kOk;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return kIoExit;
    } catch (const fs::filesystem_error& e) {
        err << "I/O error: " << e.what() << "\n";
        return kIoExit;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const ShapeError& e) {
        err << "shape error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const BudgetExceeded& e) {
        err << "budget exceeded: " << e.what() << "\n";
        return kConfigExit;
    } catch (const DivergenceError& e) {
        err << "divergence: " << e.what() << "\n";
        return kRuntimeExit;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeExit;
    }
}

}  // namespace evcs::app
