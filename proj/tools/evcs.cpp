#include <iostream>

#include <CLI11.hpp>

#include "evcs/app/commands.hpp"

int main(int argc, char** argv) {
    using evcs::app::CommandOptions;
    CLI::App app{"EV charging station microgrid: training, evaluation and oracle baselines"};
    app.require_subcommand(1);
    CommandOptions opt;
    std::string config, out, algorithm, checkpoint;
    std::uint64_t seed = 0;
    std::size_t lookahead = 0, window = 0;
    std::vector<std::string> runs;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "Run configuration (JSON)");
        sub->add_option("--seed", seed, "Single seed; output goes directly into --out");
        sub->add_option("--out", out, "Output directory");
        sub->add_option("--algorithm", algorithm, "double_qmix | qmix | independent_dqn | random");
    };
    auto* train = app.add_subcommand("train", "Train and write metrics.csv, timing.csv, model.ckpt");
    common(train);
    auto* evaluate = app.add_subcommand("evaluate", "Greedy rollout of a checkpoint, writes trace.csv");
    common(evaluate);
    evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file (default <out>/model.ckpt)");
    auto* orc = app.add_subcommand("oracle", "Exhaustive optimum on tiny instances, rolling greedy otherwise");
    common(orc);
    orc->add_option("--lookahead", lookahead, "Greedy window in slots")->check(CLI::PositiveNumber);
    auto* fuzz = app.add_subcommand("fuzz", "Randomized invariant suites");
    common(fuzz);
    fuzz->add_option("--cases", opt.fuzz_cases, "Cases per suite");
    auto* compare = app.add_subcommand("compare", "Summarize metrics across runs");
    common(compare);
    compare->add_option("runs", runs, "Run directories or metrics.csv files")->required();
    compare->add_option("--window", window, "Final-episode window")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : evcs::app::kConfigExit;
    }

    auto* sub = app.get_subcommands().front();
    if (!config.empty()) opt.config = config;
    if (sub->count("--seed")) opt.seed = seed;
    if (!out.empty()) opt.out = out;
    if (!algorithm.empty()) opt.algorithm = algorithm;
    if (!checkpoint.empty()) opt.checkpoint = checkpoint;
    if (lookahead) opt.lookahead = lookahead;
    if (window) opt.window = window;
    for (const auto& r : runs) opt.runs.emplace_back(r);
    return evcs::app::dispatch(sub->get_name(), opt, std::cout, std::cerr);
}
