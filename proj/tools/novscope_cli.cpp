#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "novscope/error.hpp"
#include "novscope/pipeline.hpp"

using namespace novscope;

namespace {

constexpr const char* kStageHelp[][2] = {
    {"synth", "generate a synthetic corpus with planted effects into paths.data_dir"},
    {"ingest", "validate and normalize the input files into the cache"},
    {"build", "build yearly hypergraph snapshots and negative samples"},
    {"fit", "fit one embedding per channel and year"},
    {"score", "write scores.csv (surprise and prescience, raw and percentile)"},
    {"metrics", "write metrics.csv (disruption, two-step credit, outside share, citations)"},
    {"regress", "join scores, metrics and covariates and run the regression models"},
    {"report", "regress, then write text tables, margins and report.txt"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"novscope: surprise and prescience of paper combinations, and their rewards"};
    app.require_subcommand(1, 1);
    app.footer("Exit codes: 0 success, 2 validation error, 3 stale cache, 1 other.\n"
               "NOVSCOPE_CACHE_DIR overrides paths.cache_dir.\n\nDefault configuration:\n\n" +
               format_run_config());

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> channel;
    std::optional<int> horizon, threads;
    bool force = false;
    app.add_option("--config", config_path, "key-value config file with one section per stage")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "random seed (overrides run.seed)");
    app.add_option("--channel", channel, "channels to process")
        ->check(CLI::IsMember({"content", "context", "both"}));
    app.add_option("--horizon", horizon, "prescience horizon in years (overrides score.horizon)")
        ->check(CLI::PositiveNumber);
    app.add_option("--threads", threads, "worker threads for fitting (overrides run.threads)")
        ->check(CLI::PositiveNumber);
    app.add_flag("--force", force, "accept caches produced under a different configuration");

    for (const auto& [name, help] : kStageHelp) app.add_subcommand(name, help);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        apply_environment(cfg);
        if (seed) cfg.seed = *seed;
        if (channel) {
            if (*channel == "both") {
                cfg.channels = {Channel::content, Channel::context};
            } else {
                cfg.channels = {channel_from_string(*channel)};
            }
        }
        if (horizon) cfg.score.horizon = *horizon;
        if (threads) cfg.threads = *threads;

        auto stage = stage_from_string(app.get_subcommands().front()->get_name());
        Pipeline pipeline(std::move(cfg), force);
        auto result = pipeline.run(stage);
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
        std::printf("%s: %zu output(s) in %.2fs, config %s\n", std::string(to_string(stage)).c_str(),
                    result.outputs.size(), result.wall_seconds, result.config_hash.substr(0, 12).c_str());
        return 0;
    } catch (const StaleCacheError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
