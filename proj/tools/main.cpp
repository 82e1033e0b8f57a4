// bundlescope: extract non-routinary word bundles from message corpora
// and relate them to a daily index and collective performance.
//
// Usage: bundlescope <subcommand> [--config run.toml] [--seed N]
//                    [--threads K] [--out DIR]
//
// Subcommands: synth, ingest, extract, bundle, analyze, report.
// Exit codes: 0 success, 2 config error, 3 data error, 4 internal error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "bundlescope/errors.hpp"
#include "bundlescope/pipeline.hpp"

using bundlescope::pipeline::RunConfig;

namespace {

int dispatch(const std::string& stage, const RunConfig& cfg) {
    using namespace bundlescope::pipeline;
    if (stage == "synth") run_synth(cfg);
    else if (stage == "ingest") run_ingest(cfg);
    else if (stage == "extract") run_extract(cfg);
    else if (stage == "bundle") run_bundle(cfg);
    else if (stage == "analyze") run_analyze(cfg);
    else if (stage == "report") run_report(cfg);
    else {
        std::fprintf(stderr, "unknown subcommand '%s'\n", stage.c_str());
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"word-bundle extraction and lead/lag analytics"};
    app.set_version_flag("--version", bundlescope::pipeline::kToolVersion);

    std::string config_path;
    std::string out_dir;
    int64_t seed = -1;
    bool seed_given = false;
    int threads = 0;

    app.add_option("--config", config_path, "TOML run configuration");
    app.add_option("--seed", seed, "random seed (overrides config)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--threads", threads, "worker threads; never affects results")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.require_subcommand(1);
    for (const char* name : {"synth", "ingest", "extract", "bundle", "analyze", "report"})
        app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
        seed_given = app.count("--seed") > 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = bundlescope::pipeline::load_config(config_path);
        if (seed_given) {
            cfg.seed = static_cast<uint64_t>(seed);
            cfg.seed_set = true;
        }
        if (threads > 0) cfg.threads = threads;
        if (!out_dir.empty()) cfg.out_dir = out_dir;

        const std::string stage = app.get_subcommands().front()->get_name();
        return dispatch(stage, cfg);
    } catch (const bundlescope::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const bundlescope::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const bundlescope::InternalError& e) {
        std::fprintf(stderr, "internal invariant violated: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
}
