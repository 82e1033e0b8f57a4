#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bundlescope/toml.hpp"

namespace bundlescope::pipeline {

inline constexpr const char* kToolVersion = "bundlescope 0.1.0";

// Everything a run needs, resolved from the TOML config plus flag
// overrides. Seeds are mandatory: there is no wall-clock fallback.
struct RunConfig {
    std::filesystem::path out_dir = "out";
    std::filesystem::path messages;     // default: out_dir/messages.jsonl
    std::filesystem::path calendar;     // optional; Mon-Fri span if empty
    std::filesystem::path index;        // default: out_dir/index.csv
    std::filesystem::path performance;  // default: out_dir/performance.csv

    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;

    // corpus
    uint64_t min_total = 1000;
    bool scale_min_total = true;  // ceil(min_total * days / 858)
    bool strict_parse = false;

    // extract
    size_t extract_shuffles = 1000;
    double z_low = -2.0;
    double z_high = 2.0;
    std::string criterion = "z";  // "z" or "eta"
    double eta_cut = 0.35;

    // bundle
    size_t network_shuffles = 1000;
    size_t eo_restarts = 20;
    bool bundle_stability = false;  // adds a half-split NMI report
    std::string bundle_method = "eo+kl";  // eo | eo+kl | sa
    double sa_cooling = 0.995;

    // analyze
    int max_lag = 5;
    size_t n_null = 1000;
    int adf_lags = 1;
    int smooth_window = 21;

    // synth
    size_t synth_days = 858;
    size_t synth_routinary = 200;
    std::vector<size_t> synth_bundle_sizes = {20, 20};
    std::vector<int> synth_bundle_lags = {0, 1};
    size_t synth_neutral = 0;
    double synth_noise = 1.0;
    double synth_burstiness = 1.0;
    double synth_zipf = 1.9;
    double synth_coupling = 0.2;

    std::string config_digest;  // sha256 of the config file, if any

    void validate() const;  // throws ConfigError
};

RunConfig load_config(const std::filesystem::path& toml_path);
RunConfig config_from_table(const toml::Table& table);

// Pipeline stages. Each writes its outputs atomically into out_dir plus
// a manifest_<stage>.json recording config digest, seed, input digests
// and tool version; inputs produced by an earlier stage are verified
// against that stage's manifest before use.
void run_synth(const RunConfig& cfg);
void run_ingest(const RunConfig& cfg);
void run_extract(const RunConfig& cfg);
void run_bundle(const RunConfig& cfg);
void run_analyze(const RunConfig& cfg);
void run_report(const RunConfig& cfg);

}  // namespace bundlescope::pipeline
