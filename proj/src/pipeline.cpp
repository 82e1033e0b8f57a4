#include "bundlescope/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "bundlescope/bundling.hpp"
#include "bundlescope/corpus.hpp"
#include "bundlescope/errors.hpp"
#include "bundlescope/extraction.hpp"
#include "bundlescope/series.hpp"
#include "bundlescope/sha256.hpp"
#include "bundlescope/stopwords.hpp"
#include "bundlescope/stats.hpp"
#include "bundlescope/svg.hpp"
#include "bundlescope/synthgen.hpp"
#include "bundlescope/textio.hpp"

namespace bundlescope::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
    if (!seed_set) throw ConfigError("seed is mandatory (config [run] seed or --seed)");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (criterion != "z" && criterion != "eta")
        throw ConfigError("extract.criterion must be \"z\" or \"eta\"");
    if (bundle_method != "eo" && bundle_method != "eo+kl" && bundle_method != "sa")
        throw ConfigError("bundle.method must be eo, eo+kl or sa");
    if (max_lag < 1) throw ConfigError("analyze.max_lag must be >= 1");
    if (smooth_window < 1) throw ConfigError("analyze.smooth_window must be >= 1");
    if (z_low >= z_high) throw ConfigError("extract z window is empty");
    if (synth_bundle_sizes.size() != synth_bundle_lags.size())
        throw ConfigError("synth.bundle_sizes and synth.bundle_lags must have equal length");
}

RunConfig config_from_table(const toml::Table& t) {
    RunConfig cfg;
    cfg.out_dir = t.get_string("paths.out_dir", "out");
    cfg.messages = t.get_string("paths.messages", "");
    cfg.calendar = t.get_string("paths.calendar", "");
    cfg.index = t.get_string("paths.index", "");
    cfg.performance = t.get_string("paths.performance", "");

    if (t.has("run.seed")) {
        cfg.seed = static_cast<uint64_t>(t.get_int("run.seed", 0));
        cfg.seed_set = true;
    }
    cfg.threads = static_cast<int>(t.get_int("run.threads", 1));

    cfg.min_total = static_cast<uint64_t>(t.get_int("corpus.min_total", 1000));
    cfg.scale_min_total = t.get_bool("corpus.scale_min_total", true);
    cfg.strict_parse = t.get_bool("corpus.strict", false);

    cfg.extract_shuffles = static_cast<size_t>(t.get_int("extract.n_shuffles", 1000));
    cfg.z_low = t.get_double("extract.z_low", -2.0);
    cfg.z_high = t.get_double("extract.z_high", 2.0);
    cfg.criterion = t.get_string("extract.criterion", "z");
    cfg.eta_cut = t.get_double("extract.eta_cut", 0.35);

    cfg.network_shuffles = static_cast<size_t>(t.get_int("bundle.n_shuffles", 1000));
    cfg.eo_restarts = static_cast<size_t>(t.get_int("bundle.restarts", 20));
    cfg.bundle_stability = t.get_bool("bundle.stability", false);
    cfg.bundle_method = t.get_string("bundle.method", "eo+kl");
    cfg.sa_cooling = t.get_double("bundle.sa_cooling", 0.995);

    cfg.max_lag = static_cast<int>(t.get_int("analyze.max_lag", 5));
    cfg.n_null = static_cast<size_t>(t.get_int("analyze.n_null", 1000));
    cfg.adf_lags = static_cast<int>(t.get_int("analyze.adf_lags", 1));
    cfg.smooth_window = static_cast<int>(t.get_int("analyze.smooth_window", 21));

    cfg.synth_days = static_cast<size_t>(t.get_int("synth.days", 858));
    cfg.synth_routinary = static_cast<size_t>(t.get_int("synth.routinary_words", 200));
    {
        auto sizes = t.get_int_array("synth.bundle_sizes", {20, 20});
        auto lags = t.get_int_array("synth.bundle_lags", {0, 1});
        cfg.synth_bundle_sizes.assign(sizes.begin(), sizes.end());
        cfg.synth_bundle_lags.assign(lags.begin(), lags.end());
    }
    cfg.synth_neutral = static_cast<size_t>(t.get_int("synth.neutral_words", 0));
    cfg.synth_noise = t.get_double("synth.noise", 1.0);
    cfg.synth_burstiness = t.get_double("synth.burstiness", 1.0);
    cfg.synth_zipf = t.get_double("synth.zipf_exponent", 1.9);
    cfg.synth_coupling = t.get_double("synth.coupling", 0.2);
    return cfg;
}

RunConfig load_config(const fs::path& toml_path) {
    RunConfig cfg = config_from_table(toml::parse_file(toml_path));
    cfg.config_digest = sha256_file_hex(toml_path);
    return cfg;
}

namespace {

fs::path default_path(const RunConfig& cfg, const fs::path& configured,
                      const char* filename) {
    if (!configured.empty()) return configured;
    return cfg.out_dir / filename;
}

// ------------------------------------------------------------- manifests

void write_manifest(const RunConfig& cfg, const std::string& stage,
                    const std::vector<fs::path>& inputs,
                    const std::vector<fs::path>& outputs) {
    json m;
    m["stage"] = stage;
    m["tool_version"] = kToolVersion;
    m["seed"] = cfg.seed;
    m["threads"] = cfg.threads;
    m["config_digest"] = cfg.config_digest;
    json in = json::object();
    for (const auto& p : inputs) in[p.filename().string()] = sha256_file_hex(p);
    json out = json::object();
    for (const auto& p : outputs) out[p.filename().string()] = sha256_file_hex(p);
    m["inputs"] = in;
    m["outputs"] = out;
    atomic_write(cfg.out_dir / ("manifest_" + stage + ".json"), m.dump(2) + "\n");
}

// A stage's inputs must match whatever manifest recorded them as outputs.
void verify_inputs(const RunConfig& cfg, const std::string& stage,
                   const std::vector<fs::path>& inputs) {
    std::map<std::string, std::string> recorded;
    if (fs::exists(cfg.out_dir)) {
        for (const auto& entry : fs::directory_iterator(cfg.out_dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("manifest_", 0) != 0 || entry.path().extension() != ".json")
                continue;
            json m = json::parse(read_file(entry.path()));
            if (!m.contains("outputs")) continue;
            for (auto& [file, digest] : m["outputs"].items())
                recorded[file] = digest.get<std::string>();
        }
    }
    for (const auto& p : inputs) {
        if (!fs::exists(p))
            throw DataError(stage + ": missing input " + p.string() +
                            " (run the upstream stage first)");
        auto it = recorded.find(p.filename().string());
        if (it == recorded.end()) continue;  // external input, no provenance
        if (sha256_file_hex(p) != it->second)
            throw DataError(stage + ": input " + p.string() +
                            " does not match the digest recorded by its producing stage");
    }
}

uint64_t stage_seed(const RunConfig& cfg, uint64_t stage_tag) {
    return derive_seed(cfg.seed, stage_tag);
}

uint64_t effective_min_total(const RunConfig& cfg, size_t days) {
    if (!cfg.scale_min_total) return cfg.min_total;
    const double scaled = std::ceil(static_cast<double>(cfg.min_total) *
                                    static_cast<double>(days) / 858.0);
    return static_cast<uint64_t>(std::max(scaled, 1.0));
}

}  // namespace

void run_synth(const RunConfig& cfg) {
    cfg.validate();
    synthgen::SynthSpec spec;
    spec.days = cfg.synth_days;
    spec.n_routinary_words = cfg.synth_routinary;
    spec.bundle_sizes = cfg.synth_bundle_sizes;
    spec.bundle_lags = cfg.synth_bundle_lags;
    spec.neutral_bundle_size = cfg.synth_neutral;
    spec.noise = cfg.synth_noise;
    spec.burstiness = cfg.synth_burstiness;
    spec.zipf_exponent = cfg.synth_zipf;
    spec.coupling = cfg.synth_coupling;
    spec.seed = stage_seed(cfg, 101);

    const synthgen::SynthCorpus corpus = synthgen::gen_corpus(spec);

    std::string calendar_csv;
    for (Date d : corpus.calendar) calendar_csv += to_iso(d) + "\n";
    std::string perf_csv = "date,pct_profitable,n_traders\n";
    for (size_t t = 0; t < corpus.performance.size(); ++t) {
        perf_csv += to_iso(corpus.performance.dates[t]);
        perf_csv += ',';
        perf_csv += format_double(corpus.performance.values[t]);
        perf_csv += ',';
        perf_csv += format_double(corpus.n_traders.values[t]);
        perf_csv += '\n';
    }

    const fs::path messages = cfg.out_dir / "messages.jsonl";
    const fs::path calendar = cfg.out_dir / "calendar.csv";
    const fs::path index = cfg.out_dir / "index.csv";
    const fs::path performance = cfg.out_dir / "performance.csv";
    const fs::path truth = cfg.out_dir / "ground_truth.csv";
    atomic_write(messages, synthgen::matrix_to_jsonl(corpus.matrix, derive_seed(spec.seed, 7)));
    atomic_write(calendar, calendar_csv);
    atomic_write(index, series::series_to_csv(corpus.index, "close"));
    atomic_write(performance, perf_csv);
    atomic_write(truth, synthgen::ground_truth_to_csv(corpus.truth));
    write_manifest(cfg, "synth", {}, {messages, calendar, index, performance, truth});
}

void run_ingest(const RunConfig& cfg) {
    cfg.validate();
    const fs::path messages = default_path(cfg, cfg.messages, "messages.jsonl");
    std::vector<fs::path> inputs{messages};
    fs::path calendar_path;
    if (!cfg.calendar.empty()) {
        calendar_path = cfg.calendar;
    } else if (fs::exists(cfg.out_dir / "calendar.csv")) {
        calendar_path = cfg.out_dir / "calendar.csv";
    }
    if (!calendar_path.empty()) inputs.push_back(calendar_path);
    verify_inputs(cfg, "ingest", inputs);

    const corpus::ParseResult parsed = corpus::parse_messages_file(messages, cfg.strict_parse);
    if (parsed.records.empty()) throw DataError("ingest: no valid messages in " + messages.string());

    std::vector<Date> calendar;
    if (!calendar_path.empty()) {
        calendar = corpus::read_calendar_csv(calendar_path);
    } else {
        Date lo = date_of_unix(parsed.records.front().unix_ts);
        Date hi = lo;
        for (const auto& r : parsed.records) {
            const Date d = date_of_unix(r.unix_ts);
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        calendar = weekday_calendar(lo, hi);
    }

    corpus::BuildStats stats;
    const corpus::DailyFrequencyMatrix full = corpus::build_matrix(parsed.records, calendar, &stats);
    const uint64_t min_total = effective_min_total(cfg, full.n_dates());
    const corpus::DailyFrequencyMatrix filtered = corpus::filter_vocabulary(full, min_total);

    std::string log = "messages_parsed," + std::to_string(parsed.records.size()) + "\n";
    log += "messages_malformed," + std::to_string(parsed.malformed) + "\n";
    log += "messages_outside_calendar," + std::to_string(stats.dropped_outside_calendar) + "\n";
    log += "days," + std::to_string(full.n_dates()) + "\n";
    log += "vocabulary_full," + std::to_string(full.n_words()) + "\n";
    log += "min_total_effective," + std::to_string(min_total) + "\n";
    log += "vocabulary_filtered," + std::to_string(filtered.n_words()) + "\n";

    std::string zipf_txt;
    if (filtered.n_words() >= 100) {
        const corpus::ZipfFit fit =
            corpus::zipf_diagnostic(filtered, stage_seed(cfg, 102), 500);
        zipf_txt = "exponent," + format_double(fit.exponent) + "\nks_statistic," +
                   format_double(fit.ks_statistic) + "\nks_p," + format_double(fit.ks_p) +
                   "\nxmin," + format_double(fit.xmin) + "\n";
    } else {
        zipf_txt = "skipped,vocabulary below 100 words\n";
    }

    series::AlignedSeries volume;
    volume.name = "volume";
    volume.dates = full.dates;
    volume.values = full.totals_series();

    const fs::path matrix_bin = cfg.out_dir / "matrix.bin";
    const fs::path matrix_csv = cfg.out_dir / "matrix.csv";
    const fs::path volume_csv = cfg.out_dir / "volume.csv";
    const fs::path zipf = cfg.out_dir / "zipf.txt";
    const fs::path ingest_log = cfg.out_dir / "ingest_log.csv";
    corpus::write_matrix_cache(matrix_bin, filtered);
    atomic_write(matrix_csv, corpus::matrix_to_csv(filtered));
    atomic_write(volume_csv, series::series_to_csv(volume, "n_words"));
    atomic_write(zipf, zipf_txt);
    atomic_write(ingest_log, log);
    write_manifest(cfg, "ingest", inputs,
                   {matrix_bin, matrix_csv, volume_csv, zipf, ingest_log});
}

void run_extract(const RunConfig& cfg) {
    cfg.validate();
    const fs::path matrix_bin = cfg.out_dir / "matrix.bin";
    verify_inputs(cfg, "extract", {matrix_bin});
    const corpus::DailyFrequencyMatrix matrix = corpus::read_matrix_cache(matrix_bin);

    extraction::ClassifyOptions opts;
    opts.n_shuffles = cfg.extract_shuffles;
    opts.z_low = cfg.z_low;
    opts.z_high = cfg.z_high;
    opts.use_eta_criterion = cfg.criterion == "eta";
    opts.eta_cut = cfg.eta_cut;
    opts.threads = cfg.threads;
    const auto classifications = extraction::classify(matrix, stage_seed(cfg, 103), opts);

    const fs::path out = cfg.out_dir / "classifications.csv";
    atomic_write(out, extraction::classifications_to_csv(classifications));

    // Routinary fraction of the bundled English stop list, when any of
    // its words made it through the frequency filter.
    std::string summary;
    {
        size_t external = 0, routinary = 0, ambiguous = 0;
        for (const auto& c : classifications) {
            external += c.label == extraction::WordLabel::kExternal;
            routinary += c.label == extraction::WordLabel::kRoutinary;
            ambiguous += c.label == extraction::WordLabel::kAmbiguous;
        }
        summary = "words," + std::to_string(classifications.size()) + "\n";
        summary += "external," + std::to_string(external) + "\n";
        summary += "routinary," + std::to_string(routinary) + "\n";
        summary += "ambiguous," + std::to_string(ambiguous) + "\n";
        try {
            const double frac =
                extraction::stopword_diagnostic(classifications, extraction::english_stopwords());
            summary += "stopword_routinary_fraction," + format_double(frac) + "\n";
        } catch (const DataError&) {
            summary += "stopword_routinary_fraction,n/a (no stopwords in vocabulary)\n";
        }
    }
    const fs::path summary_path = cfg.out_dir / "extract_summary.csv";
    atomic_write(summary_path, summary);
    write_manifest(cfg, "extract", {matrix_bin}, {out, summary_path});
}

namespace {

// The extracted-word submatrix named by classifications.csv.
corpus::DailyFrequencyMatrix extracted_matrix(const corpus::DailyFrequencyMatrix& matrix,
                                              const std::vector<extraction::WordClassification>& cls) {
    std::set<std::string> external;
    for (const auto& c : cls)
        if (c.label == extraction::WordLabel::kExternal) external.insert(c.word);
    std::vector<size_t> idx;
    for (size_t w = 0; w < matrix.n_words(); ++w)
        if (external.count(matrix.vocabulary[w])) idx.push_back(w);
    if (idx.size() < 2) throw DataError("fewer than 2 extracted words; nothing to bundle");
    return matrix.submatrix(idx);
}

}  // namespace

void run_bundle(const RunConfig& cfg) {
    cfg.validate();
    const fs::path matrix_bin = cfg.out_dir / "matrix.bin";
    const fs::path cls_csv = cfg.out_dir / "classifications.csv";
    verify_inputs(cfg, "bundle", {matrix_bin, cls_csv});
    const corpus::DailyFrequencyMatrix matrix = corpus::read_matrix_cache(matrix_bin);
    const auto classifications = extraction::classifications_from_csv(read_file(cls_csv));
    const corpus::DailyFrequencyMatrix extracted = extracted_matrix(matrix, classifications);

    const bundling::CorrelationNetwork net =
        bundling::pairwise_network(extracted, cfg.network_shuffles, stage_seed(cfg, 104),
                                   cfg.threads);
    bundling::BundlePartition partition;
    if (cfg.bundle_method == "sa") {
        bundling::SaSchedule schedule;
        schedule.cooling = cfg.sa_cooling;
        partition = bundling::detect_bundles_sa(net, schedule, stage_seed(cfg, 105));
    } else {
        partition = bundling::detect_bundles_eo(net, cfg.eo_restarts, stage_seed(cfg, 105),
                                                cfg.threads);
        if (cfg.bundle_method == "eo+kl") partition = bundling::refine_kl(net, partition);
    }

    const fs::path network_csv = cfg.out_dir / "network.csv";
    const fs::path bundles_csv = cfg.out_dir / "bundles.csv";
    const fs::path summary_csv = cfg.out_dir / "bundle_summary.csv";
    atomic_write(network_csv, bundling::network_to_csv(net));
    atomic_write(bundles_csv, bundling::bundles_to_csv(net, partition));
    atomic_write(summary_csv, bundling::bundle_summary_to_csv(net, partition));
    std::string log = "q," + format_double(partition.q) + "\n";
    log += "method," + partition.method + "\n";
    log += "bundles," + std::to_string(partition.n_bundles()) + "\n";
    log += "dropped_zero_variance," + std::to_string(net.dropped.size()) + "\n";
    for (const auto& w : net.dropped) log += "dropped," + w + "\n";
    const fs::path log_path = cfg.out_dir / "bundle_log.csv";
    atomic_write(log_path, log);
    std::vector<fs::path> outputs{network_csv, bundles_csv, summary_csv, log_path};
    if (cfg.bundle_stability) {
        bundling::StabilityOptions sopts;
        sopts.n_shuffles = cfg.network_shuffles;
        sopts.restarts = cfg.eo_restarts;
        sopts.threads = cfg.threads;
        const double nmi = bundling::stability_check(extracted, stage_seed(cfg, 108), sopts);
        const fs::path p = cfg.out_dir / "stability.txt";
        atomic_write(p, "half_split_nmi," + format_double(nmi) + "\n");
        outputs.push_back(p);
    }
    write_manifest(cfg, "bundle", {matrix_bin, cls_csv}, outputs);
}

namespace {

struct BundleData {
    bundling::CorrelationNetwork net;  // nodes only (membership), matrices empty
    bundling::BundlePartition partition;
};

// bundles.csv gives word -> bundle id; rebuild the node list/partition.
BundleData read_bundles_csv(const fs::path& p) {
    BundleData out;
    bool header = true;
    for (const auto& line : read_lines(p)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 2) throw DataError("bundles.csv: expected word,bundle_id");
        out.net.nodes.push_back(fields[0]);
        out.partition.assignment.push_back(
            static_cast<int>(parse_int_field(fields[1], "bundle_id")) - 1);
    }
    if (out.net.nodes.empty()) throw DataError("bundles.csv is empty");
    return out;
}

std::string two_by_two_report(const series::ContingencyResult& ct, size_t n_days) {
    std::string s;
    s += "days," + std::to_string(n_days) + "\n";
    s += "a_high_vol_and_dominant," + std::to_string(ct.a) + "\n";
    s += "b_high_vol_only," + std::to_string(ct.b) + "\n";
    s += "c_dominant_only," + std::to_string(ct.c) + "\n";
    s += "d_neither," + std::to_string(ct.d) + "\n";
    s += "p_two_sided," + format_double(ct.p_two_sided) + "\n";
    s += "log10_p," + format_double(ct.log_p / std::log(10.0)) + "\n";
    return s;
}

}  // namespace

void run_analyze(const RunConfig& cfg) {
    cfg.validate();
    const fs::path matrix_bin = cfg.out_dir / "matrix.bin";
    const fs::path cls_csv = cfg.out_dir / "classifications.csv";
    const fs::path bundles_csv = cfg.out_dir / "bundles.csv";
    const fs::path index_path = default_path(cfg, cfg.index, "index.csv");
    const fs::path perf_path = default_path(cfg, cfg.performance, "performance.csv");
    verify_inputs(cfg, "analyze", {matrix_bin, cls_csv, bundles_csv, index_path, perf_path});

    const corpus::DailyFrequencyMatrix matrix = corpus::read_matrix_cache(matrix_bin);
    const auto classifications = extraction::classifications_from_csv(read_file(cls_csv));
    const corpus::DailyFrequencyMatrix extracted = extracted_matrix(matrix, classifications);
    BundleData bundles = read_bundles_csv(bundles_csv);
    const series::AlignedSeries index_raw = series::read_index_csv(index_path, "index");
    const series::PerformanceData perf = series::read_performance_csv(perf_path);

    // gamma per bundle on corpus dates, then intersect all calendars.
    size_t zero_days = 0;
    std::vector<series::AlignedSeries> gammas = series::bundle_relative_frequency(
        extracted, bundles.net, bundles.partition, &zero_days);
    const int nb = bundles.partition.n_bundles();

    std::vector<series::AlignedSeries> to_align = gammas;
    to_align.push_back(index_raw);
    to_align.push_back(perf.pct_profitable);
    to_align.push_back(perf.n_traders);
    std::vector<size_t> dropped;
    std::vector<series::AlignedSeries> aligned = series::align(to_align, &dropped);
    const series::AlignedSeries& index = aligned[static_cast<size_t>(nb)];
    const series::AlignedSeries& pct = aligned[static_cast<size_t>(nb) + 1];
    const series::AlignedSeries& traders = aligned[static_cast<size_t>(nb) + 2];

    std::string align_log = "zero_denominator_days," + std::to_string(zero_days) + "\n";
    align_log += "aligned_days," + std::to_string(index.size()) + "\n";
    for (size_t k = 0; k < to_align.size(); ++k)
        align_log += "dropped_" + to_align[k].name + "," + std::to_string(dropped[k]) + "\n";

    const series::AlignedSeries theta_index = series::first_difference(index);

    // Cross-correlation per bundle; pick the same-day and next-day bundle
    // by which lag clears the null band the strongest.
    std::vector<series::CcfResult> ccfs;
    std::vector<series::AlignedSeries> theta_gammas;
    for (int b = 0; b < nb; ++b) {
        const auto& gamma = aligned[static_cast<size_t>(b)];
        theta_gammas.push_back(series::first_difference(gamma));
        ccfs.push_back(series::cross_correlation(theta_index, theta_gammas.back(),
                                                 cfg.max_lag, cfg.n_null,
                                                 derive_seed(stage_seed(cfg, 106), b)));
    }
    auto rho_at = [&](int b, int lag) {
        const auto& c = ccfs[static_cast<size_t>(b)];
        for (size_t i = 0; i < c.lags.size(); ++i)
            if (c.lags[i] == lag) return c.rho[i];
        return 0.0;
    };
    int same_day = 0;
    for (int b = 1; b < nb; ++b)
        if (std::fabs(rho_at(b, 0)) > std::fabs(rho_at(same_day, 0))) same_day = b;
    int next_day = same_day == 0 ? (nb > 1 ? 1 : 0) : 0;
    for (int b = 0; b < nb; ++b) {
        if (b == same_day) continue;
        if (std::fabs(rho_at(b, -1)) > std::fabs(rho_at(next_day, -1))) next_day = b;
    }

    std::vector<fs::path> outputs;
    for (int b = 0; b < nb; ++b) {
        const auto& c = ccfs[static_cast<size_t>(b)];
        std::string csv = "lag,rho,ci_low,ci_high,null_band\n";
        for (size_t i = 0; i < c.lags.size(); ++i) {
            csv += std::to_string(c.lags[i]) + "," + format_double(c.rho[i]) + "," +
                   format_double(c.ci_low[i]) + "," + format_double(c.ci_high[i]) + "," +
                   format_double(c.null_band) + "\n";
        }
        const fs::path p = cfg.out_dir / ("ccf_bundle_" + std::to_string(b + 1) + ".csv");
        atomic_write(p, csv);
        outputs.push_back(p);
    }

    // Granger: does each bundle's movement predict the index movement?
    {
        std::string csv = "bundle_id,f,p,n,role\n";
        for (int b = 0; b < nb; ++b) {
            const auto g = series::granger_test(theta_index, theta_gammas[static_cast<size_t>(b)]);
            std::string role = b == same_day ? "same_day" : (b == next_day ? "next_day" : "");
            csv += std::to_string(b + 1) + "," + format_double(g.f) + "," + format_double(g.p) +
                   "," + std::to_string(g.n) + "," + role + "\n";
        }
        const fs::path p = cfg.out_dir / "granger.csv";
        atomic_write(p, csv);
        outputs.push_back(p);
    }

    if (nb >= 2 && same_day != next_day) {
        const auto& gamma1 = aligned[static_cast<size_t>(same_day)];
        const auto& gamma2 = aligned[static_cast<size_t>(next_day)];

        series::DominanceSeries detail;
        const series::ContingencyResult ct =
            series::dominance_table(gamma1, gamma2, index, &detail);
        std::string dom = "date,z_c,z_vix,delta_c,delta_vix\n";
        for (size_t t = 0; t < detail.dates.size(); ++t) {
            dom += to_iso(detail.dates[t]) + "," + format_double(detail.z_c[t]) + "," +
                   format_double(detail.z_index[t]) + "," +
                   std::to_string(detail.delta_c[t]) + "," +
                   std::to_string(detail.delta_index[t]) + "\n";
        }
        const fs::path dom_p = cfg.out_dir / "dominance.csv";
        atomic_write(dom_p, dom);
        outputs.push_back(dom_p);
        const fs::path ct_p = cfg.out_dir / "contingency.txt";
        atomic_write(ct_p, two_by_two_report(ct, detail.dates.size()));
        outputs.push_back(ct_p);

        // Attention vs performance.
        const series::AlignedSeries attention = series::attention_series(gamma1, gamma2);
        const series::AlignedSeries theta_att = series::first_difference(attention);
        const series::AlignedSeries theta_pct = series::first_difference(pct);
        std::string att_csv = "date,attention,theta_attention,theta_performance\n";
        for (size_t t = 0; t < attention.size(); ++t) {
            att_csv += to_iso(attention.dates[t]) + "," + format_double(attention.values[t]);
            if (t >= 1) {
                att_csv += "," + format_double(theta_att.values[t - 1]) + "," +
                           format_double(theta_pct.values[t - 1]);
            } else {
                att_csv += ",,";
            }
            att_csv += "\n";
        }
        const fs::path att_p = cfg.out_dir / "attention.csv";
        atomic_write(att_p, att_csv);
        outputs.push_back(att_p);

        series::AlignedSeries traders_named = traders;
        traders_named.name = "n_traders";
        series::AlignedSeries index_named = index;
        index_named.name = "index";
        const series::AttentionPerformance ap = series::attention_performance(
            attention, pct, {index_named, traders_named}, cfg.n_null, stage_seed(cfg, 107));
        std::string reg = "n," + std::to_string(ap.n) + "\n";
        reg += "r," + format_double(ap.r) + "\n";
        reg += "ci_low," + format_double(ap.ci.lo) + "\n";
        reg += "ci_high," + format_double(ap.ci.hi) + "\n";
        reg += "null_band," + format_double(ap.null_band) + "\n";
        reg += "regressor,coef,se,t\n";
        for (size_t k = 0; k < ap.regression.coef.size(); ++k) {
            reg += ap.regressor_names[k] + "," + format_double(ap.regression.coef[k]) + "," +
                   format_double(ap.regression.se[k]) + "," +
                   format_double(ap.regression.tstat[k]) + "\n";
        }
        reg += "f_vs_intercept," + format_double(ap.regression.f_vs_intercept) + "\n";
        reg += "f_pvalue," + format_double(ap.regression.f_pvalue) + "\n";
        const fs::path reg_p = cfg.out_dir / "regression.txt";
        atomic_write(reg_p, reg);
        outputs.push_back(reg_p);
    }

    // Stationarity battery over every differenced series the tests used.
    {
        std::string csv = "series,adf_stat,adf_p,pp_stat,pp_p,ar1\n";
        auto add_row = [&](const series::AlignedSeries& s) {
            const auto adf = series::adf_test(s, cfg.adf_lags);
            const auto pp = series::pp_test(s);
            const double phi = series::ar1_coefficient(s);
            csv += s.name + "," + format_double(adf.stat) + "," + format_double(adf.p) + "," +
                   format_double(pp.stat) + "," + format_double(pp.p) + "," +
                   format_double(phi) + "\n";
        };
        add_row(theta_index);
        for (int b = 0; b < nb; ++b) add_row(theta_gammas[static_cast<size_t>(b)]);
        add_row(series::first_difference(pct));
        const fs::path p = cfg.out_dir / "stationarity.csv";
        atomic_write(p, csv);
        outputs.push_back(p);
    }

    {
        std::string roles = "role,bundle_id\nsame_day," + std::to_string(same_day + 1) +
                            "\nnext_day," + std::to_string(next_day + 1) + "\n";
        const fs::path p = cfg.out_dir / "bundle_roles.csv";
        atomic_write(p, roles);
        outputs.push_back(p);
        const fs::path a = cfg.out_dir / "alignment.txt";
        atomic_write(a, align_log);
        outputs.push_back(a);
    }
    write_manifest(cfg, "analyze", {matrix_bin, cls_csv, bundles_csv, index_path, perf_path},
                   outputs);
}

void run_report(const RunConfig& cfg) {
    cfg.validate();
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;

    // Fig.-3-style CCF charts for every bundle with a ccf csv.
    for (int b = 1;; ++b) {
        const fs::path p = cfg.out_dir / ("ccf_bundle_" + std::to_string(b) + ".csv");
        if (!fs::exists(p)) break;
        verify_inputs(cfg, "report", {p});
        inputs.push_back(p);
        svg::LagChart chart;
        chart.title = "Cross-correlation: index movements vs bundle " + std::to_string(b);
        bool header = true;
        for (const auto& line : read_lines(p)) {
            if (line.empty()) continue;
            if (header) {
                header = false;
                continue;
            }
            const auto f = split(line, ',');
            chart.lags.push_back(static_cast<int>(parse_int_field(f[0], "lag")));
            chart.rho.push_back(parse_double_field(f[1], "rho"));
            chart.ci_low.push_back(parse_double_field(f[2], "ci_low"));
            chart.ci_high.push_back(parse_double_field(f[3], "ci_high"));
            chart.null_band = parse_double_field(f[4], "null_band");
        }
        const fs::path out = cfg.out_dir / ("ccf_bundle_" + std::to_string(b) + ".svg");
        atomic_write(out, svg::render_lag_chart(chart));
        outputs.push_back(out);
    }

    // Fig.-4-style dominance chart.
    const fs::path dom_p = cfg.out_dir / "dominance.csv";
    if (fs::exists(dom_p)) {
        verify_inputs(cfg, "report", {dom_p});
        inputs.push_back(dom_p);
        svg::DualSeriesChart chart;
        chart.title = "Temporal dominance vs volatility (z-scores)";
        chart.a_label = "z_C (bundle dominance)";
        chart.b_label = "z_index";
        bool header = true;
        for (const auto& line : read_lines(dom_p)) {
            if (line.empty()) continue;
            if (header) {
                header = false;
                continue;
            }
            const auto f = split(line, ',');
            chart.dates.push_back(parse_iso_date(f[0]));
            chart.a.push_back(parse_double_field(f[1], "z_c"));
            chart.b.push_back(parse_double_field(f[2], "z_vix"));
        }
        series::AlignedSeries sa{chart.dates, chart.a, "z_c"};
        series::AlignedSeries sb{chart.dates, chart.b, "z_vix"};
        chart.a_smooth = series::kernel_smooth(sa, cfg.smooth_window).values;
        chart.b_smooth = series::kernel_smooth(sb, cfg.smooth_window).values;
        const fs::path out = cfg.out_dir / "dominance.svg";
        atomic_write(out, svg::render_dual_series_chart(chart));
        outputs.push_back(out);
    }

    // Fig.-5-style attention/performance scatter.
    const fs::path att_p = cfg.out_dir / "attention.csv";
    if (fs::exists(att_p)) {
        verify_inputs(cfg, "report", {att_p});
        inputs.push_back(att_p);
        svg::ScatterChart chart;
        chart.title = "Attention changes vs performance changes";
        chart.x_label = "theta attention";
        chart.y_label = "theta performance";
        bool header = true;
        for (const auto& line : read_lines(att_p)) {
            if (line.empty()) continue;
            if (header) {
                header = false;
                continue;
            }
            const auto f = split(line, ',');
            if (f.size() < 4 || f[2].empty() || f[3].empty()) continue;
            chart.x.push_back(parse_double_field(f[2], "theta_attention"));
            chart.y.push_back(parse_double_field(f[3], "theta_performance"));
        }
        if (chart.x.size() >= 3) {
            const std::vector<double> ones(chart.x.size(), 1.0);
            const stats::OlsFit fit = stats::ols(chart.y, {ones, chart.x});
            chart.fit_intercept = fit.coef[0];
            chart.fit_slope = fit.coef[1];
        }
        const fs::path out = cfg.out_dir / "attention_scatter.svg";
        atomic_write(out, svg::render_scatter_chart(chart));
        outputs.push_back(out);
    }

    if (outputs.empty())
        throw DataError("report: no analyze outputs found in " + cfg.out_dir.string() +
                        " (run analyze first)");
    write_manifest(cfg, "report", inputs, outputs);
}

}  // namespace bundlescope::pipeline
