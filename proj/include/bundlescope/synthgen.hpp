#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bundlescope/corpus.hpp"
#include "bundlescope/series.hpp"

namespace bundlescope::synthgen {

struct SynthSpec {
    size_t days = 858;
    size_t n_routinary_words = 200;
    std::vector<size_t> bundle_sizes = {20, 20};
    std::vector<int> bundle_lags = {0, 1};  // 0 = same-day, 1 = next-day
    // Extra bundle of external words with bursts unrelated to the index
    // (the analog of a foreign-language bundle). 0 = none.
    size_t neutral_bundle_size = 0;
    double noise = 1.0;                     // 0 = noise-free counts
    double burstiness = 1.0;
    double zipf_exponent = 1.9;             // base-frequency distribution
    double coupling = 0.2;                  // planted corr(theta_A, theta_p)
    uint64_t seed = 1;

    void validate() const;  // throws DataError on inconsistent spec
};

struct GroundTruth {
    // word -> -1 for routinary, else 0-based bundle index.
    std::map<std::string, int> word_class;
    series::AlignedSeries index;
    double performance_coupling = 0.0;

    bool is_external(const std::string& w) const {
        auto it = word_class.find(w);
        return it != word_class.end() && it->second >= 0;
    }
};

struct SynthCorpus {
    corpus::DailyFrequencyMatrix matrix;
    series::AlignedSeries index;        // stand-in for daily closes
    series::AlignedSeries performance;  // pct of traders profitable
    series::AlignedSeries n_traders;
    GroundTruth truth;
    std::vector<Date> calendar;
};

// Positive mean-reverting index: AR(1) in log-space with persistence
// 0.98; its first differences are stationary.
series::AlignedSeries gen_index(const std::vector<Date>& calendar, uint64_t seed);

// Counts that track total volume: Poisson draws around mean_freq *
// N(t)/<N>, damped towards exact proportionality as noise -> 0.
std::vector<uint32_t> gen_routinary_word(const std::vector<double>& totals,
                                         double mean_freq, double noise, uint64_t seed);

// One bundle of `size` words sharing a burst process tied to the
// z-scored index level at the given lag (lag 1 couples inversely: the
// next-day bundle dominates quiet days), plus independent per-word
// noise. With index_coupled = false the shared bursts ignore the index
// entirely. Returns size x days counts.
std::vector<std::vector<uint32_t>> gen_external_bundle(const std::vector<Date>& calendar,
                                                       size_t size,
                                                       const series::AlignedSeries& index,
                                                       int lag, double burstiness,
                                                       double noise, uint64_t seed,
                                                       bool index_coupled = true);

// Full synthetic corpus with planted ground truth. Deterministic per
// spec.seed and independent of generation parallelism.
SynthCorpus gen_corpus(const SynthSpec& spec);

// Messages whose tokenization reproduces the matrix exactly (the same
// JSONL format corpus::parse_messages ingests).
std::string matrix_to_jsonl(const corpus::DailyFrequencyMatrix& m, uint64_t seed);

std::string ground_truth_to_csv(const GroundTruth& truth);

}  // namespace bundlescope::synthgen
