#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bundlescope/corpus.hpp"

namespace bundlescope::extraction {

// Split of a word's daily frequency into the volume-proportional part
// f_r(t) = <f> * N(t)/<N> and the residual f_ext = f - f_r. Means and
// standard deviations run over days with N(t) > 0 only.
struct Decomposition {
    std::vector<double> routinary;
    std::vector<double> external;
    double sigma_r = 0.0;
    double sigma_ext = 0.0;

    bool degenerate() const { return sigma_r == 0.0 && sigma_ext == 0.0; }
};

Decomposition decompose(std::span<const double> word_series,
                        std::span<const double> totals);

// sigma_r / sigma_ext; +infinity when sigma_ext == 0 and sigma_r > 0.
// Throws DataError when both are zero.
double eta_ratio(const Decomposition& d);

enum class WordLabel { kRoutinary, kExternal, kAmbiguous };

const char* label_name(WordLabel l);

struct WordClassification {
    std::string word;
    uint64_t total_count = 0;
    double eta = 0.0;
    double eta_null_mean = 0.0;
    double eta_null_std = 0.0;
    double z = 0.0;
    WordLabel label = WordLabel::kAmbiguous;
};

struct ClassifyOptions {
    size_t n_shuffles = 1000;
    double z_low = -2.0;   // open interval: external iff z_low < z < z_high
    double z_high = 2.0;
    bool use_eta_criterion = false;  // alternative: external iff eta < eta_cut
    double eta_cut = 0.35;
    int threads = 1;
};

// Classifies every word of the matrix against its own shuffle null. The
// null permutes the word's counts over days with N(t) > 0 while holding
// N(t) fixed; z = (eta - eta*)/sigma(eta*). Per-word shuffle seeds are
// hash_seed(seed, word), so the result is independent of scheduling.
std::vector<WordClassification> classify(const corpus::DailyFrequencyMatrix& matrix,
                                         uint64_t seed,
                                         const ClassifyOptions& opts = {});

// Fraction of the stopwords present in the vocabulary that came out
// routinary. Throws DataError when none of them is in the vocabulary.
double stopword_diagnostic(const std::vector<WordClassification>& classifications,
                           const std::vector<std::string>& stopwords);

std::string classifications_to_csv(const std::vector<WordClassification>& cls);
std::vector<WordClassification> classifications_from_csv(const std::string& content);

}  // namespace bundlescope::extraction
