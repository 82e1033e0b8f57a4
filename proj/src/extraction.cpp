#include "bundlescope/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "bundlescope/errors.hpp"
#include "bundlescope/stats.hpp"
#include "bundlescope/textio.hpp"

namespace bundlescope::extraction {

Decomposition decompose(std::span<const double> word_series,
                        std::span<const double> totals) {
    if (word_series.size() != totals.size())
        throw DataError("decompose: series length mismatch");
    size_t active = 0;
    double sum_f = 0.0, sum_n = 0.0;
    for (size_t t = 0; t < totals.size(); ++t) {
        if (totals[t] > 0.0) {
            ++active;
            sum_f += word_series[t];
            sum_n += totals[t];
        }
    }
    if (active < 2) throw DataError("decompose: need at least 2 days with N(t) > 0");

    const double mean_f = sum_f / static_cast<double>(active);
    const double mean_n = sum_n / static_cast<double>(active);

    Decomposition d;
    d.routinary.reserve(active);
    d.external.reserve(active);
    for (size_t t = 0; t < totals.size(); ++t) {
        if (totals[t] <= 0.0) continue;
        const double fr = mean_f * totals[t] / mean_n;
        d.routinary.push_back(fr);
        d.external.push_back(word_series[t] - fr);
    }
    d.sigma_r = stats::pop_std(d.routinary);
    d.sigma_ext = stats::pop_std(d.external);
    return d;
}

double eta_ratio(const Decomposition& d) {
    if (d.degenerate()) throw DataError("eta_ratio: degenerate word (both sigmas zero)");
    if (d.sigma_ext == 0.0) return std::numeric_limits<double>::infinity();
    return d.sigma_r / d.sigma_ext;
}

const char* label_name(WordLabel l) {
    switch (l) {
        case WordLabel::kRoutinary: return "routinary";
        case WordLabel::kExternal: return "external";
        case WordLabel::kAmbiguous: return "ambiguous";
    }
    return "ambiguous";
}

namespace {

WordLabel parse_label(std::string_view s) {
    if (s == "routinary") return WordLabel::kRoutinary;
    if (s == "external") return WordLabel::kExternal;
    if (s == "ambiguous") return WordLabel::kAmbiguous;
    throw DataError("unknown label: " + std::string(s));
}

// sigma of f - f_r. f_r depends only on N(t) and mean f, both
// permutation-invariant, so it is fixed per word across shuffles.
double sigma_ext_of(std::span<const double> f, std::span<const double> f_r) {
    double sum_ext = 0.0, sum_sq = 0.0;
    const double n = static_cast<double>(f.size());
    for (size_t t = 0; t < f.size(); ++t) {
        const double e = f[t] - f_r[t];
        sum_ext += e;
        sum_sq += e * e;
    }
    const double mean_e = sum_ext / n;
    const double var_e = std::max(sum_sq / n - mean_e * mean_e, 0.0);
    return std::sqrt(var_e);
}

}  // namespace

std::vector<WordClassification> classify(const corpus::DailyFrequencyMatrix& matrix,
                                         uint64_t seed, const ClassifyOptions& opts) {
    if (opts.n_shuffles < 100) throw DataError("classify: n_shuffles must be >= 100");
    const auto active = matrix.active_days();
    if (active.size() < 2) throw DataError("classify: fewer than 2 days with N(t) > 0");

    std::vector<double> n_active(active.size());
    for (size_t i = 0; i < active.size(); ++i)
        n_active[i] = static_cast<double>(matrix.totals[active[i]]);

    std::vector<WordClassification> out(matrix.n_words());
    parallel_for(matrix.n_words(), opts.threads, [&](size_t w) {
        WordClassification& cls = out[w];
        cls.word = matrix.vocabulary[w];
        cls.total_count = matrix.word_total(w);

        std::vector<double> f(active.size());
        for (size_t i = 0; i < active.size(); ++i)
            f[i] = static_cast<double>(matrix.counts[active[i]][w]);

        const Decomposition d = decompose(f, n_active);
        if (d.degenerate()) {
            cls.label = WordLabel::kAmbiguous;
            cls.eta = 0.0;
            cls.z = 0.0;
            return;
        }
        cls.eta = eta_ratio(d);

        // Shuffle null: permute this word's counts over active days,
        // N(t) held fixed. f_r is permutation-invariant, so only
        // sigma_ext varies.
        const PermutationPlan plan{hash_seed(seed, cls.word), opts.n_shuffles};
        std::vector<double> etas(opts.n_shuffles);
        std::vector<double> scratch(f.size());
        for (size_t s = 0; s < opts.n_shuffles; ++s) {
            std::copy(f.begin(), f.end(), scratch.begin());
            Rng rng(plan.replicate_seed(s));
            rng.shuffle_doubles(scratch);
            const double sigma_ext_s = sigma_ext_of(scratch, d.routinary);
            etas[s] = sigma_ext_s == 0.0 ? std::numeric_limits<double>::infinity()
                                         : d.sigma_r / sigma_ext_s;
        }
        bool null_finite = true;
        for (double e : etas)
            if (!std::isfinite(e)) null_finite = false;
        if (!null_finite) {
            // Permutations cannot break the proportionality; treat as
            // degenerate rather than invent a z.
            cls.label = WordLabel::kAmbiguous;
            return;
        }
        cls.eta_null_mean = stats::mean(etas);
        cls.eta_null_std = stats::pop_std(etas);
        if (cls.eta_null_std == 0.0) {
            cls.z = std::fabs(cls.eta - cls.eta_null_mean) < 1e-12
                        ? 0.0
                        : std::copysign(std::numeric_limits<double>::infinity(),
                                        cls.eta - cls.eta_null_mean);
        } else {
            cls.z = (cls.eta - cls.eta_null_mean) / cls.eta_null_std;
        }

        const bool external = opts.use_eta_criterion
                                  ? cls.eta < opts.eta_cut
                                  : (cls.z > opts.z_low && cls.z < opts.z_high);
        cls.label = external ? WordLabel::kExternal : WordLabel::kRoutinary;
    });
    return out;
}

double stopword_diagnostic(const std::vector<WordClassification>& classifications,
                           const std::vector<std::string>& stopwords) {
    if (stopwords.empty()) throw DataError("stopword_diagnostic: empty stopword list");
    std::unordered_set<std::string_view> stop(stopwords.begin(), stopwords.end());
    size_t present = 0, routinary = 0;
    for (const auto& cls : classifications) {
        if (!stop.count(cls.word)) continue;
        ++present;
        if (cls.label == WordLabel::kRoutinary) ++routinary;
    }
    if (present == 0)
        throw DataError("stopword_diagnostic: no listed stopword is in the vocabulary");
    return static_cast<double>(routinary) / static_cast<double>(present);
}

std::string classifications_to_csv(const std::vector<WordClassification>& cls) {
    std::string out = "word,total_count,eta,eta_null_mean,eta_null_std,z,label\n";
    for (const auto& c : cls) {
        out += c.word;
        out += ',';
        out += std::to_string(c.total_count);
        out += ',';
        out += format_double(c.eta);
        out += ',';
        out += format_double(c.eta_null_mean);
        out += ',';
        out += format_double(c.eta_null_std);
        out += ',';
        out += format_double(c.z);
        out += ',';
        out += label_name(c.label);
        out += '\n';
    }
    return out;
}

std::vector<WordClassification> classifications_from_csv(const std::string& content) {
    std::vector<WordClassification> out;
    bool header = true;
    size_t start = 0;
    while (start < content.size()) {
        size_t end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        std::string_view line(content.data() + start, end - start);
        start = end + 1;
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        auto fields = split(line, ',');
        if (fields.size() != 7)
            throw DataError("classifications csv: expected 7 fields, got " +
                            std::to_string(fields.size()));
        WordClassification c;
        c.word = fields[0];
        c.total_count = static_cast<uint64_t>(parse_int_field(fields[1], "total_count"));
        c.eta = parse_double_field(fields[2], "eta");
        c.eta_null_mean = parse_double_field(fields[3], "eta_null_mean");
        c.eta_null_std = parse_double_field(fields[4], "eta_null_std");
        c.z = parse_double_field(fields[5], "z");
        c.label = parse_label(fields[6]);
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace bundlescope::extraction
