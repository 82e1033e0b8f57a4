#include "bundlescope/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bundlescope/errors.hpp"
#include "bundlescope/stats.hpp"
#include "bundlescope/textio.hpp"

namespace bundlescope::synthgen {

void SynthSpec::validate() const {
    if (days < 120) throw DataError("synth spec: days must be >= 120");
    if (bundle_sizes.size() != bundle_lags.size())
        throw DataError("synth spec: bundle_sizes and bundle_lags must match");
    for (size_t s : bundle_sizes)
        if (s < 2) throw DataError("synth spec: bundle sizes must be >= 2");
    if (neutral_bundle_size == 1)
        throw DataError("synth spec: neutral bundle must be empty or have >= 2 words");
    for (int l : bundle_lags)
        if (l != 0 && l != 1) throw DataError("synth spec: bundle lags must be 0 or 1");
    if (noise < 0.0 || burstiness < 0.0) throw DataError("synth spec: negative noise level");
    if (zipf_exponent <= 1.0) throw DataError("synth spec: zipf exponent must exceed 1");
    if (coupling <= -1.0 || coupling >= 1.0)
        throw DataError("synth spec: coupling must be in (-1, 1)");
}

series::AlignedSeries gen_index(const std::vector<Date>& calendar, uint64_t seed) {
    if (calendar.size() < 2) throw DataError("gen_index: need at least 2 days");
    series::AlignedSeries s;
    s.name = "index";
    s.dates = calendar;
    s.values.resize(calendar.size());
    Rng rng(derive_seed(seed, 0xA11CE));
    const double mu = std::log(20.0);   // resting level ~20
    const double phi = 0.98;
    const double sigma = 0.05;
    double x = mu + sigma / std::sqrt(1.0 - phi * phi) * rng.normal();
    for (size_t t = 0; t < calendar.size(); ++t) {
        x = mu + phi * (x - mu) + sigma * rng.normal();
        s.values[t] = std::exp(x);
    }
    return s;
}

std::vector<uint32_t> gen_routinary_word(const std::vector<double>& totals, double mean_freq,
                                         double noise, uint64_t seed) {
    if (mean_freq < 1.0) throw DataError("gen_routinary_word: mean frequency must be >= 1");
    const double mean_n = stats::mean(totals);
    Rng rng(seed);
    std::vector<uint32_t> counts(totals.size(), 0);
    for (size_t t = 0; t < totals.size(); ++t) {
        if (totals[t] <= 0.0) continue;
        const double lambda = mean_freq * totals[t] / mean_n;
        const double draw = static_cast<double>(rng.poisson(lambda));
        const double v = lambda + noise * (draw - lambda);
        counts[t] = v <= 0.0 ? 0 : static_cast<uint32_t>(std::llround(v));
    }
    return counts;
}

std::vector<std::vector<uint32_t>> gen_external_bundle(const std::vector<Date>& calendar,
                                                       size_t size,
                                                       const series::AlignedSeries& index,
                                                       int lag, double burstiness,
                                                       double noise, uint64_t seed,
                                                       bool index_coupled) {
    if (size < 2) throw DataError("gen_external_bundle: size must be >= 2");
    if (lag != 0 && lag != 1) throw DataError("gen_external_bundle: lag must be 0 or 1");
    if (index.size() != calendar.size())
        throw DataError("gen_external_bundle: index must cover the calendar");
    const size_t days = calendar.size();

    // Shared burst multiplier: exp of the z-scored index level at the
    // coupled day, inverted for the next-day bundle so it peaks on quiet
    // days, plus a bundle-wide idiosyncratic day factor that separates
    // bundles coupled to the same index.
    const std::vector<double> z_level = stats::zscore(index.values);
    const double direction = lag == 0 ? 1.0 : -1.0;
    const double kappa = index_coupled ? 0.8 * burstiness : 0.0;
    const double idio = 0.3 * burstiness;

    Rng shared(derive_seed(seed, 0xB0057));
    std::vector<double> mult(days);
    for (size_t t = 0; t < days; ++t) {
        const size_t coupled = std::min(t + static_cast<size_t>(lag), days - 1);
        const double g = shared.normal();
        mult[t] = std::exp(kappa * direction * z_level[coupled] + idio * g -
                           (kappa * kappa + idio * idio) / 2.0);
    }

    std::vector<std::vector<uint32_t>> out(size, std::vector<uint32_t>(days, 0));
    for (size_t w = 0; w < size; ++w) {
        Rng rng(derive_seed(seed, w + 1));
        const double base = 10.0 + 15.0 * rng.next_double();
        for (size_t t = 0; t < days; ++t) {
            const double jitter = noise > 0.0
                                      ? std::exp(0.25 * noise * rng.normal() -
                                                 0.25 * 0.25 * noise * noise / 2.0)
                                      : 1.0;
            const double lambda = base * mult[t] * jitter;
            const double draw = static_cast<double>(rng.poisson(lambda));
            const double v = lambda + noise * (draw - lambda);
            out[w][t] = v <= 0.0 ? 0 : static_cast<uint32_t>(std::llround(v));
        }
    }
    return out;
}

namespace {

std::string routinary_name(size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "base%04zu", i);
    return buf;
}

std::string bundle_word_name(size_t b, size_t w) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "evt%zuw%02zu", b + 1, w);
    return buf;
}

std::vector<Date> make_calendar(size_t days) {
    std::vector<Date> cal;
    cal.reserve(days);
    Date d = make_date(2007, 1, 3);
    while (cal.size() < days) {
        if (is_business_day(d)) cal.push_back(d);
        d.days += 1;
    }
    return cal;
}

}  // namespace

SynthCorpus gen_corpus(const SynthSpec& spec) {
    spec.validate();
    SynthCorpus out;
    out.calendar = make_calendar(spec.days);
    out.index = gen_index(out.calendar, spec.seed);
    out.truth.index = out.index;
    out.truth.performance_coupling = spec.coupling;

    // Daily volume driver: i.i.d. lognormal day effect.
    Rng vol_rng(derive_seed(spec.seed, 0xD01));
    std::vector<double> driver(spec.days);
    for (auto& v : driver) v = std::exp(0.35 * vol_rng.normal() - 0.35 * 0.35 / 2.0);

    // Base frequencies from a bounded power law so word totals have a
    // Zipf-like profile.
    Rng freq_rng(derive_seed(spec.seed, 0xD02));
    std::vector<double> base_freq(spec.n_routinary_words);
    double routinary_mass = 0.0;
    for (auto& f : base_freq) {
        double u = freq_rng.next_double();
        while (u <= 0.0) u = freq_rng.next_double();
        f = std::min(15.0 * std::pow(u, -1.0 / (spec.zipf_exponent - 1.0)), 500.0);
        routinary_mass += f;
    }

    corpus::DailyFrequencyMatrix& m = out.matrix;
    m.dates = out.calendar;

    // Externals first: their daily mass is deducted from the routinary
    // budget so the total volume stays driver-proportional. Bursts must
    // displace routine chatter, not inflate N(t), or every burst word
    // would covary with the totals and stop being external.
    std::vector<std::pair<std::string, std::vector<uint32_t>>> columns;
    columns.reserve(spec.n_routinary_words + 64);
    std::vector<double> external_total(spec.days, 0.0);
    const size_t n_coupled = spec.bundle_sizes.size();
    for (size_t b = 0; b < n_coupled + (spec.neutral_bundle_size > 0 ? 1 : 0); ++b) {
        const bool neutral = b >= n_coupled;
        const size_t size = neutral ? spec.neutral_bundle_size : spec.bundle_sizes[b];
        auto counts = gen_external_bundle(out.calendar, size, out.index,
                                          neutral ? 0 : spec.bundle_lags[b],
                                          spec.burstiness, spec.noise,
                                          derive_seed(spec.seed, 0xE00 + b), !neutral);
        for (size_t w = 0; w < counts.size(); ++w) {
            const std::string word = bundle_word_name(b, w);
            for (size_t t = 0; t < spec.days; ++t) external_total[t] += counts[w][t];
            columns.emplace_back(word, std::move(counts[w]));
            out.truth.word_class[word] = static_cast<int>(b);
        }
    }
    const double mean_external = stats::mean(external_total);
    std::vector<double> budget(spec.days);
    for (size_t t = 0; t < spec.days; ++t) {
        const double target = driver[t] * (routinary_mass + mean_external);
        budget[t] = std::max(target - external_total[t], 0.2 * target);
    }
    for (size_t i = 0; i < spec.n_routinary_words; ++i) {
        const std::string word = routinary_name(i);
        columns.emplace_back(word, gen_routinary_word(budget, base_freq[i], spec.noise,
                                                      hash_seed(spec.seed, word)));
        out.truth.word_class[word] = -1;
    }
    std::sort(columns.begin(), columns.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    m.vocabulary.reserve(columns.size());
    for (auto& [w, c] : columns) m.vocabulary.push_back(w);
    m.counts.assign(spec.days, std::vector<uint32_t>(columns.size(), 0));
    m.totals.assign(spec.days, 0);
    for (size_t w = 0; w < columns.size(); ++w)
        for (size_t t = 0; t < spec.days; ++t) {
            m.counts[t][w] = columns[w].second[t];
            m.totals[t] += columns[w].second[t];
        }
    m.check_invariants();

    // Performance series with planted coupling: theta_p is a unit-variance
    // mix of the standardized attention changes and fresh noise, so the
    // population correlation equals spec.coupling exactly.
    std::vector<double> theta_p(spec.days - 1, 0.0);
    if (spec.bundle_sizes.size() >= 2) {
        std::vector<double> gamma1(spec.days), gamma2(spec.days);
        for (size_t t = 0; t < spec.days; ++t) {
            double b1 = 0.0, b2 = 0.0, denom = 0.0;
            for (size_t w = 0; w < m.n_words(); ++w) {
                const int cls = out.truth.word_class.at(m.vocabulary[w]);
                if (cls < 0) continue;
                denom += m.counts[t][w];
                if (cls == 0) b1 += m.counts[t][w];
                if (cls == 1) b2 += m.counts[t][w];
            }
            gamma1[t] = denom > 0.0 ? b1 / denom : 0.0;
            gamma2[t] = denom > 0.0 ? b2 / denom : 0.0;
        }
        std::vector<double> attention(spec.days);
        for (size_t t = 0; t < spec.days; ++t)
            attention[t] = std::fabs(gamma1[t] - gamma2[t]);
        const std::vector<double> diff_a = stats::first_differences(attention);
        Rng perf_rng(derive_seed(spec.seed, 0xF01));
        if (stats::pop_std(diff_a) > 0.0) {
            const std::vector<double> theta_a = stats::zscore(diff_a);
            const double beta = spec.coupling;
            for (size_t t = 0; t + 1 < spec.days; ++t)
                theta_p[t] = beta * theta_a[t] + std::sqrt(1.0 - beta * beta) * perf_rng.normal();
        } else {
            for (auto& v : theta_p) v = perf_rng.normal();
        }
    } else {
        Rng perf_rng(derive_seed(spec.seed, 0xF01));
        for (auto& v : theta_p) v = perf_rng.normal();
    }
    out.performance.name = "pct_profitable";
    out.performance.dates = out.calendar;
    out.performance.values.resize(spec.days);
    out.performance.values[0] = 0.5;
    for (size_t t = 1; t < spec.days; ++t)
        out.performance.values[t] = out.performance.values[t - 1] + 0.004 * theta_p[t - 1];

    out.n_traders.name = "n_traders";
    out.n_traders.dates = out.calendar;
    out.n_traders.values.resize(spec.days);
    Rng trader_rng(derive_seed(spec.seed, 0xF02));
    double level = 60.0;
    for (size_t t = 0; t < spec.days; ++t) {
        level = 60.0 + 0.9 * (level - 60.0) + 2.0 * trader_rng.normal();
        out.n_traders.values[t] = std::max(5.0, std::round(level));
    }
    return out;
}

std::string matrix_to_jsonl(const corpus::DailyFrequencyMatrix& m, uint64_t seed) {
    // Every word occurrence becomes a token in some message of its day;
    // ~12 tokens per message, order shuffled so messages look mixed. The
    // token stream per day is deterministic in (seed, day).
    std::string out;
    for (size_t t = 0; t < m.n_dates(); ++t) {
        std::vector<size_t> stream;
        stream.reserve(static_cast<size_t>(m.totals[t]));
        for (size_t w = 0; w < m.n_words(); ++w)
            for (uint32_t k = 0; k < m.counts[t][w]; ++k) stream.push_back(w);
        Rng rng(derive_seed(seed, static_cast<uint64_t>(m.dates[t].days)));
        rng.shuffle(stream);

        const std::string day = to_iso(m.dates[t]);
        size_t pos = 0;
        size_t msg_no = 0;
        while (pos < stream.size()) {
            const size_t len = 6 + static_cast<size_t>(rng.below(13));  // 6..18 tokens
            std::string text;
            for (size_t k = 0; k < len && pos < stream.size(); ++k, ++pos) {
                if (!text.empty()) text += ' ';
                text += m.vocabulary[stream[pos]];
            }
            const uint64_t from = rng.below(40);
            uint64_t to = rng.below(40);
            if (to == from) to = (to + 1) % 40;
            // Trading hours; clamp so a very busy day never rolls past
            // midnight into the next UTC date.
            const size_t sec = std::min<size_t>(9 * 3600 + 30 * 60 + msg_no, 86399);
            char ts[40];
            std::snprintf(ts, sizeof(ts), "%sT%02zu:%02zu:%02zuZ", day.c_str(), sec / 3600,
                          (sec / 60) % 60, sec % 60);
            out += "{\"ts\":\"";
            out += ts;
            out += "\",\"from\":\"t";
            out += std::to_string(from);
            out += "\",\"to\":\"t";
            out += std::to_string(to);
            out += "\",\"text\":\"";
            out += text;
            out += "\"}\n";
            ++msg_no;
        }
    }
    return out;
}

std::string ground_truth_to_csv(const GroundTruth& truth) {
    std::string out = "word,class\n";
    for (const auto& [word, cls] : truth.word_class) {
        out += word;
        out += ',';
        out += cls < 0 ? "routinary" : "bundle_" + std::to_string(cls + 1);
        out += '\n';
    }
    return out;
}

}  // namespace bundlescope::synthgen
