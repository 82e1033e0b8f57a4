#include <doctest.h>

#include <cctype>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

#include "bundlescope/corpus.hpp"
#include "bundlescope/errors.hpp"
#include "bundlescope/extraction.hpp"
#include "bundlescope/rng.hpp"

using namespace bundlescope;
using namespace bundlescope::extraction;

namespace {

// Matrix with given per-word count series; totals = row sums.
corpus::DailyFrequencyMatrix make_matrix(const std::vector<std::string>& words,
                                         const std::vector<std::vector<uint32_t>>& series) {
    corpus::DailyFrequencyMatrix m;
    const size_t days = series[0].size();
    m.vocabulary = words;
    for (size_t t = 0; t < days; ++t) m.dates.push_back(Date{static_cast<int32_t>(13515 + t)});
    m.counts.assign(days, std::vector<uint32_t>(words.size(), 0));
    m.totals.assign(days, 0);
    for (size_t w = 0; w < words.size(); ++w)
        for (size_t t = 0; t < days; ++t) {
            m.counts[t][w] = series[w][t];
            m.totals[t] += series[w][t];
        }
    return m;
}

}  // namespace

TEST_CASE("decompose: hand-evaluated fixture") {
    // <f>=15, <N>=150, f_r = 15 N/150, f_ext = f - f_r.
    const std::vector<double> f{20, 10, 20, 10};
    const std::vector<double> n{100, 200, 100, 200};
    const auto d = decompose(f, n);
    CHECK(d.routinary == std::vector<double>{10, 20, 10, 20});
    CHECK(d.external == std::vector<double>{10, -10, 10, -10});
    CHECK(d.sigma_r == doctest::Approx(5.0));
    CHECK(d.sigma_ext == doctest::Approx(10.0));
    CHECK(eta_ratio(d) == doctest::Approx(0.5));
}

TEST_CASE("decompose: perfectly proportional word has zero external part") {
    const std::vector<double> f{10, 20, 10, 20};
    const std::vector<double> n{100, 200, 100, 200};
    const auto d = decompose(f, n);
    for (size_t t = 0; t < f.size(); ++t) {
        CHECK(d.routinary[t] == doctest::Approx(f[t]));
        CHECK(d.external[t] == doctest::Approx(0.0));
    }
    CHECK(d.sigma_ext == doctest::Approx(0.0));
    CHECK(eta_ratio(d) == std::numeric_limits<double>::infinity());
}

TEST_CASE("decompose: degenerate constants and errors") {
    const std::vector<double> f{5, 5, 5};
    const std::vector<double> n{100, 100, 100};
    const auto d = decompose(f, n);
    CHECK(d.degenerate());
    CHECK_THROWS_AS(eta_ratio(d), DataError);

    const std::vector<double> two{1, 2}, dead{0, 0}, three{1, 2, 3};
    CHECK_THROWS_AS(decompose(two, dead), DataError);
    CHECK_THROWS_AS(decompose(two, three), DataError);

    // sigma_r = 0 with varying f: eta = 0.
    const std::vector<double> f2{4, 8, 6}, n2{100, 100, 100};
    const auto d2 = decompose(f2, n2);
    CHECK(d2.sigma_r == doctest::Approx(0.0));
    CHECK(eta_ratio(d2) == doctest::Approx(0.0));
}

TEST_CASE("decompose: additivity reconstructs observed counts exactly") {
    Rng rng(17);
    std::vector<double> f(50), n(50);
    for (size_t t = 0; t < 50; ++t) {
        f[t] = static_cast<double>(rng.below(100));
        n[t] = static_cast<double>(100 + rng.below(1000));
    }
    const auto d = decompose(f, n);
    for (size_t t = 0; t < 50; ++t)
        CHECK(d.routinary[t] + d.external[t] == doctest::Approx(f[t]).epsilon(1e-12));
}

TEST_CASE("decompose skips days with N(t)=0") {
    const std::vector<double> f{20, 99, 10, 20, 10};
    const std::vector<double> n{100, 0, 200, 100, 200};
    const auto d = decompose(f, n);  // the 99 on the dead day is ignored
    REQUIRE(d.routinary.size() == 4);
    CHECK(d.sigma_r == doctest::Approx(5.0));
    CHECK(d.sigma_ext == doctest::Approx(10.0));
}

TEST_CASE("eta is invariant to a common scale on f and N") {
    Rng rng(23);
    std::vector<double> f(40), n(40);
    for (size_t t = 0; t < 40; ++t) {
        f[t] = static_cast<double>(1 + rng.below(50));
        n[t] = static_cast<double>(500 + rng.below(500));
    }
    const double eta1 = eta_ratio(decompose(f, n));
    std::vector<double> f3(40), n3(40);
    for (size_t t = 0; t < 40; ++t) {
        f3[t] = 3.0 * f[t];
        n3[t] = 3.0 * n[t];
    }
    const double eta2 = eta_ratio(decompose(f3, n3));
    CHECK(eta1 == doctest::Approx(eta2).epsilon(1e-12));
}

namespace {

// 160-day planted corpus: volume swings drive proportional words; bursty
// words ignore the volume.
corpus::DailyFrequencyMatrix planted_matrix(uint64_t seed, size_t days = 160) {
    Rng rng(seed);
    std::vector<double> driver(days);
    for (auto& v : driver) v = std::exp(0.4 * rng.normal());

    std::vector<std::string> words;
    std::vector<std::vector<uint32_t>> series;
    for (int w = 0; w < 12; ++w) {
        words.push_back("prop" + std::to_string(w));
        std::vector<uint32_t> s(days);
        const double mean = 30.0 + 10.0 * w;
        for (size_t t = 0; t < days; ++t)
            s[t] = static_cast<uint32_t>(rng.poisson(mean * driver[t]));
        series.push_back(std::move(s));
    }
    for (int w = 0; w < 6; ++w) {
        words.push_back("burst" + std::to_string(w));
        std::vector<uint32_t> s(days);
        for (size_t t = 0; t < days; ++t) {
            const double intensity = 20.0 * std::exp(0.8 * rng.normal());
            s[t] = static_cast<uint32_t>(rng.poisson(intensity));
        }
        series.push_back(std::move(s));
    }
    return make_matrix(words, series);
}

}  // namespace

TEST_CASE("classify separates planted proportional and bursty words") {
    const auto m = planted_matrix(11);
    ClassifyOptions opts;
    opts.n_shuffles = 400;
    const auto cls = classify(m, 99, opts);
    size_t prop_right = 0, burst_right = 0;
    for (const auto& c : cls) {
        if (c.word.rfind("prop", 0) == 0 && c.label == WordLabel::kRoutinary) ++prop_right;
        if (c.word.rfind("burst", 0) == 0 && c.label == WordLabel::kExternal) ++burst_right;
    }
    CHECK(prop_right >= 11);  // 12 planted
    CHECK(burst_right >= 5);  // 6 planted
}

TEST_CASE("classify is deterministic and thread-count independent") {
    const auto m = planted_matrix(13);
    ClassifyOptions a;
    a.n_shuffles = 150;
    a.threads = 1;
    ClassifyOptions b = a;
    b.threads = 4;
    const auto r1 = classify(m, 7, a);
    const auto r2 = classify(m, 7, b);
    const auto r3 = classify(m, 7, a);
    REQUIRE(r1.size() == r2.size());
    for (size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].word == r2[i].word);
        CHECK(r1[i].z == r2[i].z);  // bit-identical
        CHECK(r1[i].eta == r2[i].eta);
        CHECK(r1[i].label == r2[i].label);
        CHECK(r1[i].z == r3[i].z);
    }
    const auto r4 = classify(m, 8, a);
    bool any_diff = false;
    for (size_t i = 0; i < r1.size(); ++i) any_diff |= r1[i].z != r4[i].z;
    CHECK(any_diff);
}

TEST_CASE("classify null-model sanity: permutation draws stay within |z|<3") {
    // Words that are themselves i.i.d. permutations of a fixed multiset:
    // the empirical z should be within +-3 nearly always.
    Rng rng(31);
    std::vector<double> driver(120);
    for (auto& v : driver) v = std::exp(0.4 * rng.normal());
    std::vector<std::string> words;
    std::vector<std::vector<uint32_t>> series;
    // One strong proportional word keeps totals moving with the driver.
    {
        words.push_back("anchor");
        std::vector<uint32_t> s(120);
        for (size_t t = 0; t < 120; ++t)
            s[t] = static_cast<uint32_t>(std::llround(400.0 * driver[t]));
        series.push_back(std::move(s));
    }
    std::vector<uint32_t> base(120);
    for (size_t t = 0; t < 120; ++t) base[t] = static_cast<uint32_t>(rng.below(60));
    for (int w = 0; w < 30; ++w) {
        words.push_back("iid" + std::to_string(w));
        auto s = base;
        Rng shuf(500 + static_cast<uint64_t>(w));
        shuf.shuffle(s);
        series.push_back(std::move(s));
    }
    const auto m = make_matrix(words, series);
    ClassifyOptions opts;
    opts.n_shuffles = 300;
    const auto cls = classify(m, 123, opts);
    size_t within = 0, total = 0;
    for (const auto& c : cls) {
        if (c.word.rfind("iid", 0) != 0) continue;
        ++total;
        if (std::fabs(c.z) < 3.0) ++within;
    }
    CHECK(total == 30);
    CHECK(within >= 29);
}

TEST_CASE("classify flags degenerate words as ambiguous") {
    const auto m2 = make_matrix({"c1", "c2"}, {{5, 5, 5, 5}, {7, 7, 7, 7}});
    ClassifyOptions opts;
    opts.n_shuffles = 100;
    const auto cls = classify(m2, 3, opts);
    for (const auto& c : cls) CHECK(c.label == WordLabel::kAmbiguous);

    const auto m = make_matrix({"a", "b"}, {{5, 6, 5, 6}, {10, 20, 30, 20}});
    ClassifyOptions too_few;
    too_few.n_shuffles = 50;
    CHECK_THROWS_AS(classify(m, 3, too_few), DataError);
}

TEST_CASE("eta criterion can replace the z window") {
    const auto m = planted_matrix(19);
    ClassifyOptions opts;
    opts.n_shuffles = 200;
    opts.use_eta_criterion = true;
    opts.eta_cut = 0.35;
    const auto cls = classify(m, 5, opts);
    for (const auto& c : cls) {
        if (c.label == WordLabel::kAmbiguous) continue;
        const bool external = c.label == WordLabel::kExternal;
        CHECK(external == (c.eta < 0.35));
    }
}

TEST_CASE("stopword diagnostic") {
    const auto m = planted_matrix(29);
    ClassifyOptions opts;
    opts.n_shuffles = 300;
    const auto cls = classify(m, 44, opts);
    // Stopword proxies: the planted proportional words.
    std::vector<std::string> stopwords;
    for (int w = 0; w < 12; ++w) stopwords.push_back("prop" + std::to_string(w));
    stopwords.push_back("notpresent");
    const double frac = stopword_diagnostic(cls, stopwords);
    CHECK(frac >= 0.95);
    CHECK_THROWS_AS(stopword_diagnostic(cls, {"absent1", "absent2"}), DataError);
    CHECK_THROWS_AS(stopword_diagnostic(cls, {}), DataError);
}

TEST_CASE("classification csv round-trips") {
    const auto m = planted_matrix(37, 140);
    ClassifyOptions opts;
    opts.n_shuffles = 120;
    const auto cls = classify(m, 2, opts);
    const std::string csv = classifications_to_csv(cls);
    const auto back = classifications_from_csv(csv);
    REQUIRE(back.size() == cls.size());
    for (size_t i = 0; i < cls.size(); ++i) {
        CHECK(back[i].word == cls[i].word);
        CHECK(back[i].total_count == cls[i].total_count);
        CHECK(back[i].eta == cls[i].eta);  // round-trip formatting is exact
        CHECK(back[i].z == cls[i].z);
        CHECK(back[i].label == cls[i].label);
    }
}

#include "bundlescope/stopwords.hpp"
#include "bundlescope/textio.hpp"

TEST_CASE("bundled stopword list: 319 unique lowercase entries, file matches") {
    const auto& words = english_stopwords();
    CHECK(words.size() == 319);
    std::set<std::string> uniq(words.begin(), words.end());
    CHECK(uniq.size() == 319);
    for (const auto& w : words) {
        CHECK(!w.empty());
        for (char c : w) CHECK((std::islower(static_cast<unsigned char>(c)) != 0));
    }
    // The shipped data file carries the same list.
    const auto path = std::filesystem::path(__FILE__).parent_path().parent_path() / "data" /
                      "stopwords_en.txt";
    REQUIRE(std::filesystem::exists(path));
    const auto lines = read_lines(path);
    std::vector<std::string> from_file;
    for (const auto& l : lines)
        if (!l.empty()) from_file.push_back(l);
    CHECK(from_file == words);
}

TEST_CASE("proportional word with 1% noise is routinary; volume-blind word is external") {
    Rng rng(71);
    const size_t days = 200;
    std::vector<double> driver(days);
    for (auto& v : driver) v = std::exp(0.4 * rng.normal());

    std::vector<std::string> words{"anchor", "tracker", "blind"};
    std::vector<std::vector<uint32_t>> series(3, std::vector<uint32_t>(days, 0));
    for (size_t t = 0; t < days; ++t) {
        series[0][t] = static_cast<uint32_t>(std::llround(600.0 * driver[t]));
        // f proportional to N(t) with 1% multiplicative noise
        series[1][t] = static_cast<uint32_t>(
            std::llround(80.0 * driver[t] * (1.0 + 0.01 * rng.normal())));
        series[2][t] = static_cast<uint32_t>(rng.poisson(50.0));
    }
    const auto m = make_matrix(words, series);
    ClassifyOptions opts;
    opts.n_shuffles = 400;
    const auto cls = classify(m, 17, opts);
    for (const auto& c : cls) {
        if (c.word == "tracker") {
            CHECK(c.label == WordLabel::kRoutinary);
            CHECK(std::fabs(c.z) > 2.0);
        }
        if (c.word == "blind") CHECK(c.label == WordLabel::kExternal);
    }
}
