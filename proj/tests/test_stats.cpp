#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include <limits>

#include "bundlescope/errors.hpp"
#include "bundlescope/rng.hpp"
#include "bundlescope/stats.hpp"

using namespace bundlescope;
namespace st = bundlescope::stats;

namespace {

std::vector<double> gaussian(size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

// Direct-formula Pearson, independent of the implementation path.
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) /
           std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

}  // namespace

TEST_CASE("pearson matches the direct formula") {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        const auto x = gaussian(10, seed);
        const auto y = gaussian(10, seed + 1000);
        CHECK(st::pearson(x, y) == doctest::Approx(pearson_oracle(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("pearson limit cases and errors") {
    const auto x = gaussian(50, 7);
    std::vector<double> neg(x.size());
    for (size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
    CHECK(st::pearson(x, x) == doctest::Approx(1.0));
    CHECK(st::pearson(x, neg) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(st::pearson(x, std::vector<double>(x.size(), 3.0)), DataError);
}

TEST_CASE("pearson is invariant to positive affine transforms") {
    const auto x = gaussian(40, 11);
    const auto y = gaussian(40, 12);
    std::vector<double> x2(x.size()), y2(y.size());
    for (size_t i = 0; i < x.size(); ++i) {
        x2[i] = 3.5 * x[i] + 10.0;
        y2[i] = 0.25 * y[i] - 2.0;
    }
    CHECK(st::pearson(x2, y2) == doctest::Approx(st::pearson(x, y)).epsilon(1e-12));
}

TEST_CASE("norm_ppf inverts norm_cdf") {
    CHECK(st::norm_ppf(0.975) == doctest::Approx(1.959963985).epsilon(1e-7));
    for (double p : {0.001, 0.01, 0.2, 0.5, 0.7, 0.99, 0.9999})
        CHECK(st::norm_cdf(st::norm_ppf(p)) == doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("fisher_ci closed-form values") {
    // r=0, n=403: tanh(1.95996/sqrt(400)) = 0.09769.
    const auto band = st::fisher_ci(0.0, 403);
    CHECK(band.lo == doctest::Approx(-0.0977).epsilon(0.01));
    CHECK(band.hi == doctest::Approx(0.0977).epsilon(0.01));

    const auto fixture = st::fisher_ci(0.19, 858);
    CHECK(fixture.lo > 0.10);
    CHECK(fixture.hi < 0.27);
    CHECK(std::fabs(fixture.lo - 0.11) <= 0.02);
    CHECK(std::fabs(fixture.hi - 0.26) <= 0.02);
}

TEST_CASE("fisher_ci widens with level and shrinks with n") {
    const auto c90 = st::fisher_ci(0.3, 100, 0.90);
    const auto c95 = st::fisher_ci(0.3, 100, 0.95);
    const auto c99 = st::fisher_ci(0.3, 100, 0.99);
    CHECK(c95.hi - c95.lo > c90.hi - c90.lo);
    CHECK(c99.hi - c99.lo > c95.hi - c95.lo);
    const auto big = st::fisher_ci(0.3, 1000);
    CHECK(big.hi - big.lo < c95.hi - c95.lo);
    CHECK_THROWS_AS(st::fisher_ci(1.0, 100), DataError);
}

TEST_CASE("ols recovers an exact line") {
    std::vector<double> x(12), y(12), ones(12, 1.0);
    for (size_t i = 0; i < 12; ++i) {
        x[i] = static_cast<double>(i);
        y[i] = 2.0 * x[i] + 1.0;
    }
    const auto fit = st::ols(y, {ones, x});
    CHECK(fit.coef[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.coef[1] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fit.rss == doctest::Approx(0.0).epsilon(1e-16));
    CHECK(fit.dof == 10);
}

TEST_CASE("ols matches the normal-equations oracle on small systems") {
    // k=2 plus intercept, n=8; oracle solves X'X b = X'y by Cramer-ish
    // elimination on the 3x3 system.
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const size_t n = 8;
        std::vector<double> ones(n, 1.0), x1(n), x2(n), y(n);
        for (size_t i = 0; i < n; ++i) {
            x1[i] = rng.normal();
            x2[i] = rng.normal();
            y[i] = 1.5 - 0.5 * x1[i] + 2.0 * x2[i] + 0.3 * rng.normal();
        }
        // Build and solve the 3x3 normal equations with Gaussian elimination.
        double a[3][4] = {};
        const std::vector<double>* cols[3] = {&ones, &x1, &x2};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c)
                for (size_t i = 0; i < n; ++i) a[r][c] += (*cols[r])[i] * (*cols[c])[i];
            for (size_t i = 0; i < n; ++i) a[r][3] += (*cols[r])[i] * y[i];
        }
        for (int p = 0; p < 3; ++p) {
            for (int r = p + 1; r < 3; ++r) {
                const double f = a[r][p] / a[p][p];
                for (int c = p; c < 4; ++c) a[r][c] -= f * a[p][c];
            }
        }
        double beta[3];
        for (int r = 2; r >= 0; --r) {
            beta[r] = a[r][3];
            for (int c = r + 1; c < 3; ++c) beta[r] -= a[r][c] * beta[c];
            beta[r] /= a[r][r];
        }
        const auto fit = st::ols(y, {ones, x1, x2});
        for (int c = 0; c < 3; ++c)
            CHECK(fit.coef[static_cast<size_t>(c)] == doctest::Approx(beta[c]).epsilon(1e-8));
    }
}

TEST_CASE("ols F statistic is consistent with the RSS decomposition") {
    Rng rng(5);
    const size_t n = 60;
    std::vector<double> ones(n, 1.0), x(n), y(n);
    for (size_t i = 0; i < n; ++i) {
        x[i] = rng.normal();
        y[i] = 0.4 * x[i] + rng.normal();
    }
    const auto fit = st::ols(y, {ones, x});
    double my = 0;
    for (double v : y) my += v;
    my /= static_cast<double>(n);
    double tss = 0;
    for (double v : y) tss += (v - my) * (v - my);
    const double f = ((tss - fit.rss) / 1.0) / (fit.rss / static_cast<double>(n - 2));
    CHECK(std::fabs(fit.f_vs_intercept - f) < 1e-9 * std::max(1.0, f));
    // single regressor: F == t^2
    CHECK(fit.f_vs_intercept ==
          doctest::Approx(fit.tstat[1] * fit.tstat[1]).epsilon(1e-9));
}

TEST_CASE("ols rejects rank-deficient and underdetermined designs") {
    std::vector<double> ones(5, 1.0), dup(5, 1.0), y{1, 2, 3, 4, 5};
    CHECK_THROWS_AS(st::ols(y, {ones, dup}), DataError);
    std::vector<double> tiny{1.0, 2.0};
    CHECK_THROWS_AS(st::ols(tiny, {{1.0, 0.0}, {0.0, 1.0}}), DataError);
}

namespace {

// Independent Fisher-exact oracle: cumulative log-factorial table built
// by summation (no lgamma), probabilities summed in plain double.
double fisher_oracle(int a, int b, int c, int d) {
    const int n = a + b + c + d;
    std::vector<double> lf(static_cast<size_t>(n) + 1, 0.0);
    for (int i = 2; i <= n; ++i) lf[static_cast<size_t>(i)] = lf[static_cast<size_t>(i - 1)] + std::log(i);
    const int r1 = a + b, r2 = c + d, c1 = a + c, c2 = b + d;
    auto lp = [&](int aa) {
        const int bb = r1 - aa, cc = c1 - aa, dd = r2 - cc;
        return lf[r1] + lf[r2] + lf[c1] + lf[c2] - lf[n] - lf[aa] - lf[bb] - lf[cc] - lf[dd];
    };
    const double lp_obs = lp(a);
    double p = 0.0;
    for (int aa = std::max(0, c1 - r2); aa <= std::min(r1, c1); ++aa)
        if (lp(aa) <= lp_obs + 1e-7) p += std::exp(lp(aa));
    return std::min(p, 1.0);
}

}  // namespace

TEST_CASE("fisher exact matches full enumeration for all tables up to n=40") {
    double worst = 0.0;
    for (int n = 1; n <= 40; ++n) {
        for (int a = 0; a <= n; ++a)
            for (int b = 0; a + b <= n; ++b)
                for (int c = 0; a + b + c <= n; ++c) {
                    const int d = n - a - b - c;
                    const double got = st::fisher_exact_2x2(a, b, c, d).p;
                    const double want = fisher_oracle(a, b, c, d);
                    worst = std::max(worst, std::fabs(got - want));
                }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("fisher exact fixtures") {
    CHECK(st::fisher_exact_2x2(1, 1, 1, 1).p == doctest::Approx(1.0));
    const auto fixture = st::fisher_exact_2x2(198, 57, 185, 418);
    CHECK(fixture.p < 1e-12);
    CHECK(fixture.log_p < -12.0 * std::log(10.0));
    CHECK_THROWS_AS(st::fisher_exact_2x2(0, 0, 0, 0), DataError);
    CHECK_THROWS_AS(st::fisher_exact_2x2(-1, 1, 1, 1), DataError);
}

TEST_CASE("fisher exact is invariant to simultaneous row and column swaps") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int a = static_cast<int>(rng.below(30)), b = static_cast<int>(rng.below(30));
        const int c = static_cast<int>(rng.below(30)), d = static_cast<int>(rng.below(30));
        if (a + b + c + d == 0) continue;
        const double p1 = st::fisher_exact_2x2(a, b, c, d).p;
        const double p2 = st::fisher_exact_2x2(d, c, b, a).p;  // both swaps
        CHECK(p1 == doctest::Approx(p2).epsilon(1e-12));
    }
}

TEST_CASE("ks statistic is minimal on model quantiles") {
    const size_t n = 100;
    std::vector<double> sample(n);
    for (size_t i = 0; i < n; ++i)
        sample[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double d = st::ks_statistic(sample, [](double x) { return x; });
    CHECK(d <= 0.5 / static_cast<double>(n) + 1e-12);
    CHECK_THROWS_AS(st::ks_statistic({1.0, 2.0}, [](double) { return 0.5; }), DataError);
}

TEST_CASE("powerlaw_fit recovers a planted exponent") {
    Rng rng(42);
    const double alpha = 1.9, xmin = 5.0;
    std::vector<double> xs(10000);
    for (auto& x : xs) {
        double u = rng.next_double();
        while (u <= 0.0) u = rng.next_double();
        x = xmin * std::pow(u, -1.0 / (alpha - 1.0));
    }
    const double fit = st::powerlaw_fit(xs, xmin);
    CHECK(std::fabs(fit - alpha) < 0.1);

    // MLE depends on values only through the mean log ratio: duplication
    // leaves it unchanged.
    std::vector<double> doubled = xs;
    doubled.insert(doubled.end(), xs.begin(), xs.end());
    CHECK(st::powerlaw_fit(doubled, xmin) == doctest::Approx(fit).epsilon(1e-12));

    CHECK_THROWS_AS(st::powerlaw_fit(std::vector<double>(60, 5.0), 5.0), DataError);
    CHECK_THROWS_AS(st::powerlaw_fit(std::vector<double>(10, 7.0), 5.0), DataError);
}

TEST_CASE("permute preserves the multiset and is seed-deterministic") {
    const auto x = gaussian(40, 8);
    const auto p1 = st::permuted(x, 123);
    const auto p2 = st::permuted(x, 123);
    CHECK(p1 == p2);
    auto sorted_x = x;
    auto sorted_p = p1;
    std::sort(sorted_x.begin(), sorted_x.end());
    std::sort(sorted_p.begin(), sorted_p.end());
    CHECK(sorted_x == sorted_p);
    CHECK(st::permuted(x, 124) != p1);
}

TEST_CASE("permutation positions are uniform") {
    // 5 values, 10k replicates: each (position, value) cell expects 2000.
    const std::vector<double> x{0, 1, 2, 3, 4};
    std::map<std::pair<int, int>, int> cells;
    const PermutationPlan plan{77, 10000};
    for (size_t r = 0; r < plan.replicates; ++r) {
        const auto p = st::permuted(x, plan.replicate_seed(r));
        for (int pos = 0; pos < 5; ++pos)
            ++cells[{pos, static_cast<int>(p[static_cast<size_t>(pos)])}];
    }
    double chi2 = 0.0;
    for (int pos = 0; pos < 5; ++pos)
        for (int val = 0; val < 5; ++val) {
            const double obs = cells[{pos, val}];
            chi2 += (obs - 2000.0) * (obs - 2000.0) / 2000.0;
        }
    // 16 dof; 52.0 is far beyond the 1e-5 tail.
    CHECK(chi2 < 52.0);
}

TEST_CASE("mackinnon p matches the shipped critical values") {
    CHECK(st::mackinnon_p(st::kAdfCriticalValues[1]) == doctest::Approx(0.05).epsilon(0.10));
    CHECK(st::mackinnon_p(st::kAdfCriticalValues[0]) == doctest::Approx(0.01).epsilon(0.15));
    CHECK(st::mackinnon_p(st::kAdfCriticalValues[2]) == doctest::Approx(0.10).epsilon(0.10));
    CHECK(st::mackinnon_p(-30.0) < 1e-250);
    CHECK(st::mackinnon_p(5.0) == doctest::Approx(1.0));
}

TEST_CASE("adf rejects white noise and keeps random walks") {
    size_t reject = 0, keep = 0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        const auto noise = gaussian(500, 1000 + static_cast<uint64_t>(s));
        if (st::adf_test(noise, 1).p < 0.01) ++reject;
        std::vector<double> walk(500, 0.0);
        Rng rng(2000 + static_cast<uint64_t>(s));
        for (size_t t = 1; t < walk.size(); ++t) walk[t] = walk[t - 1] + rng.normal();
        if (st::adf_test(walk, 1).p > 0.10) ++keep;
    }
    CHECK(reject >= 45);
    CHECK(keep >= 40);
    CHECK_THROWS_AS(st::adf_test(std::vector<double>(100, 2.0), 1), DataError);
}

TEST_CASE("adf AIC lag selection stays in range") {
    const auto noise = gaussian(300, 9);
    const auto res = st::adf_test(noise, -1);
    CHECK(res.order >= 0);
    CHECK(res.order <= 12);
    CHECK(res.p < 0.05);
}

TEST_CASE("pp rejects white noise and keeps random walks") {
    size_t reject = 0, keep = 0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        const auto noise = gaussian(500, 3000 + static_cast<uint64_t>(s));
        if (st::pp_test(noise).p < 0.01) ++reject;
        std::vector<double> walk(500, 0.0);
        Rng rng(4000 + static_cast<uint64_t>(s));
        for (size_t t = 1; t < walk.size(); ++t) walk[t] = walk[t - 1] + rng.normal();
        if (st::pp_test(walk).p > 0.10) ++keep;
    }
    CHECK(reject >= 45);
    CHECK(keep >= 40);
    CHECK_THROWS_AS(st::pp_test(std::vector<double>(100, 2.0)), DataError);
}

TEST_CASE("pp default bandwidth follows the floor rule") {
    const auto noise = gaussian(500, 10);
    const auto res = st::pp_test(noise);
    // floor(4 * (499/100)^(2/9)) = floor(4 * 1.429) = 5
    CHECK(res.order == 5);
}

TEST_CASE("ar1 of differenced white noise is about -1/2") {
    const auto noise = gaussian(2001, 21);
    const auto diff = st::first_differences(noise);
    CHECK(std::fabs(st::ar1_coefficient(diff) + 0.5) < 0.05);

    std::vector<double> ramp(100);
    for (size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
    CHECK(st::ar1_coefficient(ramp) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rng streams are reproducible and order-independent") {
    const PermutationPlan plan{9001, 4};
    std::vector<uint64_t> forward, backward;
    for (size_t i = 0; i < 4; ++i) forward.push_back(Rng(plan.replicate_seed(i)).next_u64());
    for (size_t i = 4; i-- > 0;) backward.push_back(Rng(plan.replicate_seed(i)).next_u64());
    for (size_t i = 0; i < 4; ++i) CHECK(forward[i] == backward[3 - i]);
    CHECK(hash_seed(1, "word") == hash_seed(1, "word"));
    CHECK(hash_seed(1, "word") != hash_seed(2, "word"));
    CHECK(hash_seed(1, "word") != hash_seed(1, "wore"));
}

TEST_CASE("poisson moments are sane") {
    Rng rng(31);
    for (double lambda : {0.5, 7.0, 45.0, 200.0}) {
        double sum = 0.0, sumsq = 0.0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            const double v = static_cast<double>(rng.poisson(lambda));
            sum += v;
            sumsq += v * v;
        }
        const double mean = sum / n;
        const double var = sumsq / n - mean * mean;
        CHECK(std::fabs(mean - lambda) < 0.05 * lambda + 0.1);
        CHECK(std::fabs(var - lambda) < 0.12 * lambda + 0.3);
    }
}

TEST_CASE("ks p-value: calibrated on the model, small when shifted") {
    auto cdf = [](double x) { return st::norm_cdf(x); };
    size_t rejects = 0;
    const int seeds = 300;
    for (int s = 0; s < seeds; ++s) {
        const auto sample = gaussian(1000, 40000 + static_cast<uint64_t>(s));
        const double d = st::ks_statistic(sample, cdf);
        if (st::ks_pvalue(d, 1000) < 0.05) ++rejects;
    }
    // ~5% expected; allow a wide band.
    CHECK(rejects >= 5);
    CHECK(rejects <= 30);

    auto shifted = gaussian(1000, 99);
    for (auto& v : shifted) v += 0.25;
    const double d = st::ks_statistic(shifted, cdf);
    CHECK(st::ks_pvalue(d, 1000) < 0.01);
}

#include "bundlescope/textio.hpp"

TEST_CASE("round-trip formatting handles infinities and precision") {
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(parse_double_field("inf", "x") == std::numeric_limits<double>::infinity());
    CHECK(parse_double_field("-inf", "x") == -std::numeric_limits<double>::infinity());
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -0.0}) {
        CHECK(parse_double_field(format_double(v), "x") == v);
    }
    CHECK_THROWS_AS(parse_double_field("1.2.3", "x"), DataError);
    CHECK_THROWS_AS(parse_int_field("12x", "x"), DataError);
}
