#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bundlescope/rng.hpp"

namespace bundlescope::stats {

// ---------------------------------------------------------------- moments

double mean(std::span<const double> x);

// Population standard deviation (divide by n). Moment definitions are
// used consistently; the convention cancels in every ratio/z downstream.
double pop_std(std::span<const double> x);

double pearson(std::span<const double> x, std::span<const double> y);

std::vector<double> first_differences(std::span<const double> x);

// z-scored copy using full-sample mean and population std.
std::vector<double> zscore(std::span<const double> x);

// ----------------------------------------------------- distribution tails

double norm_cdf(double x);
// Inverse standard normal CDF (Acklam's rational approximation + one
// Halley refinement step; |error| < 1e-12 over (0,1)).
double norm_ppf(double p);

// Regularized incomplete beta I_x(a, b) via continued fraction.
double incomplete_beta(double a, double b, double x);

double t_pvalue_two_sided(double t, double dof);
double f_pvalue(double f, double d1, double d2);

// --------------------------------------------------------------- Fisher z

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// tanh(atanh(r) +- z/sqrt(n-3)). Requires |r| < 1, n >= 4.
Interval fisher_ci(double r, size_t n, double level = 0.95);

// -------------------------------------------------------------------- OLS

struct OlsFit {
    std::vector<double> coef;
    std::vector<double> se;
    std::vector<double> tstat;
    double rss = 0.0;
    size_t n = 0;
    size_t k = 0;
    size_t dof = 0;          // n - k
    double f_vs_intercept = 0.0;  // only meaningful when column 0 is the intercept
    double f_pvalue = 1.0;
};

// Least squares of y on the given columns via Householder QR.
// Throws DataError on rank deficiency or n <= k.
OlsFit ols(std::span<const double> y, const std::vector<std::vector<double>>& columns);

// -------------------------------------------------------- exact 2x2 test

struct FisherExactResult {
    double p = 1.0;      // clamped at 1e-300 for formatting
    double log_p = 0.0;  // natural log, exact in log-space
};

// Two-sided Fisher exact test: sum of hypergeometric probabilities of all
// tables (fixed margins) no more probable than the observed one.
FisherExactResult fisher_exact_2x2(int64_t a, int64_t b, int64_t c, int64_t d);

// ------------------------------------------------------------------- K-S

// Sup distance between the sample's empirical CDF and a model CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

// Asymptotic Kolmogorov p-value for a FIXED (not fitted) model CDF.
// Fitted models need a parametric bootstrap instead (see the Zipf
// diagnostic).
double ks_pvalue(double d, size_t n);

// ------------------------------------------------------------- power law

// Continuous-approximation MLE: alpha = 1 + n / sum ln(x_i / xmin),
// over the values >= xmin. Requires >= 50 such values.
double powerlaw_fit(std::span<const double> values, double xmin);

// --------------------------------------------------------------- permute

std::vector<double> permuted(std::span<const double> x, uint64_t seed);

// ------------------------------------------------------------ unit roots

struct UnitRootResult {
    double stat = 0.0;
    double p = 1.0;
    int order = 0;  // lag count (ADF) or bandwidth (PP)
};

// MacKinnon (1994) response-surface p of a unit-root tau statistic,
// constant-only regression. Clamped to [1e-300, 1].
double mackinnon_p(double tau);

// Asymptotic critical values (constant, no trend) shipped as a fallback
// reference; index 0/1/2 = 1%/5%/10%.
extern const double kAdfCriticalValues[3];

// Augmented Dickey-Fuller, constant, no trend:
//   dy_t = a + g*y_{t-1} + sum_{i<=lags} phi_i dy_{t-i} + e.
// lags < 0 selects the AIC-best order in [0, 12].
UnitRootResult adf_test(std::span<const double> y, int lags = 1);

// Phillips-Perron Z_tau, constant, no trend; Bartlett-kernel long-run
// variance; bandwidth < 0 uses floor(4*(n/100)^(2/9)).
UnitRootResult pp_test(std::span<const double> y, int bandwidth = -1);

// Bartlett-weighted long-run variance of (mean-zero) u.
double newey_west_lrv(std::span<const double> u, int bandwidth);

// OLS slope of x(t) on x(t-1) with intercept.
double ar1_coefficient(std::span<const double> x);

}  // namespace bundlescope::stats
