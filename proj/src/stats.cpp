#include "bundlescope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bundlescope/errors.hpp"

namespace bundlescope::stats {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kMinP = 1e-300;
}  // namespace

// ---------------------------------------------------------------- moments

double mean(std::span<const double> x) {
    if (x.empty()) throw DataError("mean of empty series");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double pop_std(std::span<const double> x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size()));
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DataError("pearson: length mismatch");
    if (x.size() < 3) throw DataError("pearson: need at least 3 points");
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DataError("pearson: zero variance");
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

std::vector<double> first_differences(std::span<const double> x) {
    if (x.size() < 2) throw DataError("first_differences: need length >= 2");
    std::vector<double> d(x.size() - 1);
    for (size_t i = 0; i + 1 < x.size(); ++i) d[i] = x[i + 1] - x[i];
    return d;
}

std::vector<double> zscore(std::span<const double> x) {
    const double m = mean(x);
    const double s = pop_std(x);
    if (s == 0.0) throw DataError("zscore: zero standard deviation");
    std::vector<double> z(x.size());
    for (size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - m) / s;
    return z;
}

// ----------------------------------------------------- distribution tails

double norm_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730951); }

double norm_ppf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DataError("norm_ppf: p must be in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= phigh) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Halley step against the exact CDF.
    const double e = norm_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * kPi) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

namespace {

double beta_cont_frac(double a, double b, double x) {
    constexpr double kFpMin = 1e-300;
    constexpr double kEps = 3e-16;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(lbt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cont_frac(a, b, x) / a;
    return 1.0 - bt * beta_cont_frac(b, a, 1.0 - x) / b;
}

double t_pvalue_two_sided(double t, double dof) {
    if (dof <= 0.0) throw DataError("t_pvalue: dof must be positive");
    if (!std::isfinite(t)) return 0.0;
    const double p = incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
    return std::clamp(p, 0.0, 1.0);
}

double f_pvalue(double f, double d1, double d2) {
    if (d1 <= 0.0 || d2 <= 0.0) throw DataError("f_pvalue: dof must be positive");
    if (f <= 0.0) return 1.0;
    if (!std::isfinite(f)) return 0.0;
    const double p = incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
    return std::clamp(p, 0.0, 1.0);
}

// --------------------------------------------------------------- Fisher z

Interval fisher_ci(double r, size_t n, double level) {
    if (std::fabs(r) >= 1.0) throw DataError("fisher_ci: |r| must be < 1");
    if (n < 4) throw DataError("fisher_ci: need n >= 4");
    if (!(level > 0.0 && level < 1.0)) throw DataError("fisher_ci: level must be in (0,1)");
    const double z = std::atanh(r);
    const double half = norm_ppf(0.5 + level / 2.0) / std::sqrt(static_cast<double>(n - 3));
    return Interval{std::tanh(z - half), std::tanh(z + half)};
}

// -------------------------------------------------------------------- OLS

OlsFit ols(std::span<const double> y, const std::vector<std::vector<double>>& columns) {
    const size_t n = y.size();
    const size_t k = columns.size();
    if (k == 0) throw DataError("ols: no regressors");
    if (n <= k) throw DataError("ols: need more rows than regressors");
    for (const auto& col : columns)
        if (col.size() != n) throw DataError("ols: column length mismatch");

    // Householder QR on [X | y]; column-major working copy.
    std::vector<std::vector<double>> a(k + 1);
    for (size_t j = 0; j < k; ++j) a[j] = columns[j];
    a[k].assign(y.begin(), y.end());

    std::vector<double> rdiag(k, 0.0);
    double max_norm = 0.0;
    for (size_t j = 0; j < k; ++j) {
        double nrm = 0.0;
        for (size_t i = j; i < n; ++i) nrm += a[j][i] * a[j][i];
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) throw DataError("ols: rank-deficient design (zero column)");
        if (a[j][j] < 0.0) nrm = -nrm;
        for (size_t i = j; i < n; ++i) a[j][i] /= nrm;
        a[j][j] += 1.0;
        for (size_t jj = j + 1; jj <= k; ++jj) {
            double s = 0.0;
            for (size_t i = j; i < n; ++i) s += a[j][i] * a[jj][i];
            s = -s / a[j][j];
            for (size_t i = j; i < n; ++i) a[jj][i] += s * a[j][i];
        }
        rdiag[j] = -nrm;
        max_norm = std::max(max_norm, std::fabs(nrm));
    }
    const double tol = 1e-11 * static_cast<double>(n) * std::max(max_norm, 1.0);
    for (size_t j = 0; j < k; ++j)
        if (std::fabs(rdiag[j]) < tol) throw DataError("ols: rank-deficient design");

    // R is stored in the strict upper part of a[jj][j] (j<jj<k) plus rdiag;
    // Q'y occupies a[k][0..k-1], residual part a[k][k..n-1].
    auto r_at = [&](size_t i, size_t j) -> double {  // i <= j < k
        return i == j ? rdiag[i] : a[j][i];
    };

    OlsFit fit;
    fit.n = n;
    fit.k = k;
    fit.dof = n - k;
    fit.coef.assign(k, 0.0);
    for (size_t ii = k; ii-- > 0;) {
        double s = a[k][ii];
        for (size_t j = ii + 1; j < k; ++j) s -= r_at(ii, j) * fit.coef[j];
        fit.coef[ii] = s / r_at(ii, ii);
    }

    double rss = 0.0;
    for (size_t i = k; i < n; ++i) rss += a[k][i] * a[k][i];
    fit.rss = rss;
    const double sigma2 = rss / static_cast<double>(fit.dof);

    // (X'X)^-1 diagonal from R^-1 row norms.
    std::vector<std::vector<double>> rinv(k, std::vector<double>(k, 0.0));
    for (size_t j = 0; j < k; ++j) {
        rinv[j][j] = 1.0 / r_at(j, j);
        for (size_t i = j; i-- > 0;) {
            double s = 0.0;
            for (size_t l = i + 1; l <= j; ++l) s += r_at(i, l) * rinv[l][j];
            rinv[i][j] = -s / r_at(i, i);
        }
    }
    fit.se.assign(k, 0.0);
    fit.tstat.assign(k, 0.0);
    for (size_t i = 0; i < k; ++i) {
        double q = 0.0;
        for (size_t j = i; j < k; ++j) q += rinv[i][j] * rinv[i][j];
        fit.se[i] = std::sqrt(sigma2 * q);
        fit.tstat[i] = fit.se[i] > 0.0 ? fit.coef[i] / fit.se[i]
                                       : std::numeric_limits<double>::infinity();
    }

    if (k >= 2) {
        const double my = mean(y);
        double tss = 0.0;
        for (double v : y) tss += (v - my) * (v - my);
        const double num = (tss - rss) / static_cast<double>(k - 1);
        const double den = rss / static_cast<double>(fit.dof);
        fit.f_vs_intercept = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
        fit.f_pvalue = den > 0.0 ? f_pvalue(fit.f_vs_intercept, static_cast<double>(k - 1),
                                            static_cast<double>(fit.dof))
                                 : 0.0;
    }
    return fit;
}

// -------------------------------------------------------- exact 2x2 test

FisherExactResult fisher_exact_2x2(int64_t a, int64_t b, int64_t c, int64_t d) {
    if (a < 0 || b < 0 || c < 0 || d < 0)
        throw DataError("fisher_exact_2x2: negative cell count");
    const int64_t n = a + b + c + d;
    if (n < 1) throw DataError("fisher_exact_2x2: empty table");
    const int64_t r1 = a + b, c1 = a + c;

    auto lchoose = [](int64_t nn, int64_t kk) {
        return std::lgamma(static_cast<double>(nn + 1)) -
               std::lgamma(static_cast<double>(kk + 1)) -
               std::lgamma(static_cast<double>(nn - kk + 1));
    };
    const double denom = lchoose(n, c1);
    auto log_prob = [&](int64_t aa) {
        return lchoose(r1, aa) + lchoose(n - r1, c1 - aa) - denom;
    };

    const int64_t lo = std::max<int64_t>(0, c1 - (n - r1));
    const int64_t hi = std::min(r1, c1);
    const double lp_obs = log_prob(a);

    // Probability-mass ordering: accumulate tables no more probable than
    // the observed one; log-sum-exp keeps p exact below 1e-300.
    double max_lp = -std::numeric_limits<double>::infinity();
    std::vector<double> kept;
    kept.reserve(static_cast<size_t>(hi - lo + 1));
    const double slack = 1e-7;  // guards ties against lgamma roundoff
    for (int64_t aa = lo; aa <= hi; ++aa) {
        const double lp = log_prob(aa);
        if (lp <= lp_obs + slack) {
            kept.push_back(lp);
            max_lp = std::max(max_lp, lp);
        }
    }
    double s = 0.0;
    for (double lp : kept) s += std::exp(lp - max_lp);
    const double log_p = std::min(max_lp + std::log(s), 0.0);

    FisherExactResult res;
    res.log_p = log_p;
    res.p = std::clamp(std::exp(log_p), kMinP, 1.0);
    return res;
}

// ------------------------------------------------------------------- K-S

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.size() < 10) throw DataError("ks_statistic: need at least 10 points");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, f - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
    }
    return d;
}

double ks_pvalue(double d, size_t n) {
    if (d <= 0.0) return 1.0;
    if (d >= 1.0) return kMinP;
    const double x = (std::sqrt(static_cast<double>(n)) + 0.12 +
                      0.11 / std::sqrt(static_cast<double>(n))) * d;
    // Kolmogorov tail series with the Stephens small-sample correction.
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, kMinP, 1.0);
}

// ------------------------------------------------------------- power law

double powerlaw_fit(std::span<const double> values, double xmin) {
    if (xmin <= 0.0) throw DataError("powerlaw_fit: xmin must be positive");
    double log_sum = 0.0;
    size_t n = 0;
    for (double v : values) {
        if (v >= xmin) {
            log_sum += std::log(v / xmin);
            ++n;
        }
    }
    if (n < 50) throw DataError("powerlaw_fit: need >= 50 values >= xmin, got " +
                                std::to_string(n));
    if (log_sum <= 0.0) throw DataError("powerlaw_fit: degenerate sample (all values at xmin)");
    return 1.0 + static_cast<double>(n) / log_sum;
}

// --------------------------------------------------------------- permute

std::vector<double> permuted(std::span<const double> x, uint64_t seed) {
    std::vector<double> out(x.begin(), x.end());
    Rng rng(seed);
    rng.shuffle_doubles(out);
    return out;
}

// ------------------------------------------------------------ unit roots

const double kAdfCriticalValues[3] = {-3.43035, -2.86154, -2.56677};

double mackinnon_p(double tau) {
    // MacKinnon (1994) response surface, constant, no trend.
    constexpr double tau_star = -1.61, tau_min = -18.83, tau_max = 2.74;
    if (tau >= tau_max) return 1.0;
    if (tau <= tau_min) return kMinP;
    double z;
    if (tau <= tau_star) {
        z = 2.1659 + tau * (1.4412 + tau * 0.038269);
    } else {
        z = 1.7339 + tau * (0.93202 + tau * (-0.12980 + tau * -0.010186));
    }
    return std::clamp(norm_cdf(z), kMinP, 1.0);
}

namespace {

struct AdfRegression {
    OlsFit fit;
    size_t rows = 0;
};

// dy_t = a + g*y_{t-1} + sum phi_i dy_{t-i}; rows start after `drop` diffs.
AdfRegression adf_regression(std::span<const double> y, int lags, int drop) {
    const size_t n = y.size();
    std::vector<double> dy(n - 1);
    for (size_t t = 1; t < n; ++t) dy[t - 1] = y[t] - y[t - 1];
    const size_t start = static_cast<size_t>(drop);
    if (dy.size() <= start + static_cast<size_t>(lags) + 3)
        throw DataError("adf_test: series too short for requested lag order");
    const size_t m = dy.size() - start;

    std::vector<double> lhs(m);
    std::vector<std::vector<double>> cols(2 + static_cast<size_t>(lags),
                                          std::vector<double>(m));
    for (size_t i = 0; i < m; ++i) {
        const size_t t = start + i;  // index into dy; observed level index t+1
        lhs[i] = dy[t];
        cols[0][i] = 1.0;
        cols[1][i] = y[t];
        for (int l = 1; l <= lags; ++l) cols[1 + static_cast<size_t>(l)][i] = dy[t - l];
    }
    AdfRegression out;
    out.fit = ols(lhs, cols);
    out.rows = m;
    return out;
}

}  // namespace

UnitRootResult adf_test(std::span<const double> y, int lags) {
    if (y.size() < 10) throw DataError("adf_test: series too short");
    if (pop_std(y) == 0.0) throw DataError("adf_test: zero-variance series");
    int order = lags;
    if (lags < 0) {
        // AIC over a common sample so likelihoods are comparable.
        const int max_lag = std::min<int>(12, static_cast<int>(y.size()) / 5);
        double best_aic = std::numeric_limits<double>::infinity();
        order = 0;
        for (int l = 0; l <= max_lag; ++l) {
            AdfRegression reg = adf_regression(y, l, max_lag);
            const double m = static_cast<double>(reg.rows);
            const double aic = m * std::log(reg.fit.rss / m) +
                               2.0 * static_cast<double>(reg.fit.k);
            if (aic < best_aic - 1e-12) {
                best_aic = aic;
                order = l;
            }
        }
    }
    AdfRegression reg = adf_regression(y, order, order);
    UnitRootResult res;
    res.stat = reg.fit.tstat[1];
    res.p = mackinnon_p(res.stat);
    res.order = order;
    return res;
}

double newey_west_lrv(std::span<const double> u, int bandwidth) {
    if (u.empty()) throw DataError("newey_west_lrv: empty residuals");
    const double n = static_cast<double>(u.size());
    double g0 = 0.0;
    for (double v : u) g0 += v * v;
    g0 /= n;
    double lrv = g0;
    for (int j = 1; j <= bandwidth && static_cast<size_t>(j) < u.size(); ++j) {
        double gj = 0.0;
        for (size_t t = static_cast<size_t>(j); t < u.size(); ++t) gj += u[t] * u[t - j];
        gj /= n;
        const double w = 1.0 - static_cast<double>(j) / (bandwidth + 1.0);
        lrv += 2.0 * w * gj;
    }
    return lrv;
}

UnitRootResult pp_test(std::span<const double> y, int bandwidth) {
    if (y.size() < 10) throw DataError("pp_test: series too short");
    if (pop_std(y) == 0.0) throw DataError("pp_test: zero-variance series");
    AdfRegression reg = adf_regression(y, 0, 0);
    const double m = static_cast<double>(reg.rows);
    int bw = bandwidth;
    if (bw < 0) bw = static_cast<int>(std::floor(4.0 * std::pow(m / 100.0, 2.0 / 9.0)));

    const double tau = reg.fit.tstat[1];
    const double se_g = reg.fit.se[1];
    const double s2 = reg.fit.rss / static_cast<double>(reg.fit.dof);
    const double gamma0 = reg.fit.rss / m;

    // Residuals of the level regression (= dy - fitted).
    std::vector<double> resid(reg.rows);
    {
        const size_t n = y.size();
        for (size_t t = 1; t < n; ++t) {
            const double fitted = reg.fit.coef[0] + reg.fit.coef[1] * y[t - 1];
            resid[t - 1] = (y[t] - y[t - 1]) - fitted;
        }
    }
    const double lam2 = newey_west_lrv(resid, bw);
    const double lam = std::sqrt(lam2);

    // Hamilton eq. 17.6.12 (case with constant):
    //   Z_tau = sqrt(g0/l2)*tau - (l2 - g0) * T * se(g) / (2 * l * s).
    const double z_tau = std::sqrt(gamma0 / lam2) * tau -
                         (lam2 - gamma0) * m * se_g / (2.0 * lam * std::sqrt(s2));
    UnitRootResult res;
    res.stat = z_tau;
    res.p = mackinnon_p(z_tau);
    res.order = bw;
    return res;
}

double ar1_coefficient(std::span<const double> x) {
    if (x.size() < 3) throw DataError("ar1_coefficient: series too short");
    const size_t m = x.size() - 1;
    std::vector<double> lhs(m), lag(m), ones(m, 1.0);
    for (size_t t = 1; t < x.size(); ++t) {
        lhs[t - 1] = x[t];
        lag[t - 1] = x[t - 1];
    }
    OlsFit fit = ols(lhs, {ones, lag});
    return fit.coef[1];
}

}  // namespace bundlescope::stats
