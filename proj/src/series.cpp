#include "bundlescope/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "bundlescope/errors.hpp"
#include "bundlescope/textio.hpp"

namespace bundlescope::series {

void AlignedSeries::check_invariants() const {
    if (dates.size() != values.size()) throw InternalError("series: size mismatch");
    for (size_t i = 1; i < dates.size(); ++i)
        if (!(dates[i - 1] < dates[i])) throw InternalError("series: dates not increasing");
    for (double v : values)
        if (!std::isfinite(v)) throw InternalError("series: non-finite value");
}

std::vector<AlignedSeries> align(const std::vector<AlignedSeries>& inputs,
                                 std::vector<size_t>* dropped) {
    if (inputs.empty()) return {};
    std::set<int32_t> shared;
    for (Date d : inputs[0].dates) shared.insert(d.days);
    for (size_t k = 1; k < inputs.size(); ++k) {
        std::set<int32_t> next;
        for (Date d : inputs[k].dates)
            if (shared.count(d.days)) next.insert(d.days);
        shared.swap(next);
    }
    if (shared.empty()) throw DataError("align: series share no dates");
    if (dropped) {
        dropped->clear();
        for (const auto& s : inputs) dropped->push_back(s.size() - shared.size());
    }
    std::vector<AlignedSeries> out;
    out.reserve(inputs.size());
    for (const auto& s : inputs) {
        AlignedSeries a;
        a.name = s.name;
        a.dates.reserve(shared.size());
        a.values.reserve(shared.size());
        for (size_t i = 0; i < s.size(); ++i) {
            if (shared.count(s.dates[i].days)) {
                a.dates.push_back(s.dates[i]);
                a.values.push_back(s.values[i]);
            }
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<AlignedSeries> bundle_relative_frequency(
    const corpus::DailyFrequencyMatrix& extracted, const bundling::CorrelationNetwork& net,
    const bundling::BundlePartition& partition, size_t* zero_denominator_days) {
    // Column index of every network node in the extracted matrix.
    std::map<std::string, size_t> col;
    for (size_t w = 0; w < extracted.n_words(); ++w) col[extracted.vocabulary[w]] = w;
    std::vector<size_t> node_col(net.size());
    for (size_t i = 0; i < net.size(); ++i) {
        auto it = col.find(net.nodes[i]);
        if (it == col.end())
            throw DataError("bundle_relative_frequency: node '" + net.nodes[i] +
                            "' missing from matrix");
        node_col[i] = it->second;
    }
    const int nb = partition.n_bundles();
    if (nb < 1) throw DataError("bundle_relative_frequency: empty partition");

    std::vector<AlignedSeries> out(static_cast<size_t>(nb));
    for (int b = 0; b < nb; ++b) out[static_cast<size_t>(b)].name = "gamma_" + std::to_string(b + 1);

    size_t zero_days = 0;
    for (size_t t = 0; t < extracted.n_dates(); ++t) {
        if (extracted.totals[t] == 0) continue;  // inactive day, excluded upstream
        double denom = 0.0;
        std::vector<double> bundle_sum(static_cast<size_t>(nb), 0.0);
        for (size_t i = 0; i < net.size(); ++i) {
            const double f = extracted.counts[t][node_col[i]];
            denom += f;
            bundle_sum[static_cast<size_t>(partition.assignment[i])] += f;
        }
        if (denom <= 0.0) {
            ++zero_days;
            continue;
        }
        for (int b = 0; b < nb; ++b) {
            out[static_cast<size_t>(b)].dates.push_back(extracted.dates[t]);
            out[static_cast<size_t>(b)].values.push_back(bundle_sum[static_cast<size_t>(b)] / denom);
        }
    }
    if (zero_denominator_days) *zero_denominator_days = zero_days;
    if (!out.empty() && out[0].dates.empty())
        throw DataError("bundle_relative_frequency: no date has extracted-word volume");
    return out;
}

AlignedSeries first_difference(const AlignedSeries& s) {
    if (s.size() < 2) throw DataError("first_difference: need length >= 2");
    AlignedSeries d;
    d.name = "theta_" + s.name;
    d.dates.assign(s.dates.begin() + 1, s.dates.end());
    d.values = stats::first_differences(s.values);
    return d;
}

stats::UnitRootResult adf_test(const AlignedSeries& s, int lags) {
    const int effective = lags < 0 ? 12 : lags;
    if (s.size() < static_cast<size_t>(25 + effective))
        throw DataError("adf_test: need length >= 25 + lags");
    return stats::adf_test(s.values, lags);
}

stats::UnitRootResult pp_test(const AlignedSeries& s, int bandwidth) {
    if (s.size() < 25) throw DataError("pp_test: need length >= 25");
    return stats::pp_test(s.values, bandwidth);
}

double ar1_coefficient(const AlignedSeries& s) {
    if (s.size() < 10) throw DataError("ar1_coefficient: need length >= 10");
    return stats::ar1_coefficient(s.values);
}

CcfResult cross_correlation(const AlignedSeries& x, const AlignedSeries& y, int max_lag,
                            size_t n_null, uint64_t seed) {
    if (x.size() != y.size() || x.size() == 0)
        throw DataError("cross_correlation: series must be aligned first");
    for (size_t i = 0; i < x.size(); ++i)
        if (x.dates[i] != y.dates[i])
            throw DataError("cross_correlation: date mismatch; align inputs");
    const size_t n = x.size();
    if (max_lag < 0) throw DataError("cross_correlation: max_lag must be >= 0");
    if (n < static_cast<size_t>(max_lag) + 30)
        throw DataError("cross_correlation: need length - max_lag >= 30");

    CcfResult res;
    for (int dt = -max_lag; dt <= max_lag; ++dt) {
        // Overlap of x(t) with y(t+dt).
        const size_t off = static_cast<size_t>(std::abs(dt));
        const size_t len = n - off;
        std::vector<double> xs(len), ys(len);
        for (size_t t = 0; t < len; ++t) {
            const size_t xi = dt >= 0 ? t : t + off;
            xs[t] = x.values[xi];
            ys[t] = y.values[xi + static_cast<size_t>(dt)];
        }
        const double rho = stats::pearson(xs, ys);
        const auto ci = stats::fisher_ci(std::clamp(rho, -0.999999, 0.999999), len);
        res.lags.push_back(dt);
        res.rho.push_back(rho);
        res.ci_low.push_back(ci.lo);
        res.ci_high.push_back(ci.hi);
    }

    // Null: i.i.d. permutation pairs at full overlap; 95% band on |corr|.
    if (n_null < 100) n_null = 100;
    std::vector<double> abs_r(n_null);
    const PermutationPlan plan{seed, n_null};
    for (size_t k = 0; k < n_null; ++k) {
        const uint64_t rs = plan.replicate_seed(k);
        std::vector<double> xp = stats::permuted(x.values, derive_seed(rs, 0));
        std::vector<double> yp = stats::permuted(y.values, derive_seed(rs, 1));
        abs_r[k] = std::fabs(stats::pearson(xp, yp));
    }
    std::sort(abs_r.begin(), abs_r.end());
    const size_t q = static_cast<size_t>(std::ceil(0.95 * static_cast<double>(n_null))) - 1;
    res.null_band = std::max(abs_r[std::min(q, n_null - 1)], 1e-12);
    return res;
}

GrangerResult granger_test(const AlignedSeries& target, const AlignedSeries& predictor) {
    if (target.size() != predictor.size())
        throw DataError("granger_test: series must be aligned first");
    const size_t n_pairs = target.size() >= 1 ? target.size() - 1 : 0;
    if (n_pairs < 30) throw DataError("granger_test: need at least 30 usable rows");

    std::vector<double> lhs(n_pairs), lag_t(n_pairs), lag_p(n_pairs), ones(n_pairs, 1.0);
    for (size_t t = 0; t + 1 < target.size(); ++t) {
        lhs[t] = target.values[t + 1];
        lag_t[t] = target.values[t];
        lag_p[t] = predictor.values[t];
    }
    GrangerResult res;
    res.n = n_pairs;
    if (stats::pop_std(lag_p) == 0.0) {
        res.f = 0.0;
        res.p = 1.0;
        return res;
    }
    const stats::OlsFit restricted = stats::ols(lhs, {ones, lag_t});
    const stats::OlsFit unrestricted = stats::ols(lhs, {ones, lag_t, lag_p});
    const double dof = static_cast<double>(unrestricted.dof);
    if (unrestricted.rss <= 0.0) {
        res.f = std::numeric_limits<double>::infinity();
        res.p = 0.0;
        return res;
    }
    res.f = (restricted.rss - unrestricted.rss) / (unrestricted.rss / dof);
    if (res.f < 0.0) res.f = 0.0;
    res.p = stats::f_pvalue(res.f, 1.0, dof);
    return res;
}

ContingencyResult dominance_table(const AlignedSeries& gamma1, const AlignedSeries& gamma2,
                                  const AlignedSeries& index, DominanceSeries* detail) {
    if (gamma1.size() != gamma2.size() || gamma1.size() != index.size())
        throw DataError("dominance_table: series must be aligned first");
    const size_t n = gamma1.size();
    if (n < 4) throw DataError("dominance_table: too few days");

    std::vector<double> c(n);
    for (size_t t = 0; t < n; ++t) c[t] = gamma1.values[t] - gamma2.values[t];
    const std::vector<double> z_c = stats::zscore(c);          // throws on zero std
    const std::vector<double> z_v = stats::zscore(index.values);

    int64_t a = 0, b = 0, cc = 0, d = 0;
    if (detail) {
        detail->dates = gamma1.dates;
        detail->z_c = z_c;
        detail->z_index = z_v;
        detail->delta_c.resize(n);
        detail->delta_index.resize(n);
    }
    for (size_t t = 0; t < n; ++t) {
        const int dc = z_c[t] > 0.0 ? 1 : 0;   // exact zero counts as 0
        const int dv = z_v[t] > 0.0 ? 1 : 0;
        if (detail) {
            detail->delta_c[t] = dc;
            detail->delta_index[t] = dv;
        }
        if (dc && dv) ++a;
        else if (!dc && dv) ++b;
        else if (dc && !dv) ++cc;
        else ++d;
    }
    const auto fe = stats::fisher_exact_2x2(a, b, cc, d);
    ContingencyResult res;
    res.a = a;
    res.b = b;
    res.c = cc;
    res.d = d;
    res.p_two_sided = fe.p;
    res.log_p = fe.log_p;
    return res;
}

AlignedSeries attention_series(const AlignedSeries& gamma1, const AlignedSeries& gamma2) {
    if (gamma1.size() != gamma2.size())
        throw DataError("attention_series: series must be aligned first");
    AlignedSeries a;
    a.name = "attention";
    a.dates = gamma1.dates;
    a.values.resize(gamma1.size());
    for (size_t t = 0; t < gamma1.size(); ++t)
        a.values[t] = std::fabs(gamma1.values[t] - gamma2.values[t]);
    return a;
}

AttentionPerformance attention_performance(const AlignedSeries& attention,
                                           const AlignedSeries& performance,
                                           const std::vector<AlignedSeries>& controls,
                                           size_t n_null, uint64_t seed) {
    std::vector<AlignedSeries> all{attention, performance};
    for (const auto& ctl : controls) all.push_back(ctl);
    const auto aligned = align(all);
    if (aligned[0].size() < 31)
        throw DataError("attention_performance: need at least 31 aligned days");

    const AlignedSeries theta_a = first_difference(aligned[0]);
    const AlignedSeries theta_p = first_difference(aligned[1]);

    AttentionPerformance res;
    res.n = theta_a.size();
    res.r = stats::pearson(theta_a.values, theta_p.values);
    // |r| = 1 only on degenerate exact couplings; keep the CI finite.
    res.ci = stats::fisher_ci(std::clamp(res.r, -1.0 + 1e-12, 1.0 - 1e-12), res.n);

    if (n_null < 100) n_null = 100;
    std::vector<double> abs_r(n_null);
    const PermutationPlan plan{seed, n_null};
    for (size_t k = 0; k < n_null; ++k) {
        const uint64_t rs = plan.replicate_seed(k);
        std::vector<double> xp = stats::permuted(theta_a.values, derive_seed(rs, 0));
        std::vector<double> yp = stats::permuted(theta_p.values, derive_seed(rs, 1));
        abs_r[k] = std::fabs(stats::pearson(xp, yp));
    }
    std::sort(abs_r.begin(), abs_r.end());
    const size_t q = static_cast<size_t>(std::ceil(0.95 * static_cast<double>(n_null))) - 1;
    res.null_band = abs_r[std::min(q, n_null - 1)];

    std::vector<std::vector<double>> cols;
    cols.push_back(std::vector<double>(res.n, 1.0));
    cols.push_back(theta_a.values);
    res.regressor_names = {"intercept", "theta_attention"};
    for (size_t k = 0; k < controls.size(); ++k) {
        const AlignedSeries theta_c = first_difference(aligned[2 + k]);
        cols.push_back(theta_c.values);
        res.regressor_names.push_back("theta_" + controls[k].name);
    }
    res.regression = stats::ols(theta_p.values, cols);
    return res;
}

AlignedSeries kernel_smooth(const AlignedSeries& s, int window) {
    if (window < 1) throw DataError("kernel_smooth: window must be >= 1");
    AlignedSeries out;
    out.name = s.name + "_smooth";
    out.dates = s.dates;
    out.values.resize(s.size());
    const int left = (window - 1) / 2;
    const int right = window - 1 - left;
    const int n = static_cast<int>(s.size());
    for (int t = 0; t < n; ++t) {
        const int lo = std::max(0, t - left);
        const int hi = std::min(n - 1, t + right);
        double sum = 0.0;
        for (int u = lo; u <= hi; ++u) sum += s.values[static_cast<size_t>(u)];
        out.values[static_cast<size_t>(t)] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

AlignedSeries read_index_csv(const std::filesystem::path& p, const std::string& name) {
    AlignedSeries s;
    s.name = name;
    std::vector<std::pair<Date, double>> rows;
    for (const auto& line : read_lines(p)) {
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() < 2) throw DataError("index csv: expected date,close in " + p.string());
        if (fields[0] == "date") continue;  // header
        rows.emplace_back(parse_iso_date(fields[0]),
                          parse_double_field(fields[1], "index close"));
    }
    if (rows.empty()) throw DataError("index csv is empty: " + p.string());
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [d, v] : rows) {
        if (!s.dates.empty() && !(s.dates.back() < d))
            throw DataError("index csv: duplicate date " + to_iso(d));
        s.dates.push_back(d);
        s.values.push_back(v);
    }
    return s;
}

PerformanceData read_performance_csv(const std::filesystem::path& p) {
    PerformanceData out;
    out.pct_profitable.name = "pct_profitable";
    out.n_traders.name = "n_traders";
    std::vector<std::tuple<Date, double, double>> rows;
    for (const auto& line : read_lines(p)) {
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() < 3)
            throw DataError("performance csv: expected date,pct_profitable,n_traders in " +
                            p.string());
        if (fields[0] == "date") continue;
        rows.emplace_back(parse_iso_date(fields[0]),
                          parse_double_field(fields[1], "pct_profitable"),
                          parse_double_field(fields[2], "n_traders"));
    }
    if (rows.empty()) throw DataError("performance csv is empty: " + p.string());
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    for (auto& [d, pct, nt] : rows) {
        if (!out.pct_profitable.dates.empty() && !(out.pct_profitable.dates.back() < d))
            throw DataError("performance csv: duplicate date " + to_iso(d));
        out.pct_profitable.dates.push_back(d);
        out.pct_profitable.values.push_back(pct);
        out.n_traders.dates.push_back(d);
        out.n_traders.values.push_back(nt);
    }
    return out;
}

std::string series_to_csv(const AlignedSeries& s, const std::string& value_header) {
    std::string out = "date," + value_header + "\n";
    for (size_t i = 0; i < s.size(); ++i) {
        out += to_iso(s.dates[i]);
        out += ',';
        out += format_double(s.values[i]);
        out += '\n';
    }
    return out;
}

}  // namespace bundlescope::series
