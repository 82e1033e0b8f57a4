#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bundlescope/bundling.hpp"
#include "bundlescope/corpus.hpp"
#include "bundlescope/dates.hpp"
#include "bundlescope/stats.hpp"

namespace bundlescope::series {

// Date-indexed numeric series; dates strictly increasing, no gaps in the
// value vector (alignment drops dates rather than leaving holes).
struct AlignedSeries {
    std::vector<Date> dates;
    std::vector<double> values;
    std::string name;

    size_t size() const { return dates.size(); }
    void check_invariants() const;
};

// Intersection alignment; dropped date counts are reported per input.
std::vector<AlignedSeries> align(const std::vector<AlignedSeries>& inputs,
                                 std::vector<size_t>* dropped = nullptr);

// gamma_i(t): per-bundle frequency relative to all extracted words.
// Dates whose denominator is zero are dropped (count reported via
// *zero_denominator_days). Empty bundles yield an all-zero series.
std::vector<AlignedSeries> bundle_relative_frequency(
    const corpus::DailyFrequencyMatrix& extracted,
    const bundling::CorrelationNetwork& net, const bundling::BundlePartition& partition,
    size_t* zero_denominator_days = nullptr);

// Theta(t) = s(t) - s(t-1), dated at the later day of each pair.
AlignedSeries first_difference(const AlignedSeries& s);

stats::UnitRootResult adf_test(const AlignedSeries& s, int lags = 1);
stats::UnitRootResult pp_test(const AlignedSeries& s, int bandwidth = -1);
double ar1_coefficient(const AlignedSeries& s);

struct CcfResult {
    std::vector<int> lags;       // -max_lag .. +max_lag
    std::vector<double> rho;
    std::vector<double> ci_low;  // per-lag Fisher-transform 95% bounds
    std::vector<double> ci_high;
    double null_band = 0.0;      // symmetric 95% i.i.d. band
};

// rho(dt) = corr(x(t), y(t+dt)). With x = Theta_index and y =
// Theta_bundle, negative dt means the bundle leads the index. The null
// band is the 95% quantile of |corr| between independently permuted
// copies of the pair.
CcfResult cross_correlation(const AlignedSeries& x, const AlignedSeries& y, int max_lag,
                            size_t n_null, uint64_t seed);

struct GrangerResult {
    double f = 0.0;
    double p = 1.0;
    size_t n = 0;
};

// Does predictor(t) improve the one-step forecast of target?
// Restricted:   target(t+1) ~ 1 + target(t)
// Unrestricted: target(t+1) ~ 1 + target(t) + predictor(t)
// F-test with (1, n-3) dof. A zero-variance predictor gives F=0, p=1;
// other exact collinearity is an error.
GrangerResult granger_test(const AlignedSeries& target, const AlignedSeries& predictor);

struct ContingencyResult {
    int64_t a = 0, b = 0, c = 0, d = 0;  // rows: delta_C, cols: delta_index
    double p_two_sided = 1.0;
    double log_p = 0.0;
};

struct DominanceSeries {
    std::vector<Date> dates;
    std::vector<double> z_c;
    std::vector<double> z_index;
    std::vector<int> delta_c;
    std::vector<int> delta_index;
};

// C(t) = gamma1 - gamma2 and the index, both z-scored on full-sample
// mean/std; delta = 1 iff z > 0 (exact zero counts as 0). Two-sided
// Fisher exact p on the 2x2 co-occurrence table.
ContingencyResult dominance_table(const AlignedSeries& gamma1, const AlignedSeries& gamma2,
                                  const AlignedSeries& index,
                                  DominanceSeries* detail = nullptr);

// A(t) = |gamma1(t) - gamma2(t)|.
AlignedSeries attention_series(const AlignedSeries& gamma1, const AlignedSeries& gamma2);

struct AttentionPerformance {
    double r = 0.0;
    stats::Interval ci;
    double null_band = 0.0;   // Monte Carlo i.i.d. 95% band
    stats::OlsFit regression; // Theta_p ~ 1 + Theta_A + controls
    std::vector<std::string> regressor_names;
    size_t n = 0;
};

// Correlation of the first differences of attention and performance,
// Fisher CI, i.i.d. null band, and the control regression.
AttentionPerformance attention_performance(const AlignedSeries& attention,
                                           const AlignedSeries& performance,
                                           const std::vector<AlignedSeries>& controls,
                                           size_t n_null, uint64_t seed);

// Nadaraya-Watson with a box kernel of width `window` business days,
// truncated at the edges; window = 1 is the identity.
AlignedSeries kernel_smooth(const AlignedSeries& s, int window = 21);

// ------------------------------------------------------------------- i/o

// CSV "date,close" (header optional).
AlignedSeries read_index_csv(const std::filesystem::path& p, const std::string& name = "index");

struct PerformanceData {
    AlignedSeries pct_profitable;
    AlignedSeries n_traders;
};

// CSV "date,pct_profitable,n_traders".
PerformanceData read_performance_csv(const std::filesystem::path& p);

std::string series_to_csv(const AlignedSeries& s, const std::string& value_header);

}  // namespace bundlescope::series
