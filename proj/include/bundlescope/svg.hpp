#pragma once

#include <string>
#include <vector>

#include "bundlescope/dates.hpp"

namespace bundlescope::svg {

// Dependency-light static SVG charts. Every chart embeds its data table
// as an XML comment so the numbers can be reviewed without a renderer.

struct LagChart {
    std::string title;
    std::vector<int> lags;
    std::vector<double> rho;
    std::vector<double> ci_low;
    std::vector<double> ci_high;
    double null_band = 0.0;
};

// Per-lag markers with CI whiskers and dashed +-null_band lines.
std::string render_lag_chart(const LagChart& chart);

struct DualSeriesChart {
    std::string title;
    std::vector<Date> dates;
    std::vector<double> a;        // z-scored series one
    std::vector<double> b;        // z-scored series two
    std::vector<double> a_smooth;
    std::vector<double> b_smooth;
    std::string a_label;
    std::string b_label;
};

// Two z-scored time series with smoothed overlays and a dashed zero line.
std::string render_dual_series_chart(const DualSeriesChart& chart);

struct ScatterChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<double> x;
    std::vector<double> y;
    double fit_intercept = 0.0;
    double fit_slope = 0.0;
};

// Scatter cloud with the fitted line.
std::string render_scatter_chart(const ScatterChart& chart);

}  // namespace bundlescope::svg
