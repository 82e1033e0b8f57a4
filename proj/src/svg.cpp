#include "bundlescope/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bundlescope/errors.hpp"
#include "bundlescope/textio.hpp"

namespace bundlescope::svg {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 42.0;
constexpr double kMarginBottom = 48.0;

struct Scale {
    double lo = 0.0, hi = 1.0, px0 = 0.0, px1 = 1.0;
    double operator()(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

Scale x_scale(double lo, double hi) {
    if (hi <= lo) hi = lo + 1.0;
    return {lo, hi, kMarginLeft, kWidth - kMarginRight};
}

Scale y_scale(double lo, double hi) {
    if (hi <= lo) hi = lo + 1.0;
    const double pad = 0.06 * (hi - lo);
    return {lo - pad, hi + pad, kHeight - kMarginBottom, kMarginTop};
}

std::string num(double v) { return format_double(v); }

void header(std::string& s, const std::string& title) {
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
         "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
         num(kHeight) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kWidth / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         title + "</text>\n";
}

void axes(std::string& s, const Scale& sx, const Scale& sy, const std::string& x_label,
          const std::string& y_label) {
    s += "<line x1=\"" + num(sx.px0) + "\" y1=\"" + num(sy.px0) + "\" x2=\"" + num(sx.px1) +
         "\" y2=\"" + num(sy.px0) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(sx.px0) + "\" y1=\"" + num(sy.px0) + "\" x2=\"" + num(sx.px0) +
         "\" y2=\"" + num(sy.px1) + "\" stroke=\"black\"/>\n";
    // y ticks at 5 round positions
    for (int k = 0; k <= 4; ++k) {
        const double v = sy.lo + (sy.hi - sy.lo) * k / 4.0;
        const double y = sy(v);
        s += "<line x1=\"" + num(sx.px0 - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(sx.px0) +
             "\" y2=\"" + num(y) + "\" stroke=\"black\"/>\n";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", v);
        s += "<text x=\"" + num(sx.px0 - 8) + "\" y=\"" + num(y + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + buf +
             "</text>\n";
    }
    s += "<text x=\"" + num((sx.px0 + sx.px1) / 2) + "\" y=\"" + num(kHeight - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + x_label +
         "</text>\n";
    s += "<text x=\"16\" y=\"" + num((sy.px0 + sy.px1) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
         num((sy.px0 + sy.px1) / 2) + ")\">" + y_label + "</text>\n";
}

void zero_line(std::string& s, const Scale& sx, const Scale& sy) {
    if (sy.lo < 0.0 && sy.hi > 0.0) {
        const double y = sy(0.0);
        s += "<line x1=\"" + num(sx.px0) + "\" y1=\"" + num(y) + "\" x2=\"" + num(sx.px1) +
             "\" y2=\"" + num(y) + "\" stroke=\"#888\" stroke-dasharray=\"2,3\"/>\n";
    }
}

std::string polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                     const Scale& sx, const Scale& sy, const std::string& color,
                     double width) {
    std::string pts;
    for (size_t i = 0; i < xs.size(); ++i) {
        pts += num(sx(xs[i]));
        pts += ',';
        pts += num(sy(ys[i]));
        pts += ' ';
    }
    return "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + num(width) +
           "\" points=\"" + pts + "\"/>\n";
}

}  // namespace

std::string render_lag_chart(const LagChart& chart) {
    if (chart.lags.empty() || chart.lags.size() != chart.rho.size())
        throw DataError("lag chart: inconsistent data");
    std::string s;
    header(s, chart.title);
    s += "<!-- data: lag,rho,ci_low,ci_high (null_band=" + num(chart.null_band) + ")\n";
    for (size_t i = 0; i < chart.lags.size(); ++i)
        s += std::to_string(chart.lags[i]) + "," + num(chart.rho[i]) + "," +
             num(chart.ci_low[i]) + "," + num(chart.ci_high[i]) + "\n";
    s += "-->\n";

    double lo = -chart.null_band, hi = chart.null_band;
    for (size_t i = 0; i < chart.lags.size(); ++i) {
        lo = std::min(lo, chart.ci_low[i]);
        hi = std::max(hi, chart.ci_high[i]);
    }
    const Scale sx = x_scale(chart.lags.front() - 0.5, chart.lags.back() + 0.5);
    const Scale sy = y_scale(lo, hi);
    axes(s, sx, sy, "lag (days); negative = bundle leads", "correlation");
    zero_line(s, sx, sy);
    for (double band : {chart.null_band, -chart.null_band}) {
        s += "<line x1=\"" + num(sx.px0) + "\" y1=\"" + num(sy(band)) + "\" x2=\"" +
             num(sx.px1) + "\" y2=\"" + num(sy(band)) +
             "\" stroke=\"#cc2222\" stroke-dasharray=\"5,4\"/>\n";
    }
    for (size_t i = 0; i < chart.lags.size(); ++i) {
        const double x = sx(chart.lags[i]);
        s += "<line x1=\"" + num(x) + "\" y1=\"" + num(sy(chart.ci_low[i])) + "\" x2=\"" +
             num(x) + "\" y2=\"" + num(sy(chart.ci_high[i])) +
             "\" stroke=\"#334488\" stroke-width=\"1.5\"/>\n";
        s += "<circle cx=\"" + num(x) + "\" cy=\"" + num(sy(chart.rho[i])) +
             "\" r=\"4\" fill=\"#334488\"/>\n";
        // x tick labels per lag
        s += "<text x=\"" + num(x) + "\" y=\"" + num(sy.px0 + 16) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
             std::to_string(chart.lags[i]) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string render_dual_series_chart(const DualSeriesChart& chart) {
    const size_t n = chart.dates.size();
    if (n == 0 || chart.a.size() != n || chart.b.size() != n)
        throw DataError("dual series chart: inconsistent data");
    std::string s;
    header(s, chart.title);
    s += "<!-- data: date," + chart.a_label + "," + chart.b_label + "\n";
    for (size_t i = 0; i < n; ++i)
        s += to_iso(chart.dates[i]) + "," + num(chart.a[i]) + "," + num(chart.b[i]) + "\n";
    s += "-->\n";

    std::vector<double> xs(n);
    for (size_t i = 0; i < n; ++i) xs[i] = static_cast<double>(chart.dates[i].days);
    double lo = chart.a[0], hi = chart.a[0];
    for (double v : chart.a) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : chart.b) { lo = std::min(lo, v); hi = std::max(hi, v); }
    const Scale sx = x_scale(xs.front(), xs.back());
    const Scale sy = y_scale(lo, hi);
    axes(s, sx, sy, to_iso(chart.dates.front()) + " .. " + to_iso(chart.dates.back()),
         "z-score");
    zero_line(s, sx, sy);
    for (size_t i = 0; i < n; ++i) {
        s += "<circle cx=\"" + num(sx(xs[i])) + "\" cy=\"" + num(sy(chart.a[i])) +
             "\" r=\"1.2\" fill=\"#222222\" fill-opacity=\"0.35\"/>\n";
        s += "<circle cx=\"" + num(sx(xs[i])) + "\" cy=\"" + num(sy(chart.b[i])) +
             "\" r=\"1.2\" fill=\"#dd8800\" fill-opacity=\"0.35\"/>\n";
    }
    if (chart.a_smooth.size() == n) s += polyline(xs, chart.a_smooth, sx, sy, "#222222", 1.8);
    if (chart.b_smooth.size() == n) s += polyline(xs, chart.b_smooth, sx, sy, "#dd8800", 1.8);
    s += "<text x=\"" + num(sx.px1 - 4) + "\" y=\"" + num(kMarginTop + 12) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222222\">" +
         chart.a_label + "</text>\n";
    s += "<text x=\"" + num(sx.px1 - 4) + "\" y=\"" + num(kMarginTop + 26) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#dd8800\">" +
         chart.b_label + "</text>\n";
    s += "</svg>\n";
    return s;
}

std::string render_scatter_chart(const ScatterChart& chart) {
    const size_t n = chart.x.size();
    if (n == 0 || chart.y.size() != n) throw DataError("scatter chart: inconsistent data");
    std::string s;
    header(s, chart.title);
    s += "<!-- data: x,y (fit: y = " + num(chart.fit_intercept) + " + " +
         num(chart.fit_slope) + " x)\n";
    for (size_t i = 0; i < n; ++i) s += num(chart.x[i]) + "," + num(chart.y[i]) + "\n";
    s += "-->\n";

    double xlo = chart.x[0], xhi = chart.x[0], ylo = chart.y[0], yhi = chart.y[0];
    for (double v : chart.x) { xlo = std::min(xlo, v); xhi = std::max(xhi, v); }
    for (double v : chart.y) { ylo = std::min(ylo, v); yhi = std::max(yhi, v); }
    const Scale sx = x_scale(xlo, xhi);
    const Scale sy = y_scale(ylo, yhi);
    axes(s, sx, sy, chart.x_label, chart.y_label);
    zero_line(s, sx, sy);
    for (size_t i = 0; i < n; ++i)
        s += "<circle cx=\"" + num(sx(chart.x[i])) + "\" cy=\"" + num(sy(chart.y[i])) +
             "\" r=\"2\" fill=\"#334488\" fill-opacity=\"0.45\"/>\n";
    const double y0 = chart.fit_intercept + chart.fit_slope * xlo;
    const double y1 = chart.fit_intercept + chart.fit_slope * xhi;
    s += "<line x1=\"" + num(sx(xlo)) + "\" y1=\"" + num(sy(y0)) + "\" x2=\"" + num(sx(xhi)) +
         "\" y2=\"" + num(sy(y1)) + "\" stroke=\"#cc2222\" stroke-dasharray=\"6,4\"/>\n";
    s += "</svg>\n";
    return s;
}

}  // namespace bundlescope::svg
