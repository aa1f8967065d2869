#include "romforge/rom/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "romforge/core/error.hpp"

namespace romforge::rom {

namespace {

void check_shapes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("prediction is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                              " but the reference is " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    if (a.rows() == 0) throw ValidationError("fields have no DOFs");
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> snapshot_mse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference) {
    check_shapes(predicted, reference);
    std::vector<double> out(static_cast<std::size_t>(predicted.cols()));
    for (Eigen::Index c = 0; c < predicted.cols(); ++c)
        out[static_cast<std::size_t>(c)] =
            (predicted.col(c) - reference.col(c)).squaredNorm() / static_cast<double>(predicted.rows());
    return out;
}

double trajectory_mse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference) {
    const auto per = snapshot_mse(predicted, reference);
    if (per.empty()) throw ValidationError("trajectory has no snapshots");
    double sum = 0.0;
    for (double v : per) sum += v;
    return sum / static_cast<double>(per.size());
}

std::vector<DiffStats> diff_stats(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference) {
    check_shapes(predicted, reference);
    std::vector<DiffStats> out(static_cast<std::size_t>(predicted.cols()));
    for (Eigen::Index c = 0; c < predicted.cols(); ++c) {
        const Eigen::ArrayXd d = (predicted.col(c) - reference.col(c)).array().abs();
        out[static_cast<std::size_t>(c)] = {d.maxCoeff(), d.mean()};
    }
    return out;
}

BoxStats box_stats(std::vector<double> values) {
    if (values.empty()) throw ValidationError("box_stats of an empty sample");
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        const double w = pos - static_cast<double>(lo);
        return values[lo] + w * (values[hi] - values[lo]);
    };
    BoxStats s;
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    return s;
}

std::vector<double> moving_average(std::span<const double> values, std::size_t window) {
    if (window == 0) throw ValidationError("moving average window must be positive");
    std::vector<double> out(values.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum += values[i];
        if (i >= window) sum -= values[i - window];
        out[i] = sum / static_cast<double>(std::min(i + 1, window));
    }
    return out;
}

std::string render_log_plot_svg(const std::vector<PlotSeries>& series, const std::string& title,
                                const std::string& x_label, const std::string& y_label) {
    constexpr double width = 640, height = 400, left = 70, right = 20, top = 40, bottom = 50;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

    double floor_y = std::numeric_limits<double>::infinity();
    for (const auto& s : series)
        for (double y : s.y)
            if (y > 0.0) floor_y = std::min(floor_y, y);
    if (!std::isfinite(floor_y)) floor_y = 1e-300;

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            const double ly = std::log10(std::max(s.y[i], floor_y));
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ly);
            y1 = std::max(y1, ly);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= y0) y0 -= 0.5, y1 += 0.5;

    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (width - left - right); };
    auto py = [&](double ly) { return top + (y1 - ly) / (y1 - y0) * (height - top - bottom); };
    char buf[160];
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
        << "</text>\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                  left, top, width - left - right, height - top - bottom);
    svg << buf;
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0;
        const double yv = y0 + (y1 - y0) * k / 4.0;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.3g</text>\n", px(xv),
                      height - bottom + 16, xv);
        svg << buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">1e%.2f</text>\n", left - 6,
                      py(yv) + 4, yv);
        svg << buf;
    }
    svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
        << escape(x_label) << "</text>\n";
    svg << "<text x=\"16\" y=\"" << (top + height - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (top + height - bottom) / 2 << ")\">" << escape(y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = colors[k % std::size(colors)];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", px(s.x[i]),
                          py(std::log10(std::max(s.y[i], floor_y))));
            svg << buf;
        }
        svg << "\"/>\n";
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" fill=\"%s\">%s</text>\n", left + 8,
                      top + 16 + 14.0 * static_cast<double>(k), color, escape(s.label).c_str());
        svg << buf;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace romforge::rom
