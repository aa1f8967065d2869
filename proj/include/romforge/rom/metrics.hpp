#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace romforge::rom {

/// Per column: mean over DOFs of the squared difference.
std::vector<double> snapshot_mse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference);

/// Mean over snapshots of snapshot_mse, the per-test-parameter error.
double trajectory_mse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference);

struct DiffStats {
    double max = 0.0;
    double mean = 0.0;
};

/// Per column: max and mean of |predicted - reference|.
std::vector<DiffStats> diff_stats(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference);

struct BoxStats {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

/// Quartiles by linear interpolation between order statistics. Empty input throws.
BoxStats box_stats(std::vector<double> values);

/// Trailing moving average; the first window-1 entries average what is available.
std::vector<double> moving_average(std::span<const double> values, std::size_t window);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Line plot of log10(y) against x. Non-positive y values are clamped to the smallest positive one.
std::string render_log_plot_svg(const std::vector<PlotSeries>& series, const std::string& title,
                                const std::string& x_label, const std::string& y_label);

/// "%.17g", enough digits to round-trip any double.
std::string format_double(double v);

}  // namespace romforge::rom
