#include "romforge/btae/losses.hpp"

#include <cmath>
#include <string>

#include "romforge/core/error.hpp"

namespace romforge::btae {

namespace {

struct Standardized {
    Matrix values;
    Eigen::VectorXd scale;  // per-dimension divisor
    std::vector<bool> floored;
};

Standardized standardize(const Matrix& z) {
    Standardized s;
    s.values.resize(z.rows(), z.cols());
    s.scale.resize(z.rows());
    s.floored.resize(static_cast<std::size_t>(z.rows()));
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const double mean = z.row(r).mean();
        const Eigen::ArrayXd centered = z.row(r).array().transpose() - mean;
        const double var = centered.square().mean();
        const bool floored = !(var >= kVarianceFloor);
        const double scale = std::sqrt(floored ? kVarianceFloor : var);
        s.values.row(r) = (centered / scale).transpose();
        s.scale(r) = scale;
        s.floored[static_cast<std::size_t>(r)] = floored;
    }
    return s;
}

/// Backward pass of standardize(): maps dL/d(standardized) to dL/dz.
Matrix standardize_backward(const Standardized& s, const Matrix& upstream) {
    Matrix out(upstream.rows(), upstream.cols());
    for (Eigen::Index r = 0; r < upstream.rows(); ++r) {
        const Eigen::ArrayXd da = upstream.row(r).array().transpose();
        const Eigen::ArrayXd a = s.values.row(r).array().transpose();
        Eigen::ArrayXd dx = da - da.mean();
        if (!s.floored[static_cast<std::size_t>(r)]) dx -= a * (da * a).mean();
        out.row(r) = (dx / s.scale(r)).transpose();
    }
    return out;
}

void check_pair(const Matrix& za, const Matrix& zb) {
    if (za.rows() != zb.rows() || za.cols() != zb.cols())
        throw ValidationError("embedding batches differ in shape");
    if (za.cols() < 2) throw ValidationError("cross-correlation needs a batch of at least 2 samples");
}

Matrix loss_gradient_wrt_c(const Matrix& c, double lambda) {
    Matrix g = 2.0 * lambda * c;
    for (Eigen::Index i = 0; i < c.rows(); ++i) g(i, i) = -2.0 * (1.0 - c(i, i));
    return g;
}

}  // namespace

Matrix cross_correlation(const Matrix& za, const Matrix& zb) {
    check_pair(za, zb);
    const auto a = standardize(za);
    const auto b = standardize(zb);
    return a.values * b.values.transpose() / static_cast<double>(za.cols());
}

BtLoss bt_loss(const Matrix& c, double lambda) {
    if (c.rows() != c.cols()) throw ValidationError("cross-correlation matrix must be square");
    BtLoss loss;
    double off = 0.0;
    for (Eigen::Index j = 0; j < c.cols(); ++j)
        for (Eigen::Index i = 0; i < c.rows(); ++i) {
            if (i == j) {
                loss.invariance += (1.0 - c(i, i)) * (1.0 - c(i, i));
            } else {
                off += c(i, j) * c(i, j);
            }
        }
    loss.redundancy = lambda * off;
    loss.total = loss.invariance + loss.redundancy;
    return loss;
}

BtLossGradient bt_loss_with_gradient(const Matrix& za, const Matrix& zb, double lambda) {
    check_pair(za, zb);
    const auto a = standardize(za);
    const auto b = standardize(zb);
    const double inv_batch = 1.0 / static_cast<double>(za.cols());
    const Matrix c = a.values * b.values.transpose() * inv_batch;

    BtLossGradient out;
    out.loss = bt_loss(c, lambda);
    const Matrix g = loss_gradient_wrt_c(c, lambda);
    out.grad_a = standardize_backward(a, g * b.values * inv_batch);
    out.grad_b = standardize_backward(b, g.transpose() * a.values * inv_batch);
    return out;
}

double ae_loss(const Matrix& reconstructed, const Matrix& original) {
    if (reconstructed.rows() != original.rows() || reconstructed.cols() != original.cols())
        throw ValidationError("reconstruction shape does not match the original batch");
    if (original.size() == 0) throw ValidationError("ae_loss of an empty batch");
    return (reconstructed - original).squaredNorm() / static_cast<double>(original.size());
}

Matrix ae_loss_gradient(const Matrix& reconstructed, const Matrix& original) {
    if (reconstructed.rows() != original.rows() || reconstructed.cols() != original.cols())
        throw ValidationError("reconstruction shape does not match the original batch");
    return 2.0 * (reconstructed - original) / static_cast<double>(original.size());
}

}  // namespace romforge::btae
