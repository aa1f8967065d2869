#pragma once

#include "romforge/nn/network.hpp"

namespace romforge::btae {

using nn::Matrix;

inline constexpr double kVarianceFloor = 1e-12;
inline constexpr double kDefaultLambda = 5e-3;

/// C = (1/B) * std(za)^T std(zb) for D x B embeddings (one sample per column), where
/// std() standardizes each dimension over the batch (population variance, floored at 1e-12).
/// Throws ValidationError when B < 2 or the shapes differ.
Matrix cross_correlation(const Matrix& za, const Matrix& zb);

struct BtLoss {
    double total = 0.0;
    double invariance = 0.0;  ///< sum_i (1 - C_ii)^2
    double redundancy = 0.0;  ///< lambda * sum_{i != j} C_ij^2
};

BtLoss bt_loss(const Matrix& c, double lambda = kDefaultLambda);

struct BtLossGradient {
    BtLoss loss;
    Matrix grad_a;  ///< dL/dza
    Matrix grad_b;  ///< dL/dzb
};

/// Barlow Twins loss of two embedding batches and its gradient through the batch standardization.
BtLossGradient bt_loss_with_gradient(const Matrix& za, const Matrix& zb, double lambda = kDefaultLambda);

/// Mean over samples and DOFs of the squared reconstruction error.
double ae_loss(const Matrix& reconstructed, const Matrix& original);

/// d ae_loss / d reconstructed.
Matrix ae_loss_gradient(const Matrix& reconstructed, const Matrix& original);

}  // namespace romforge::btae
