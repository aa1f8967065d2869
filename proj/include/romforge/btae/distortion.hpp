#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "romforge/nn/network.hpp"

namespace romforge::btae {

using nn::Matrix;

struct DistortionConfig {
    double epsilon = 0.1;
    bool blur_enabled = true;
    std::uint64_t rng_seed = 0;
};

/// Two independently distorted views of the same batch.
struct DistortedPair {
    Matrix a;
    Matrix b;
};

/// Population standard deviation over the DOF entries of one field.
double field_sd(const Eigen::Ref<const Eigen::VectorXd>& field);

/// Per column: f + epsilon * SD(f) * g with fresh standard-normal draws g for each view.
/// Draw order: every entry of view A (column by column), then view B.
DistortedPair distort_noise(const Matrix& fields, double epsilon, std::mt19937_64& rng);

/// Value-wise Gaussian kernel per column: v -> exp(-v^2 / (2 SD^2)) / sqrt(2 pi SD^2), SD taken
/// over that column. Columns with SD = 0 pass through unchanged. They are added to `*skipped`
/// when given, otherwise reported by one logged warning per call.
Matrix distort_blur(const Matrix& intermediate, std::size_t* skipped = nullptr);

/// Noise followed by the optional blur.
DistortedPair distort(const Matrix& fields, const DistortionConfig& config, std::mt19937_64& rng,
                      std::size_t* skipped = nullptr);

}  // namespace romforge::btae
