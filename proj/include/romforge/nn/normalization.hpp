#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "romforge/nn/network.hpp"

namespace romforge::nn {

/// Per-coordinate min-max scaling to [0, 1]. Coordinates with zero span are flagged
/// constant and map to 0.5 (and back to their single training value).
struct MinMaxNormalization {
    Vector min;
    Vector max;

    /// Fits over the columns of `samples` (one sample per column).
    static MinMaxNormalization fit(const Matrix& samples);

    std::size_t size() const noexcept { return static_cast<std::size_t>(min.size()); }
    bool is_constant(std::size_t k) const { return !(max(static_cast<Eigen::Index>(k)) > min(static_cast<Eigen::Index>(k))); }
    std::vector<bool> constant_mask() const;

    Matrix normalize(const Matrix& samples) const;
    Matrix denormalize(const Matrix& scaled) const;

    /// True if any coordinate of `sample` lies outside [min, max].
    bool outside(const Vector& sample) const;

    /// u64 dim | dim x f64 min | dim x f64 max
    void write(std::ostream& out) const;
    static MinMaxNormalization read(std::istream& in);

    bool operator==(const MinMaxNormalization& other) const;
};

}  // namespace romforge::nn
