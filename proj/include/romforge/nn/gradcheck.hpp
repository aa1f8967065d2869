#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "romforge/nn/network.hpp"

namespace romforge::nn {

struct GradCheckOptions {
    std::size_t coordinates = 64;  ///< sampled parameter coordinates (clamped to the pool size)
    double step = 1e-6;
    std::uint64_t seed = 0;
    /// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
    double denominator_floor = 1e-6;
    /// (network index, layer index) pairs excluded from sampling.
    std::vector<std::pair<std::size_t, std::size_t>> frozen;
};

/// Central-difference verification of `analytic` (one Gradients per network) against
/// `loss`, which must re-evaluate the scalar loss from the networks' current parameters.
/// Parameters are restored bitwise afterwards. Returns the max relative error.
double finite_difference_check(std::span<DenseNetwork* const> nets, const std::function<double()>& loss,
                               std::span<const Gradients> analytic, const GradCheckOptions& options = {});

}  // namespace romforge::nn
