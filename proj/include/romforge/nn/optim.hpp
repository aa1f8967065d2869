#pragma once

#include <cstdint>

#include "romforge/nn/network.hpp"

namespace romforge::nn {

struct AdamSettings {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Moment accumulators mirroring one network's parameters.
struct AdamState {
    Gradients first;
    Gradients second;
    std::uint64_t step = 0;
    AdamSettings settings;

    static AdamState for_network(const DenseNetwork& net, AdamSettings settings = {});
};

/// Bias-corrected ADAM update with learning rate `lr`. Non-finite gradients throw
/// OptimizerError and leave both the network and the state untouched.
void adam_step(DenseNetwork& net, const Gradients& grads, AdamState& state, double lr);

/// Cosine annealing: eta(c) = eta_min + (eta_max - eta_min) (1 + cos(pi c / step_f)) / 2.
struct CosineSchedule {
    double eta_min = 1e-16;
    double eta_max = 1e-4;
    std::uint64_t step_f = 1;

    void validate() const;
};

/// Throws ValidationError when step_c is outside [0, step_f]. Endpoints are exact.
double cosine_lr(const CosineSchedule& schedule, std::uint64_t step_c);

}  // namespace romforge::nn
