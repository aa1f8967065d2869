#include "romforge/nn/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "romforge/core/error.hpp"

namespace romforge::nn {

AdamState AdamState::for_network(const DenseNetwork& net, AdamSettings settings) {
    AdamState s;
    s.first = Gradients::zeros_like(net);
    s.second = Gradients::zeros_like(net);
    s.settings = settings;
    return s;
}

void adam_step(DenseNetwork& net, const Gradients& grads, AdamState& state, double lr) {
    if (grads.layers.size() != net.layer_count() || state.first.layers.size() != net.layer_count())
        throw ValidationError("gradient/optimizer state does not match the network");
    if (!(lr > 0.0)) throw ValidationError("learning rate must be positive");
    if (!grads.all_finite()) throw OptimizerError("non-finite gradient passed to ADAM");

    const auto& s = state.settings;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(s.beta1, t);
    const double c2 = 1.0 - std::pow(s.beta2, t);

    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = s.beta1 * m + (1.0 - s.beta1) * g;
        v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + s.epsilon);
    };
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        auto& layer = net.layer(l);
        update(layer.weight, grads.layers[l].weight, state.first.layers[l].weight, state.second.layers[l].weight);
        update(layer.bias, grads.layers[l].bias, state.first.layers[l].bias, state.second.layers[l].bias);
    }
}

void CosineSchedule::validate() const {
    if (!(eta_min > 0.0) || !(eta_min <= eta_max) || !std::isfinite(eta_max))
        throw ValidationError("cosine schedule needs 0 < eta_min <= eta_max");
    if (step_f < 1) throw ValidationError("cosine schedule needs step_f >= 1");
}

double cosine_lr(const CosineSchedule& schedule, std::uint64_t step_c) {
    schedule.validate();
    if (step_c > schedule.step_f)
        throw ValidationError("schedule step " + std::to_string(step_c) + " beyond step_f " +
                              std::to_string(schedule.step_f));
    const double ratio = static_cast<double>(step_c) / static_cast<double>(schedule.step_f);
    const double w = 0.5 * (1.0 + std::cos(ratio * std::numbers::pi));
    // Same value as eta_min + w (eta_max - eta_min), but exact at w = 0 and w = 1.
    return schedule.eta_min * (1.0 - w) + schedule.eta_max * w;
}

}  // namespace romforge::nn
