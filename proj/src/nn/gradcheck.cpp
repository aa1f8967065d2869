#include "romforge/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "romforge/core/error.hpp"

namespace romforge::nn {

namespace {

struct Coordinate {
    std::size_t net;
    std::size_t layer;
    bool bias;
    Eigen::Index index;
};

double& parameter(DenseNetwork& net, const Coordinate& c) {
    auto& layer = net.layer(c.layer);
    return c.bias ? layer.bias(c.index) : layer.weight.data()[c.index];
}

double analytic_value(const Gradients& g, const Coordinate& c) {
    const auto& layer = g.layers.at(c.layer);
    return c.bias ? layer.bias(c.index) : layer.weight.data()[c.index];
}

}  // namespace

double finite_difference_check(std::span<DenseNetwork* const> nets, const std::function<double()>& loss,
                               std::span<const Gradients> analytic, const GradCheckOptions& options) {
    if (nets.size() != analytic.size()) throw ValidationError("need one analytic gradient per network");
    std::vector<Coordinate> pool;
    for (std::size_t n = 0; n < nets.size(); ++n) {
        if (analytic[n].layers.size() != nets[n]->layer_count())
            throw ValidationError("analytic gradient does not match network " + std::to_string(n));
        for (std::size_t l = 0; l < nets[n]->layer_count(); ++l) {
            const bool frozen = std::find(options.frozen.begin(), options.frozen.end(), std::pair{n, l}) !=
                                options.frozen.end();
            if (frozen) continue;
            const auto& layer = nets[n]->layer(l);
            for (Eigen::Index k = 0; k < layer.weight.size(); ++k) pool.push_back({n, l, false, k});
            for (Eigen::Index k = 0; k < layer.bias.size(); ++k) pool.push_back({n, l, true, k});
        }
    }
    std::mt19937_64 rng(options.seed);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min(pool.size(), options.coordinates));

    double worst = 0.0;
    for (const auto& c : pool) {
        double& p = parameter(*nets[c.net], c);
        const double original = p;
        p = original + options.step;
        const double plus = loss();
        p = original - options.step;
        const double minus = loss();
        p = original;
        const double numeric = (plus - minus) / (2.0 * options.step);
        const double exact = analytic_value(analytic[c.net], c);
        const double denom = std::max({std::abs(exact), std::abs(numeric), options.denominator_floor});
        worst = std::max(worst, std::abs(exact - numeric) / denom);
    }
    return worst;
}

}  // namespace romforge::nn
