#include "romforge/btae/distortion.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "romforge/core/log.hpp"

namespace romforge::btae {

double field_sd(const Eigen::Ref<const Eigen::VectorXd>& field) {
    if (field.size() == 0) return 0.0;
    const double mean = field.mean();
    return std::sqrt((field.array() - mean).square().mean());
}

DistortedPair distort_noise(const Matrix& fields, double epsilon, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto one_view = [&] {
        Matrix out(fields.rows(), fields.cols());
        for (Eigen::Index c = 0; c < fields.cols(); ++c) {
            const double scale = epsilon * field_sd(fields.col(c));
            for (Eigen::Index r = 0; r < fields.rows(); ++r) out(r, c) = fields(r, c) + scale * gauss(rng);
        }
        return out;
    };
    DistortedPair pair;
    pair.a = one_view();
    pair.b = one_view();
    return pair;
}

Matrix distort_blur(const Matrix& intermediate, std::size_t* skipped) {
    Matrix out(intermediate.rows(), intermediate.cols());
    std::size_t constant = 0;
    for (Eigen::Index c = 0; c < intermediate.cols(); ++c) {
        const double sd = field_sd(intermediate.col(c));
        if (!(sd > 0.0)) {
            ++constant;
            out.col(c) = intermediate.col(c);
            continue;
        }
        const double var = sd * sd;
        const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
        out.col(c) = (-(intermediate.col(c).array().square()) / (2.0 * var)).exp() * norm;
    }
    if (skipped) {
        *skipped += constant;
    } else if (constant > 0) {
        log::warn("gaussian blur skipped for " + std::to_string(constant) + " constant field(s)");
    }
    return out;
}

DistortedPair distort(const Matrix& fields, const DistortionConfig& config, std::mt19937_64& rng,
                      std::size_t* skipped) {
    DistortedPair pair = distort_noise(fields, config.epsilon, rng);
    if (config.blur_enabled) {
        pair.a = distort_blur(pair.a, skipped);
        pair.b = distort_blur(pair.b, skipped);
    }
    return pair;
}

}  // namespace romforge::btae
