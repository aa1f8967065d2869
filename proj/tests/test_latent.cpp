#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "romforge/core/error.hpp"
#include "romforge/latent/latent_map.hpp"

using namespace romforge;
using namespace romforge::latent;

namespace {

struct Pairs {
    Matrix inputs;
    Matrix targets;
};

/// (t, mu) on a grid with the target computed by `f`.
template <class F>
Pairs sample(std::size_t times, std::vector<double> mus, F f, std::size_t q) {
    Pairs p{Matrix(2, static_cast<Eigen::Index>(times * mus.size())),
            Matrix(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(times * mus.size()))};
    Eigen::Index c = 0;
    for (double mu : mus)
        for (std::size_t k = 0; k < times; ++k, ++c) {
            const double t = 0.1 * static_cast<double>(k) / static_cast<double>(times - 1);
            p.inputs(0, c) = t;
            p.inputs(1, c) = mu;
            p.targets.col(c) = f(t, mu);
        }
    return p;
}

LatentMapConfig quick(std::size_t epochs) {
    LatentMapConfig c;
    c.epochs = epochs;
    c.batch = 8;
    c.learning_rate = 1e-2;
    c.hidden_layers = 2;
    c.hidden_width = 7;
    c.seed = 5;
    return c;
}

}  // namespace

TEST_CASE("a constant target is learned almost exactly") {
    const auto f = [](double, double) { return Vector::Constant(2, 0.375).eval(); };
    const auto train = sample(10, {40.0, 60.0, 80.0}, f, 2);
    const auto val = sample(4, {50.0, 70.0}, f, 2);
    const auto r = train_latent_map(train.inputs, train.targets, val.inputs, val.targets, quick(200));
    const auto p = predict_latent(r.regressor, 0.05, std::vector{55.0});
    CHECK((p.code.array() - 0.375).abs().maxCoeff() <= 1e-8);
    const Matrix fitted = predict_latent(r.regressor, val.inputs);
    CHECK((fitted - val.targets).squaredNorm() / static_cast<double>(fitted.size()) <= 1e-8);
}

TEST_CASE("a linear map is fitted and reproduced at training points") {
    const auto f = [](double t, double mu) {
        Vector v(2);
        v << 3.0 * t + 0.01 * mu, -2.0 * t + 0.5;
        return v;
    };
    const auto train = sample(12, {40.0, 50.0, 60.0, 70.0, 80.0}, f, 2);
    const auto val = sample(5, {45.0, 75.0}, f, 2);
    auto cfg = quick(400);
    cfg.learning_rate = 1e-3;
    cfg.hidden_layers = 5;
    const auto r = train_latent_map(train.inputs, train.targets, val.inputs, val.targets, cfg);
    CHECK(r.best_validation_loss <= 1e-4);
    const auto p = predict_latent(r.regressor, train.inputs(0, 7), std::vector{train.inputs(1, 7)});
    CHECK((p.code - train.targets.col(7)).cwiseAbs().maxCoeff() <= 1e-2);
    CHECK_FALSE(p.extrapolated);

    SUBCASE("the returned network is the best epoch") {
        REQUIRE(r.validation_loss.size() == cfg.epochs);
        const auto best = std::min_element(r.validation_loss.begin(), r.validation_loss.end());
        CHECK(r.best_validation_loss == *best);
        CHECK(r.best_epoch == static_cast<std::size_t>(best - r.validation_loss.begin()) + 1);
        CHECK(normalized_mse(r.regressor, val.inputs, val.targets) ==
              doctest::Approx(r.best_validation_loss).epsilon(1e-12));
    }
    SUBCASE("batch prediction agrees with single queries") {
        const Matrix all = predict_latent(r.regressor, val.inputs);
        for (Eigen::Index c = 0; c < val.inputs.cols(); ++c) {
            const auto one = predict_latent(r.regressor, val.inputs(0, c), std::vector{val.inputs(1, c)});
            CHECK((all.col(c) - one.code).cwiseAbs().maxCoeff() <= 1e-15);
        }
    }
    SUBCASE("queries outside the training box are flagged") {
        CHECK(predict_latent(r.regressor, 0.05, std::vector{90.0}).extrapolated);
        CHECK(predict_latent(r.regressor, 0.2, std::vector{60.0}).extrapolated);
        CHECK_THROWS_AS(predict_latent(r.regressor, 0.05, std::vector{60.0, 1.0}), ValidationError);
    }
}

TEST_CASE("zero epochs returns the initialized regressor") {
    const auto f = [](double t, double) { return Vector::Constant(1, t).eval(); };
    const auto train = sample(10, {1.0, 2.0}, f, 1);
    const auto r = train_latent_map(train.inputs, train.targets, train.inputs, train.targets, quick(0));
    CHECK(r.validation_loss.empty());
    CHECK(r.best_epoch == 0);
    CHECK(r.best_validation_loss == normalized_mse(r.regressor, train.inputs, train.targets));
    CHECK(r.regressor.net.layer_count() == 3);
}

TEST_CASE("training is deterministic per seed") {
    const auto f = [](double t, double mu) { return Vector::Constant(1, std::sin(10 * t) * mu).eval(); };
    const auto train = sample(10, {1.0, 2.0}, f, 1);
    const auto a = train_latent_map(train.inputs, train.targets, train.inputs, train.targets, quick(20));
    const auto b = train_latent_map(train.inputs, train.targets, train.inputs, train.targets, quick(20));
    CHECK(a.regressor == b.regressor);
    CHECK(a.validation_loss == b.validation_loss);
    auto other = quick(20);
    other.seed = 6;
    CHECK_FALSE(train_latent_map(train.inputs, train.targets, train.inputs, train.targets, other).regressor ==
                a.regressor);
}

TEST_CASE("bad inputs are rejected") {
    const Matrix few = Matrix::Random(2, 9), few_t = Matrix::Random(1, 9);
    CHECK_THROWS_AS(train_latent_map(few, few_t, few, few_t, quick(1)), ValidationError);
    const Matrix x = Matrix::Random(2, 12), y = Matrix::Random(1, 11);
    CHECK_THROWS_AS(train_latent_map(x, y, x, y, quick(1)), ValidationError);
    auto cfg = quick(1);
    cfg.batch = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = quick(1);
    cfg.learning_rate = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("LMAP files round-trip byte for byte") {
    const auto f = [](double t, double mu) {
        Vector v(3);
        v << t, mu, t * mu;
        return v;
    };
    const auto train = sample(10, {1.0, 2.0}, f, 3);
    const auto r = train_latent_map(train.inputs, train.targets, train.inputs, train.targets, quick(3));
    std::ostringstream a(std::ios::binary);
    write_regressor(r.regressor, a);
    std::istringstream in(a.str(), std::ios::binary);
    const auto back = read_regressor(in);
    CHECK(back == r.regressor);
    std::ostringstream b(std::ios::binary);
    write_regressor(back, b);
    CHECK(a.str() == b.str());

    auto bad = a.str();
    bad[0] = 'X';
    std::istringstream bad_in(bad, std::ios::binary);
    CHECK_THROWS_AS(read_regressor(bad_in), ParseError);
    auto future = a.str();
    future[4] = 7;
    std::istringstream future_in(future, std::ios::binary);
    CHECK_THROWS_AS(read_regressor(future_in), UnsupportedVersionError);
}
