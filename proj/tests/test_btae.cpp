#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "romforge/btae/distortion.hpp"
#include "romforge/btae/losses.hpp"
#include "romforge/btae/model.hpp"
#include "romforge/btae/trainer.hpp"
#include "romforge/core/error.hpp"
#include "romforge/core/log.hpp"
#include "romforge/nn/gradcheck.hpp"

using namespace romforge;
using namespace romforge::btae;
using nn::Vector;

namespace {

Matrix gaussian(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> g;
    Matrix m(r, c);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = g(rng);
    return m;
}

/// Two-parameter family of smooth profiles, one per column.
Matrix profiles(std::uint64_t seed, Eigen::Index dof, Eigen::Index count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(dof, count);
    for (Eigen::Index c = 0; c < count; ++c) {
        const double a = 1.0 + 2.0 * u(rng), b = u(rng);
        for (Eigen::Index r = 0; r < dof; ++r) {
            const double x = (r + 0.5) / static_cast<double>(dof);
            m(r, c) = std::sin(a * std::numbers::pi * x) * std::exp(-b * x) + 0.3 * b;
        }
    }
    return m;
}

/// Brute-force standardized cross-correlation.
Matrix correlation_oracle(const Matrix& za, const Matrix& zb) {
    const auto d = za.rows(), n = za.cols();
    auto standardize = [&](const Matrix& z) {
        Matrix out(d, n);
        for (Eigen::Index i = 0; i < d; ++i) {
            double mean = 0.0;
            for (Eigen::Index b = 0; b < n; ++b) mean += z(i, b);
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (Eigen::Index b = 0; b < n; ++b) var += (z(i, b) - mean) * (z(i, b) - mean);
            var /= static_cast<double>(n);
            const double sd = std::sqrt(std::max(var, 1e-12));
            for (Eigen::Index b = 0; b < n; ++b) out(i, b) = (z(i, b) - mean) / sd;
        }
        return out;
    };
    const Matrix a = standardize(za), b = standardize(zb);
    Matrix c = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index k = 0; k < n; ++k) c(i, j) += a(i, k) * b(j, k);
            c(i, j) /= static_cast<double>(n);
        }
    return c;
}

BtAeTrainingConfig small_config() {
    BtAeTrainingConfig c;
    c.latent_dim = 3;
    c.epochs = 30;
    c.outer_batch = 64;
    c.inner_batch = 16;
    c.ae_schedule.eta_max = 3e-3;
    c.bt_schedule.eta_max = 1e-4;
    c.architecture = BtAeArchitecture{{16, 8}, {8}, 8};
    c.seed = 3;
    c.distortion.rng_seed = 4;
    return c;
}

}  // namespace

TEST_CASE("noise distortion scales with the field's own spread") {
    std::mt19937_64 rng(8);
    SUBCASE("constant fields and zero epsilon are left untouched") {
        const Matrix constant = Matrix::Constant(6, 2, 0.7);
        const auto p = distort_noise(constant, 0.1, rng);
        CHECK(p.a == constant);
        CHECK(p.b == constant);
        const Matrix varied = gaussian(rng, 6, 3);
        CHECK(distort_noise(varied, 0.0, rng).a == varied);
    }
    SUBCASE("an entry shifts by epsilon * SD * g") {
        Matrix f(4, 1);
        f << -2.0, 2.0, -2.0, 2.0;  // population SD = 2
        std::mt19937_64 mirror = rng;
        std::normal_distribution<double> g;
        const double g0 = g(mirror);
        const auto p = distort_noise(f, 0.1, rng);
        CHECK(p.a(0, 0) - f(0, 0) == doctest::Approx(0.2 * g0).epsilon(1e-14));
        CHECK_FALSE(p.a == p.b);
    }
    SUBCASE("the field mean is preserved on average") {
        const Matrix f = profiles(1, 10, 1);
        const double sd = field_sd(f.col(0));
        double sum = 0.0;
        const int draws = 10000;
        for (int k = 0; k < draws; ++k) sum += distort_noise(f, 0.1, rng).a.mean() - f.mean();
        const double se = 0.1 * sd / std::sqrt(10.0 * draws);
        CHECK(std::abs(sum / draws) <= 3.0 * se);
    }
}

TEST_CASE("value-wise Gaussian blur evaluates the normal density") {
    Matrix v(3, 1);
    v << 0.0, std::sqrt(1.5), -std::sqrt(1.5);  // population SD exactly 1
    const Matrix out = distort_blur(v);
    CHECK(out(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));
    CHECK(out(1, 0) == out(2, 0));

    std::mt19937_64 rng(2);
    const Matrix r = gaussian(rng, 50, 4) * 3.0;
    const Matrix b = distort_blur(r);
    for (Eigen::Index c = 0; c < r.cols(); ++c) {
        const double sd = field_sd(r.col(c));
        CHECK(b.col(c).minCoeff() > 0.0);
        CHECK(b.col(c).maxCoeff() <= 1.0 / std::sqrt(2.0 * std::numbers::pi * sd * sd));
    }

    const auto warnings = log::warning_count();
    log::set_quiet(true);
    const Matrix flat = Matrix::Constant(5, 1, 0.25);
    CHECK(distort_blur(flat) == flat);
    log::set_quiet(false);
    CHECK(log::warning_count() == warnings + 1);
}

TEST_CASE("cross-correlation of standardized embeddings") {
    std::mt19937_64 rng(21);
    SUBCASE("matches a brute-force evaluation") {
        const Matrix za = gaussian(rng, 5, 9), zb = gaussian(rng, 5, 9);
        CHECK((cross_correlation(za, zb) - correlation_oracle(za, zb)).cwiseAbs().maxCoeff() <= 1e-13);
    }
    SUBCASE("identical views at large batch are close to the identity") {
        const int batch = 4096;
        const Matrix z = gaussian(rng, 6, batch);
        const Matrix c = cross_correlation(z, z);
        const double tol = 5.0 / std::sqrt(static_cast<double>(batch));
        for (Eigen::Index i = 0; i < 6; ++i)
            for (Eigen::Index j = 0; j < 6; ++j) CHECK(std::abs(c(i, j) - (i == j ? 1.0 : 0.0)) <= tol);
        CHECK((cross_correlation(z, -z).diagonal().array() + 1.0).abs().maxCoeff() <= 1e-12);
    }
    SUBCASE("entries stay within [-1, 1] for random batches") {
        for (int trial = 0; trial < 50; ++trial) {
            const Matrix c = cross_correlation(gaussian(rng, 4, 3 + trial), gaussian(rng, 4, 3 + trial));
            CHECK(c.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
        }
    }
    SUBCASE("constant dimensions stay finite") {
        Matrix za = gaussian(rng, 3, 8);
        za.row(1).setConstant(4.0);
        const Matrix c = cross_correlation(za, gaussian(rng, 3, 8));
        CHECK(c.allFinite());
        CHECK(c.row(1).isZero(0.0));
    }
    CHECK_THROWS_AS(cross_correlation(Matrix::Zero(3, 1), Matrix::Zero(3, 1)), ValidationError);
    CHECK_THROWS_AS(cross_correlation(Matrix::Zero(3, 4), Matrix::Zero(2, 4)), ValidationError);
}

TEST_CASE("Barlow Twins loss arithmetic") {
    CHECK(bt_loss(Matrix::Identity(4, 4)).total == 0.0);
    const auto zero = bt_loss(Matrix::Zero(16, 16));
    CHECK(zero.invariance == 16.0);
    CHECK(zero.redundancy == 0.0);
    CHECK(zero.total == 16.0);
    Matrix c = Matrix::Identity(3, 3);
    c(0, 2) = c(2, 0) = 0.5;
    CHECK(bt_loss(c, 5e-3).total == doctest::Approx(2.5e-3).epsilon(1e-15));
    CHECK_THROWS_AS(bt_loss(Matrix::Zero(2, 3)), ValidationError);

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix r = gaussian(rng, 5, 5);
        const auto l = bt_loss(r);
        CHECK(l.total >= 0.0);
        CHECK(l.total == doctest::Approx(l.invariance + l.redundancy).epsilon(1e-15));
        CHECK(l.total > 0.0);
    }
}

TEST_CASE("BT loss gradient with respect to both embeddings") {
    std::mt19937_64 rng(13);
    Matrix za = gaussian(rng, 4, 6), zb = za + 0.3 * gaussian(rng, 4, 6);
    const auto g = bt_loss_with_gradient(za, zb, 0.05);
    CHECK(g.loss.total == doctest::Approx(bt_loss(cross_correlation(za, zb), 0.05).total).epsilon(1e-14));
    const double h = 1e-6;
    double worst = 0.0;
    for (Matrix* z : {&za, &zb}) {
        const Matrix& analytic = z == &za ? g.grad_a : g.grad_b;
        for (Eigen::Index k = 0; k < z->size(); ++k) {
            const double keep = z->data()[k];
            z->data()[k] = keep + h;
            const double up = bt_loss(cross_correlation(za, zb), 0.05).total;
            z->data()[k] = keep - h;
            const double down = bt_loss(cross_correlation(za, zb), 0.05).total;
            z->data()[k] = keep;
            const double numeric = (up - down) / (2 * h);
            worst = std::max(worst, std::abs(numeric - analytic.data()[k]) /
                                        std::max({std::abs(numeric), std::abs(analytic.data()[k]), 1e-6}));
        }
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("autoencoder loss is the mean squared entry error") {
    std::mt19937_64 rng(6);
    const Matrix x = gaussian(rng, 7, 3);
    CHECK(ae_loss(x, x) == 0.0);
    CHECK(ae_loss((x.array() + 0.25).matrix(), x) == doctest::Approx(0.0625).epsilon(1e-14));
    const Matrix y = gaussian(rng, 7, 3);
    double sum = 0.0;
    for (int s = 0; s < 3; ++s)
        for (int d = 0; d < 7; ++d) sum += (y(d, s) - x(d, s)) * (y(d, s) - x(d, s));
    CHECK(std::abs(ae_loss(y, x) - sum / 21.0) <= 1e-14);
    CHECK_THROWS_AS(ae_loss(Matrix::Zero(7, 2), x), ValidationError);
}

TEST_CASE("composed losses backpropagate through encoder, projector and decoder") {
    const Matrix data = profiles(2, 12, 10);
    auto model = init_bt_ae(nn::MinMaxNormalization::fit(data), 3, BtAeArchitecture{{8}, {6}, 5}, 7);
    const Matrix x = model.normalization.normalize(data);
    std::mt19937_64 rng(1);
    const auto views = distort(x, {0.1, true, 0}, rng);

    SUBCASE("BT loss through projector and encoder") {
        auto loss = [&] {
            const Matrix pa = nn::forward(model.projector, nn::forward(model.encoder, views.a));
            const Matrix pb = nn::forward(model.projector, nn::forward(model.encoder, views.b));
            return bt_loss(cross_correlation(pa, pb), model.lambda).total;
        };
        nn::ForwardCache ea, eb, pa, pb;
        const Matrix oa = nn::forward(model.projector, nn::forward(model.encoder, views.a, ea), pa);
        const Matrix ob = nn::forward(model.projector, nn::forward(model.encoder, views.b, eb), pb);
        const auto g = bt_loss_with_gradient(oa, ob, model.lambda);
        auto gpa = nn::backward(model.projector, pa, g.grad_a);
        auto gpb = nn::backward(model.projector, pb, g.grad_b);
        auto gea = nn::backward(model.encoder, ea, gpa.input_grad);
        auto geb = nn::backward(model.encoder, eb, gpb.input_grad);
        gpa.params += gpb.params;
        gea.params += geb.params;
        nn::DenseNetwork* nets[] = {&model.encoder, &model.projector};
        const nn::Gradients grads[] = {gea.params, gpa.params};
        CHECK(nn::finite_difference_check(nets, loss, grads, {.coordinates = 120}) <= 1e-5);
    }
    SUBCASE("AE loss through decoder and encoder") {
        auto loss = [&] { return ae_loss(nn::forward(model.decoder, nn::forward(model.encoder, x)), x); };
        nn::ForwardCache e, d;
        const Matrix r = nn::forward(model.decoder, nn::forward(model.encoder, x, e), d);
        const auto gd = nn::backward(model.decoder, d, ae_loss_gradient(r, x));
        const auto ge = nn::backward(model.encoder, e, gd.input_grad);
        nn::DenseNetwork* nets[] = {&model.encoder, &model.decoder};
        const nn::Gradients grads[] = {ge.params, gd.params};
        CHECK(nn::finite_difference_check(nets, loss, grads, {.coordinates = 120}) <= 1e-5);
    }
}

TEST_CASE("architecture shrinks for small fields and mirrors the encoder") {
    const auto big = BtAeArchitecture::for_dof(1024, 4);
    CHECK(big.encoder_hidden == std::vector<std::size_t>{256, 64});
    CHECK(big.projector_width == 128);
    const auto small = BtAeArchitecture::for_dof(64, 4);
    CHECK(small.encoder_hidden == std::vector<std::size_t>{64, 16});
    CHECK(BtAeArchitecture::for_dof(8, 4).encoder_hidden == std::vector<std::size_t>{8, 4});

    const Matrix data = profiles(3, 64, 5);
    const auto m = init_bt_ae(nn::MinMaxNormalization::fit(data), 4, small, 0);
    CHECK(m.encoder.input_size() == 64);
    CHECK(m.encoder.output_size() == 4);
    CHECK(m.decoder.input_size() == 4);
    CHECK(m.decoder.output_size() == 64);
    CHECK(m.decoder.layer(0).fan_out() == 16);
    CHECK(m.projector.output_size() == 128);
    CHECK(m.decoder.layers().back().activation == nn::Activation::Identity);
    CHECK_THROWS_AS(init_bt_ae(nn::MinMaxNormalization::fit(data), 65, small, 0), ValidationError);
}

TEST_CASE("training with zero epochs returns the initialized model") {
    const Matrix train = profiles(4, 24, 40), val = profiles(5, 24, 6);
    auto cfg = small_config();
    cfg.epochs = 0;
    const auto r = train_bt_ae(train, val, cfg);
    CHECK(r.history.validation_ae.empty());
    CHECK(r.history.best_epoch == 0);
    const auto fresh = init_bt_ae(nn::MinMaxNormalization::fit(train), 3, *cfg.architecture, cfg.seed);
    CHECK(r.model.encoder == fresh.encoder);
    CHECK(r.model.decoder == fresh.decoder);
}

TEST_CASE("two-loop training improves reconstruction and keeps the best checkpoint") {
    const Matrix train = profiles(6, 24, 120), val = profiles(7, 24, 12);
    const auto cfg = small_config();
    const auto r = train_bt_ae(train, val, cfg);
    const auto& h = r.history;
    REQUIRE(h.validation_ae.size() == cfg.epochs);
    CHECK(h.best_validation_ae < h.initial_validation_ae);
    CHECK(h.best_validation_ae == *std::min_element(h.validation_ae.begin(), h.validation_ae.end()));
    CHECK(validation_ae_loss(r.model, val) == doctest::Approx(h.best_validation_ae).epsilon(1e-12));
    CHECK(h.train_bt.size() == cfg.epochs);

    const Matrix x = r.model.normalization.normalize(train);
    const Matrix recon = nn::forward(r.model.decoder, nn::forward(r.model.encoder, x));
    CHECK(ae_loss(recon, x) <= 10.0 * h.train_ae.back());

    SUBCASE("same seeds, same checkpoint") {
        const auto again = train_bt_ae(train, val, cfg);
        std::ostringstream a(std::ios::binary), b(std::ios::binary);
        write_model(r.model, a);
        write_model(again.model, b);
        CHECK(a.str() == b.str());
    }
    SUBCASE("encode and decode are deterministic and finite") {
        const Vector f = train.col(3);
        CHECK(encode(r.model, f) == encode(r.model, f));
        CHECK(decode(r.model, Vector(Vector::Zero(3))).allFinite());
        CHECK_THROWS_AS(decode(r.model, Vector(Vector::Zero(4))), ValidationError);
        CHECK_THROWS_AS(encode(r.model, Vector(Vector::Zero(23))), ValidationError);
    }
}

TEST_CASE("diverging training aborts with its coordinates") {
    const Matrix train = profiles(8, 24, 40), val = profiles(9, 24, 6);
    auto cfg = small_config();
    cfg.ae_schedule.eta_max = 1e300;
    try {
        train_bt_ae(train, val, cfg);
        FAIL("expected TrainingAborted");
    } catch (const TrainingAborted& e) {
        CHECK(e.epoch() >= 1);
    }
}

TEST_CASE("BTAE checkpoints round-trip and reject inconsistencies") {
    const Matrix data = profiles(10, 16, 8);
    auto m = init_bt_ae(nn::MinMaxNormalization::fit(data), 2, BtAeArchitecture{{6}, {4}, 4}, 1);
    m.lambda = 0.01;
    m.epsilon = 0.2;
    std::ostringstream a(std::ios::binary);
    write_model(m, a);
    std::istringstream in(a.str(), std::ios::binary);
    const auto back = read_model(in);
    CHECK(back == m);
    std::ostringstream b(std::ios::binary);
    write_model(back, b);
    CHECK(a.str() == b.str());

    auto wrong_q = a.str();
    wrong_q[8] = 3;  // header Q
    std::istringstream bad(wrong_q, std::ios::binary);
    CHECK_THROWS_AS(read_model(bad), RuntimeError);
    std::istringstream cut(a.str().substr(0, a.str().size() - 4), std::ios::binary);
    CHECK_THROWS_AS(read_model(cut), TruncatedError);
}
