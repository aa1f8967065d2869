#include "romforge/btae/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "romforge/core/error.hpp"
#include "romforge/core/log.hpp"

namespace romforge::btae {

namespace {

Matrix gather(const Matrix& data, std::span<const Eigen::Index> cols) {
    Matrix out(data.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = data.col(cols[k]);
    return out;
}

double bt_loss_normalized(const BtAeModel& model, const DistortedPair& views) {
    const Matrix pa = nn::forward(model.projector, nn::forward(model.encoder, views.a));
    const Matrix pb = nn::forward(model.projector, nn::forward(model.encoder, views.b));
    return bt_loss(cross_correlation(pa, pb), model.lambda).total;
}

struct Optimizers {
    nn::AdamState bt_encoder, bt_projector, ae_encoder, ae_decoder;

    explicit Optimizers(const BtAeModel& m)
        : bt_encoder(nn::AdamState::for_network(m.encoder)),
          bt_projector(nn::AdamState::for_network(m.projector)),
          ae_encoder(nn::AdamState::for_network(m.encoder)),
          ae_decoder(nn::AdamState::for_network(m.decoder)) {}
};

/// One BT update on an outer batch. Returns the loss before the update.
double bt_update(BtAeModel& model, Optimizers& opt, const DistortedPair& views, double lr) {
    nn::ForwardCache enc_a, enc_b, proj_a, proj_b;
    const Matrix pa = nn::forward(model.projector, nn::forward(model.encoder, views.a, enc_a), proj_a);
    const Matrix pb = nn::forward(model.projector, nn::forward(model.encoder, views.b, enc_b), proj_b);
    const auto g = bt_loss_with_gradient(pa, pb, model.lambda);
    if (!std::isfinite(g.loss.total)) return g.loss.total;

    auto back_pa = nn::backward(model.projector, proj_a, g.grad_a);
    auto back_pb = nn::backward(model.projector, proj_b, g.grad_b);
    auto back_ea = nn::backward(model.encoder, enc_a, back_pa.input_grad);
    auto back_eb = nn::backward(model.encoder, enc_b, back_pb.input_grad);
    back_pa.params += back_pb.params;
    back_ea.params += back_eb.params;
    nn::adam_step(model.projector, back_pa.params, opt.bt_projector, lr);
    nn::adam_step(model.encoder, back_ea.params, opt.bt_encoder, lr);
    return g.loss.total;
}

double ae_update(BtAeModel& model, Optimizers& opt, const Matrix& batch, double lr) {
    nn::ForwardCache enc, dec;
    const Matrix recon = nn::forward(model.decoder, nn::forward(model.encoder, batch, enc), dec);
    const double loss = ae_loss(recon, batch);
    if (!std::isfinite(loss)) return loss;
    auto back_d = nn::backward(model.decoder, dec, ae_loss_gradient(recon, batch));
    auto back_e = nn::backward(model.encoder, enc, back_d.input_grad);
    nn::adam_step(model.decoder, back_d.params, opt.ae_decoder, lr);
    nn::adam_step(model.encoder, back_e.params, opt.ae_encoder, lr);
    return loss;
}

}  // namespace

void BtAeTrainingConfig::validate() const {
    if (latent_dim == 0) throw ValidationError("latent size must be at least 1");
    if (outer_batch < 2) throw ValidationError("outer batch must hold at least 2 samples");
    if (inner_batch == 0) throw ValidationError("inner batch must be positive");
    if (!(distortion.epsilon >= 0.0)) throw ValidationError("distortion epsilon must be non-negative");
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    bt_schedule.validate();
    ae_schedule.validate();
    if (architecture) architecture->validate();
}

double validation_ae_loss(const BtAeModel& model, const Matrix& fields) {
    const Matrix x = model.normalization.normalize(fields);
    return ae_loss(nn::forward(model.decoder, nn::forward(model.encoder, x)), x);
}

double validation_bt_loss(const BtAeModel& model, const Matrix& fields, const DistortionConfig& distortion,
                          std::mt19937_64& rng) {
    return bt_loss_normalized(model, distort(model.normalization.normalize(fields), distortion, rng));
}

BtAeTrainingResult train_bt_ae(const Matrix& train, const Matrix& validation, const BtAeTrainingConfig& config) {
    config.validate();
    if (train.cols() < 2) throw ValidationError("BT-AE training needs at least 2 training snapshots");
    if (validation.cols() < 2) throw ValidationError("BT-AE training needs at least 2 validation snapshots");
    if (validation.rows() != train.rows()) throw ValidationError("validation fields differ in DOF count");
    const auto dof = static_cast<std::size_t>(train.rows());
    if (config.latent_dim > dof) throw ValidationError("latent size exceeds the field DOF count");

    const auto arch = config.architecture.value_or(BtAeArchitecture::for_dof(dof, config.latent_dim));
    BtAeTrainingResult result;
    BtAeModel model = init_bt_ae(nn::MinMaxNormalization::fit(train), config.latent_dim, arch, config.seed);
    model.lambda = config.lambda;
    model.epsilon = config.distortion.epsilon;

    const Matrix x_train = model.normalization.normalize(train);
    const Matrix x_val = model.normalization.normalize(validation);
    // Validation views are drawn once so the BT curve compares like with like across epochs.
    std::mt19937_64 val_rng(config.distortion.rng_seed ^ 0x5eedULL);
    std::size_t blur_skipped = 0;
    const DistortedPair val_views = distort(x_val, config.distortion, val_rng, &blur_skipped);
    auto val_ae = [&] { return ae_loss(nn::forward(model.decoder, nn::forward(model.encoder, x_val)), x_val); };

    auto& h = result.history;
    h.initial_validation_ae = val_ae();
    h.initial_validation_bt = bt_loss_normalized(model, val_views);
    h.best_validation_ae = h.initial_validation_ae;
    result.model = model;
    if (config.epochs == 0) return result;

    const auto n = static_cast<std::size_t>(x_train.cols());
    const std::size_t outer = std::min(config.outer_batch, n);
    const std::size_t outer_count = (n + outer - 1) / outer;
    std::size_t inner_updates = 0;  // per epoch
    for (std::size_t b = 0; b < outer_count; ++b) {
        const std::size_t width = std::min(outer, n - b * outer);
        inner_updates += (width + config.inner_batch - 1) / config.inner_batch;
    }

    auto bt_sched = config.bt_schedule;
    bt_sched.step_f = config.epochs * outer_count;
    auto ae_sched = config.ae_schedule;
    ae_sched.step_f = config.epochs * inner_updates;
    std::uint64_t bt_step = 0, ae_step = 0;

    Optimizers opt(model);
    std::mt19937_64 rng(config.distortion.rng_seed);
    std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double bt_sum = 0.0, ae_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t b = 0; b < outer_count; ++b) {
            const std::size_t begin = b * outer;
            const std::size_t width = std::min(outer, n - begin);
            const Matrix batch = gather(x_train, std::span(order).subspan(begin, width));

            if (width >= 2) {
                const double bt = bt_update(model, opt, distort(batch, config.distortion, rng, &blur_skipped),
                                            nn::cosine_lr(bt_sched, bt_step));
                if (!std::isfinite(bt)) throw TrainingAborted("non-finite BT loss", epoch, batch_index);
                bt_sum += bt;
            }
            ++bt_step;

            for (std::size_t ib = 0; ib < width; ib += config.inner_batch) {
                const auto cols = std::min(config.inner_batch, width - ib);
                const double ae = ae_update(model, opt, batch.middleCols(static_cast<Eigen::Index>(ib),
                                                                         static_cast<Eigen::Index>(cols)),
                                            nn::cosine_lr(ae_sched, ae_step));
                if (!std::isfinite(ae)) throw TrainingAborted("non-finite AE loss", epoch, batch_index);
                ae_sum += ae;
                ++ae_step;
            }
            ++batch_index;
        }
        h.train_bt.push_back(bt_sum / static_cast<double>(outer_count));
        h.train_ae.push_back(ae_sum / static_cast<double>(inner_updates));

        const double v_ae = val_ae();
        const double v_bt = bt_loss_normalized(model, val_views);
        if (!std::isfinite(v_ae) || !std::isfinite(v_bt))
            throw TrainingAborted("non-finite validation loss", epoch, batch_index);
        h.validation_ae.push_back(v_ae);
        h.validation_bt.push_back(v_bt);
        if (v_ae < h.best_validation_ae) {
            h.best_validation_ae = v_ae;
            h.best_epoch = epoch;
            result.model = model;
        }
    }
    if (blur_skipped > 0)
        log::warn("gaussian blur passed " + std::to_string(blur_skipped) + " constant distorted field(s) through unchanged");
    return result;
}

}  // namespace romforge::btae
