#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "romforge/btae/distortion.hpp"
#include "romforge/btae/model.hpp"
#include "romforge/nn/optim.hpp"

namespace romforge::btae {

struct BtAeTrainingConfig {
    std::size_t latent_dim = 4;
    std::size_t epochs = 50;
    std::size_t outer_batch = 512;
    std::size_t inner_batch = 32;
    /// step_f of both schedules is derived from the data size; only the rates are read here.
    nn::CosineSchedule bt_schedule{1e-16, 1e-4, 1};
    nn::CosineSchedule ae_schedule{1e-16, 1e-5, 1};
    DistortionConfig distortion;
    double lambda = kDefaultLambda;
    std::uint64_t seed = 0;
    std::optional<BtAeArchitecture> architecture;  ///< defaults to BtAeArchitecture::for_dof

    void validate() const;
};

/// Validation losses are recorded before training (initial_*) and after every epoch.
struct BtAeHistory {
    double initial_validation_ae = 0.0;
    double initial_validation_bt = 0.0;
    std::vector<double> validation_ae;
    std::vector<double> validation_bt;
    std::vector<double> train_ae;  ///< mean inner-batch AE loss of the epoch
    std::vector<double> train_bt;  ///< mean outer-batch BT loss of the epoch
    std::size_t best_epoch = 0;    ///< 0 = the initialized weights were never beaten
    double best_validation_ae = 0.0;
};

struct BtAeTrainingResult {
    BtAeModel model;
    BtAeHistory history;
};

/// Two-loop BT-AE training on physical fields (one per column). Normalization is fitted on
/// `train`. Each epoch reshuffles, redraws distortions, and per outer batch performs one BT
/// update of encoder+projector followed by AE updates of encoder+decoder over its inner
/// batches. The returned model is the one with the lowest validation AE loss.
/// Throws TrainingAborted on a non-finite loss.
BtAeTrainingResult train_bt_ae(const Matrix& train, const Matrix& validation, const BtAeTrainingConfig& config);

/// Validation losses of an existing model (normalized units). The BT loss uses views drawn from `rng`.
double validation_ae_loss(const BtAeModel& model, const Matrix& fields);
double validation_bt_loss(const BtAeModel& model, const Matrix& fields, const DistortionConfig& distortion,
                          std::mt19937_64& rng);

}  // namespace romforge::btae
