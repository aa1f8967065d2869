#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "romforge/nn/network.hpp"
#include "romforge/nn/normalization.hpp"

namespace romforge::latent {

using nn::Matrix;
using nn::Vector;

struct LatentMapConfig {
    std::size_t epochs = 10000;
    std::size_t batch = 32;
    double learning_rate = 1e-3;  ///< fixed, no schedule
    std::size_t hidden_layers = 5;
    std::size_t hidden_width = 7;
    std::uint64_t seed = 0;

    void validate() const;
};

/// (t, mu) -> latent code. Inputs and outputs are min-max scaled to [0, 1] around the network.
struct LatentRegressor {
    nn::DenseNetwork net;
    nn::MinMaxNormalization input_norm;
    nn::MinMaxNormalization output_norm;

    std::size_t input_size() const { return net.input_size(); }
    std::size_t output_size() const { return net.output_size(); }
    void validate() const;
    bool operator==(const LatentRegressor&) const = default;
};

struct LatentTrainingResult {
    LatentRegressor regressor;
    std::vector<double> validation_loss;  ///< per epoch, normalized-output MSE
    std::vector<double> train_loss;       ///< per epoch, mean over batches
    std::size_t best_epoch = 0;           ///< 1-based; 0 only when epochs = 0
    double best_validation_loss = 0.0;
};

/// Inputs are (1 + P) x n with rows (t, mu_1..mu_P); targets are Q x n.
/// Needs at least 10 training pairs and one validation pair. Keeps the epoch with the lowest
/// validation loss. Throws TrainingAborted on a non-finite loss.
LatentTrainingResult train_latent_map(const Matrix& inputs, const Matrix& targets, const Matrix& validation_inputs,
                                      const Matrix& validation_targets, const LatentMapConfig& config);

struct LatentPrediction {
    Vector code;
    bool extrapolated = false;  ///< some input lay outside the training range
};

LatentPrediction predict_latent(const LatentRegressor& reg, double t, std::span<const double> mu);
/// Batch form, one input per column; extrapolation is not reported.
Matrix predict_latent(const LatentRegressor& reg, const Matrix& inputs);

/// Mean squared error in normalized output units.
double normalized_mse(const LatentRegressor& reg, const Matrix& inputs, const Matrix& targets);

/// "LMAP" | u32 version=1 | input normalization | output normalization | DNET block
void write_regressor(const LatentRegressor& reg, std::ostream& out);
LatentRegressor read_regressor(std::istream& in);
void save_regressor(const LatentRegressor& reg, const std::filesystem::path& path);
LatentRegressor load_regressor(const std::filesystem::path& path);

}  // namespace romforge::latent
