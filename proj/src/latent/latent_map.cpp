#include "romforge/latent/latent_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "romforge/core/binary_io.hpp"
#include "romforge/core/error.hpp"
#include "romforge/nn/optim.hpp"

namespace romforge::latent {

namespace {

constexpr std::uint32_t kRegressorVersion = 1;

double mse(const Matrix& a, const Matrix& b) { return (a - b).squaredNorm() / static_cast<double>(a.size()); }

}  // namespace

void LatentMapConfig::validate() const {
    if (batch == 0) throw ValidationError("latent map batch size must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ValidationError("latent map learning rate must be positive");
    if (hidden_layers == 0 || hidden_width == 0) throw ValidationError("latent map needs at least one hidden layer");
}

void LatentRegressor::validate() const {
    if (net.empty()) throw ValidationError("latent regressor has no network");
    if (input_norm.size() != input_size()) throw ValidationError("input normalization width differs from the network");
    if (output_norm.size() != output_size())
        throw ValidationError("output normalization width differs from the network");
}

LatentTrainingResult train_latent_map(const Matrix& inputs, const Matrix& targets, const Matrix& validation_inputs,
                                      const Matrix& validation_targets, const LatentMapConfig& config) {
    config.validate();
    if (inputs.cols() != targets.cols()) throw ValidationError("input and target counts differ");
    if (inputs.cols() < 10) throw ValidationError("latent map needs at least 10 training pairs");
    if (validation_inputs.cols() == 0 || validation_inputs.cols() != validation_targets.cols())
        throw ValidationError("latent map needs matching, non-empty validation pairs");
    if (validation_inputs.rows() != inputs.rows() || validation_targets.rows() != targets.rows())
        throw ValidationError("validation pairs differ in width from the training pairs");

    LatentTrainingResult result;
    auto& reg = result.regressor;
    reg.input_norm = nn::MinMaxNormalization::fit(inputs);
    reg.output_norm = nn::MinMaxNormalization::fit(targets);

    std::vector<std::size_t> sizes{static_cast<std::size_t>(inputs.rows())};
    sizes.insert(sizes.end(), config.hidden_layers, config.hidden_width);
    sizes.push_back(static_cast<std::size_t>(targets.rows()));
    std::vector<nn::Activation> acts(config.hidden_layers, nn::Activation::Tanh);
    acts.push_back(nn::Activation::Identity);
    nn::DenseNetwork net = nn::init_network(sizes, acts, config.seed);
    reg.net = net;
    if (config.epochs == 0) {
        result.best_validation_loss = normalized_mse(reg, validation_inputs, validation_targets);
        return result;
    }

    const Matrix x = reg.input_norm.normalize(inputs);
    const Matrix y = reg.output_norm.normalize(targets);
    const Matrix xv = reg.input_norm.normalize(validation_inputs);
    const Matrix yv = reg.output_norm.normalize(validation_targets);

    const auto n = static_cast<std::size_t>(x.cols());
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    auto adam = nn::AdamState::for_network(net);
    result.best_validation_loss = std::numeric_limits<double>::infinity();

    Matrix xb, yb;
    nn::ForwardCache cache;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < n; begin += config.batch) {
            const auto width = static_cast<Eigen::Index>(std::min(config.batch, n - begin));
            xb.resize(x.rows(), width);
            yb.resize(y.rows(), width);
            for (Eigen::Index k = 0; k < width; ++k) {
                xb.col(k) = x.col(order[begin + static_cast<std::size_t>(k)]);
                yb.col(k) = y.col(order[begin + static_cast<std::size_t>(k)]);
            }
            const Matrix pred = nn::forward(net, xb, cache);
            const double loss = mse(pred, yb);
            if (!std::isfinite(loss)) throw TrainingAborted("non-finite latent map loss", epoch, batches);
            const auto back = nn::backward(net, cache, 2.0 * (pred - yb) / static_cast<double>(pred.size()));
            nn::adam_step(net, back.params, adam, config.learning_rate);
            sum += loss;
            ++batches;
        }
        const double val = mse(nn::forward(net, xv), yv);
        if (!std::isfinite(val)) throw TrainingAborted("non-finite latent map validation loss", epoch, batches);
        result.train_loss.push_back(sum / static_cast<double>(batches));
        result.validation_loss.push_back(val);
        if (val < result.best_validation_loss) {
            result.best_validation_loss = val;
            result.best_epoch = epoch;
            reg.net = net;
        }
    }
    return result;
}

LatentPrediction predict_latent(const LatentRegressor& reg, double t, std::span<const double> mu) {
    if (mu.size() + 1 != reg.input_size())
        throw ValidationError("latent map expects " + std::to_string(reg.input_size() - 1) + " parameters, got " +
                              std::to_string(mu.size()));
    Vector in(reg.input_size());
    in(0) = t;
    for (std::size_t p = 0; p < mu.size(); ++p) in(static_cast<Eigen::Index>(p + 1)) = mu[p];
    LatentPrediction out;
    out.extrapolated = reg.input_norm.outside(in);
    out.code = predict_latent(reg, Matrix(in)).col(0);
    return out;
}

Matrix predict_latent(const LatentRegressor& reg, const Matrix& inputs) {
    return reg.output_norm.denormalize(nn::forward(reg.net, reg.input_norm.normalize(inputs)));
}

double normalized_mse(const LatentRegressor& reg, const Matrix& inputs, const Matrix& targets) {
    return mse(nn::forward(reg.net, reg.input_norm.normalize(inputs)), reg.output_norm.normalize(targets));
}

void write_regressor(const LatentRegressor& reg, std::ostream& out) {
    reg.validate();
    io::BinaryWriter w(out);
    w.magic("LMAP");
    w.put(kRegressorVersion);
    reg.input_norm.write(out);
    reg.output_norm.write(out);
    nn::write_network(reg.net, out);
}

LatentRegressor read_regressor(std::istream& in) {
    io::BinaryReader r(in);
    r.expect_magic("LMAP");
    r.expect_version("LMAP", kRegressorVersion);
    LatentRegressor reg;
    reg.input_norm = nn::MinMaxNormalization::read(in);
    reg.output_norm = nn::MinMaxNormalization::read(in);
    reg.net = nn::read_network(in);
    try {
        reg.validate();
    } catch (const ValidationError& e) {
        throw RuntimeError(std::string("inconsistent LMAP checkpoint: ") + e.what());
    }
    return reg;
}

void save_regressor(const LatentRegressor& reg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot open '" + path.string() + "' for writing");
    write_regressor(reg, out);
}

LatentRegressor load_regressor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open '" + path.string() + "'");
    return read_regressor(in);
}

}  // namespace romforge::latent
