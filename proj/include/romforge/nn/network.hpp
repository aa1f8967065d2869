#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace romforge::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Serialized as u8 in DNET blocks; keep values stable.
enum class Activation : std::uint8_t { Identity = 0, Tanh = 1, Relu = 2 };

struct DenseLayer {
    Matrix weight;  ///< fan_out x fan_in
    Vector bias;    ///< fan_out
    Activation activation = Activation::Identity;

    std::size_t fan_in() const noexcept { return static_cast<std::size_t>(weight.cols()); }
    std::size_t fan_out() const noexcept { return static_cast<std::size_t>(weight.rows()); }
};

/// Chain of affine + activation layers. Batches are column-major: one sample per column.
class DenseNetwork {
public:
    DenseNetwork() = default;
    /// Throws ValidationError if the layer dimensions do not chain.
    explicit DenseNetwork(std::vector<DenseLayer> layers);

    std::size_t input_size() const;
    std::size_t output_size() const;
    std::size_t layer_count() const noexcept { return layers_.size(); }
    std::size_t parameter_count() const;
    bool empty() const noexcept { return layers_.empty(); }

    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    DenseLayer& layer(std::size_t l) { return layers_.at(l); }
    const DenseLayer& layer(std::size_t l) const { return layers_.at(l); }

    bool all_finite() const;

    /// Bitwise equality of all parameters and activations.
    bool operator==(const DenseNetwork& other) const;

private:
    std::vector<DenseLayer> layers_;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
/// `sizes` has one more entry than `activations`.
DenseNetwork init_network(std::span<const std::size_t> sizes, std::span<const Activation> activations,
                          std::uint64_t seed);

/// Per-layer inputs and post-activation outputs of one forward pass.
struct ForwardCache {
    std::vector<Matrix> inputs;
    std::vector<Matrix> outputs;
};

Matrix forward(const DenseNetwork& net, const Matrix& input);
Matrix forward(const DenseNetwork& net, const Matrix& input, ForwardCache& cache);

struct LayerGradients {
    Matrix weight;
    Vector bias;
};

struct Gradients {
    std::vector<LayerGradients> layers;

    static Gradients zeros_like(const DenseNetwork& net);
    Gradients& operator+=(const Gradients& other);
    bool all_finite() const;
    double max_abs() const;
};

struct BackwardResult {
    Gradients params;
    Matrix input_grad;
};

/// Reverse-mode gradients of a scalar loss given dLoss/dOutput for the cached batch.
BackwardResult backward(const DenseNetwork& net, const ForwardCache& cache, const Matrix& output_grad);

/// DNET block: "DNET" | u32 version=1 | u64 layer count |
/// per layer: u64 fan_in | u64 fan_out | u8 activation | W row-major f64 | b f64
void write_network(const DenseNetwork& net, std::ostream& out);
DenseNetwork read_network(std::istream& in);

void save_network(const DenseNetwork& net, const std::filesystem::path& path);
DenseNetwork load_network(const std::filesystem::path& path);

}  // namespace romforge::nn
