#include "romforge/nn/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

#include "romforge/core/binary_io.hpp"
#include "romforge/core/error.hpp"

namespace romforge::nn {

namespace {

constexpr char kMagic[] = "DNET";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kMaxLayerBytes = 1ull << 34;

void apply_activation(Matrix& z, Activation a) {
    switch (a) {
        case Activation::Identity: break;
        case Activation::Tanh: z = z.unaryExpr([](double v) { return std::tanh(v); }); break;
        case Activation::Relu: z = z.cwiseMax(0.0); break;
    }
}

/// d(activation)/dz expressed through the activation output y.
Matrix activation_derivative(const Matrix& y, Activation a) {
    switch (a) {
        case Activation::Identity: return Matrix::Ones(y.rows(), y.cols());
        case Activation::Tanh: return (1.0 - y.array().square()).matrix();
        case Activation::Relu: return (y.array() > 0.0).cast<double>().matrix();
    }
    return Matrix::Ones(y.rows(), y.cols());
}

bool bitwise_equal(const double* a, const double* b, std::size_t n) {
    return n == 0 || std::memcmp(a, b, n * sizeof(double)) == 0;
}

}  // namespace

DenseNetwork::DenseNetwork(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ValidationError("network needs at least one layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.fan_in() == 0 || layer.fan_out() == 0) throw ValidationError("layer with zero width");
        if (static_cast<std::size_t>(layer.bias.size()) != layer.fan_out())
            throw ValidationError("bias length does not match fan_out in layer " + std::to_string(l));
        if (l > 0 && layers_[l - 1].fan_out() != layer.fan_in())
            throw ValidationError("layer " + std::to_string(l) + " does not chain with its predecessor");
    }
}

std::size_t DenseNetwork::input_size() const { return layers_.empty() ? 0 : layers_.front().fan_in(); }
std::size_t DenseNetwork::output_size() const { return layers_.empty() ? 0 : layers_.back().fan_out(); }

std::size_t DenseNetwork::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

bool DenseNetwork::all_finite() const {
    for (const auto& l : layers_)
        if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    return true;
}

bool DenseNetwork::operator==(const DenseNetwork& other) const {
    if (layers_.size() != other.layers_.size()) return false;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& a = layers_[l];
        const auto& b = other.layers_[l];
        if (a.activation != b.activation || a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() ||
            !bitwise_equal(a.weight.data(), b.weight.data(), static_cast<std::size_t>(a.weight.size())) ||
            !bitwise_equal(a.bias.data(), b.bias.data(), static_cast<std::size_t>(a.bias.size())))
            return false;
    }
    return true;
}

DenseNetwork init_network(std::span<const std::size_t> sizes, std::span<const Activation> activations,
                          std::uint64_t seed) {
    if (sizes.size() < 2) throw ValidationError("layer size list needs at least input and output widths");
    if (activations.size() != sizes.size() - 1)
        throw ValidationError("need one activation per layer (" + std::to_string(sizes.size() - 1) + ")");
    std::mt19937_64 rng(seed);
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t fan_in = sizes[l];
        const std::size_t fan_out = sizes[l + 1];
        if (fan_in == 0 || fan_out == 0) throw ValidationError("layer widths must be positive");
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        DenseLayer layer;
        layer.weight.resize(static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in));
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
        layer.bias = Vector::Zero(static_cast<Eigen::Index>(fan_out));
        layer.activation = activations[l];
        layers.push_back(std::move(layer));
    }
    return DenseNetwork(std::move(layers));
}

Matrix forward(const DenseNetwork& net, const Matrix& input) {
    if (static_cast<std::size_t>(input.rows()) != net.input_size())
        throw ValidationError("input width " + std::to_string(input.rows()) + " does not match network fan-in " +
                              std::to_string(net.input_size()));
    Matrix x = input;
    for (const auto& layer : net.layers()) {
        Matrix z = layer.weight * x;
        z.colwise() += layer.bias;
        apply_activation(z, layer.activation);
        x = std::move(z);
    }
    return x;
}

Matrix forward(const DenseNetwork& net, const Matrix& input, ForwardCache& cache) {
    if (static_cast<std::size_t>(input.rows()) != net.input_size())
        throw ValidationError("input width " + std::to_string(input.rows()) + " does not match network fan-in " +
                              std::to_string(net.input_size()));
    cache.inputs.resize(net.layer_count());
    cache.outputs.resize(net.layer_count());
    const Matrix* x = &input;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const auto& layer = net.layer(l);
        cache.inputs[l] = *x;
        Matrix z = layer.weight * *x;
        z.colwise() += layer.bias;
        apply_activation(z, layer.activation);
        cache.outputs[l] = std::move(z);
        x = &cache.outputs[l];
    }
    return cache.outputs.back();
}

Gradients Gradients::zeros_like(const DenseNetwork& net) {
    Gradients g;
    for (const auto& l : net.layers())
        g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
    if (other.layers.size() != layers.size()) throw ValidationError("gradient structures differ");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].weight += other.layers[l].weight;
        layers[l].bias += other.layers[l].bias;
    }
    return *this;
}

bool Gradients::all_finite() const {
    for (const auto& l : layers)
        if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    return true;
}

double Gradients::max_abs() const {
    double m = 0.0;
    for (const auto& l : layers) {
        if (l.weight.size() > 0) m = std::max(m, l.weight.cwiseAbs().maxCoeff());
        if (l.bias.size() > 0) m = std::max(m, l.bias.cwiseAbs().maxCoeff());
    }
    return m;
}

BackwardResult backward(const DenseNetwork& net, const ForwardCache& cache, const Matrix& output_grad) {
    if (cache.outputs.size() != net.layer_count() || cache.inputs.size() != net.layer_count())
        throw ValidationError("forward cache does not belong to this network");
    const Matrix& out = cache.outputs.back();
    if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols())
        throw ValidationError("output gradient shape does not match the cached forward pass");

    BackwardResult result;
    result.params.layers.resize(net.layer_count());
    Matrix upstream = output_grad;
    for (std::size_t k = net.layer_count(); k-- > 0;) {
        const auto& layer = net.layer(k);
        Matrix dz = (upstream.array() * activation_derivative(cache.outputs[k], layer.activation).array()).matrix();
        result.params.layers[k].weight = dz * cache.inputs[k].transpose();
        result.params.layers[k].bias = dz.rowwise().sum();
        upstream = layer.weight.transpose() * dz;
    }
    result.input_grad = std::move(upstream);
    return result;
}

void write_network(const DenseNetwork& net, std::ostream& out) {
    io::BinaryWriter w(out);
    w.magic(kMagic);
    w.put(kVersion);
    w.put(static_cast<std::uint64_t>(net.layer_count()));
    for (const auto& layer : net.layers()) {
        w.put(static_cast<std::uint64_t>(layer.fan_in()));
        w.put(static_cast<std::uint64_t>(layer.fan_out()));
        w.put(static_cast<std::uint8_t>(layer.activation));
        // Eigen stores column-major; the format is row-major.
        const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = layer.weight;
        w.put_f64s({rm.data(), static_cast<std::size_t>(rm.size())});
        w.put_f64s({layer.bias.data(), static_cast<std::size_t>(layer.bias.size())});
    }
}

DenseNetwork read_network(std::istream& in) {
    io::BinaryReader r(in);
    r.expect_magic(kMagic);
    r.expect_version(kMagic, kVersion);
    const std::uint64_t at_count = r.offset();
    const auto count = r.get<std::uint64_t>();
    if (count == 0 || count > 4096) throw ParseError("implausible layer count " + std::to_string(count), at_count);
    std::vector<DenseLayer> layers;
    for (std::uint64_t l = 0; l < count; ++l) {
        const std::uint64_t at = r.offset();
        const auto fan_in = r.get<std::uint64_t>();
        const auto fan_out = r.get<std::uint64_t>();
        if (fan_in == 0 || fan_out == 0) throw ParseError("layer with zero width", at);
        r.require_plausible(fan_in, 8 * fan_out, kMaxLayerBytes, "layer weight");
        const std::uint64_t at_act = r.offset();
        const auto act = r.get<std::uint8_t>();
        if (act > static_cast<std::uint8_t>(Activation::Relu))
            throw ParseError("unknown activation code " + std::to_string(act), at_act);
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
            static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in));
        r.get_f64s({rm.data(), static_cast<std::size_t>(rm.size())});
        DenseLayer layer;
        layer.weight = rm;
        layer.bias.resize(static_cast<Eigen::Index>(fan_out));
        r.get_f64s({layer.bias.data(), static_cast<std::size_t>(layer.bias.size())});
        layer.activation = static_cast<Activation>(act);
        if (!layers.empty() && layers.back().fan_out() != layer.fan_in())
            throw ParseError("layer " + std::to_string(l) + " does not chain", at);
        layers.push_back(std::move(layer));
    }
    return DenseNetwork(std::move(layers));
}

void save_network(const DenseNetwork& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot open '" + path.string() + "' for writing");
    write_network(net, out);
}

DenseNetwork load_network(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open '" + path.string() + "'");
    return read_network(in);
}

}  // namespace romforge::nn
