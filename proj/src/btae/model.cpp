#include "romforge/btae/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "romforge/core/binary_io.hpp"
#include "romforge/core/error.hpp"

namespace romforge::btae {

namespace {

constexpr std::uint32_t kModelVersion = 1;

std::size_t shrink(std::size_t width, std::size_t dof, std::size_t floor) {
    if (dof >= 256) return width;
    const auto scaled = static_cast<std::size_t>(std::lround(static_cast<double>(width) * dof / 256.0));
    return std::max(scaled, floor);
}

}  // namespace

BtAeArchitecture BtAeArchitecture::for_dof(std::size_t dof, std::size_t latent_dim) {
    BtAeArchitecture arch;
    for (auto& w : arch.encoder_hidden) w = shrink(w, dof, latent_dim);
    return arch;
}

void BtAeArchitecture::validate() const {
    if (projector_width == 0) throw ValidationError("projector width must be positive");
    for (auto w : encoder_hidden)
        if (w == 0) throw ValidationError("encoder hidden widths must be positive");
    for (auto w : projector_hidden)
        if (w == 0) throw ValidationError("projector hidden widths must be positive");
}

void BtAeModel::validate() const {
    if (encoder.empty() || decoder.empty() || projector.empty()) throw ValidationError("incomplete BT-AE model");
    if (latent_dim() == 0) throw ValidationError("latent dimension must be at least 1");
    if (decoder.input_size() != latent_dim() || decoder.output_size() != dof())
        throw ValidationError("decoder does not mirror the encoder");
    if (projector.input_size() != latent_dim()) throw ValidationError("projector input must match the latent size");
    if (normalization.size() != dof()) throw ValidationError("normalization width differs from the encoder input");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be positive");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ValidationError("epsilon must be non-negative");
}

BtAeModel init_bt_ae(nn::MinMaxNormalization normalization, std::size_t latent_dim, const BtAeArchitecture& arch,
                     std::uint64_t seed) {
    arch.validate();
    const std::size_t dof = normalization.size();
    if (latent_dim == 0 || latent_dim > dof)
        throw ValidationError("latent size must be in [1, " + std::to_string(dof) + "]");

    std::vector<std::size_t> enc{dof};
    enc.insert(enc.end(), arch.encoder_hidden.begin(), arch.encoder_hidden.end());
    enc.push_back(latent_dim);
    std::vector<std::size_t> dec(enc.rbegin(), enc.rend());
    std::vector<std::size_t> proj{latent_dim};
    proj.insert(proj.end(), arch.projector_hidden.begin(), arch.projector_hidden.end());
    proj.push_back(arch.projector_width);

    auto acts = [](std::size_t layers) {
        std::vector<nn::Activation> a(layers, nn::Activation::Tanh);
        a.back() = nn::Activation::Identity;
        return a;
    };

    BtAeModel model;
    model.encoder = nn::init_network(enc, acts(enc.size() - 1), seed);
    model.decoder = nn::init_network(dec, acts(dec.size() - 1), seed + 1);
    model.projector = nn::init_network(proj, acts(proj.size() - 1), seed + 2);
    model.normalization = std::move(normalization);
    return model;
}

Matrix encode(const BtAeModel& model, const Matrix& fields) {
    return nn::forward(model.encoder, model.normalization.normalize(fields));
}

Vector encode(const BtAeModel& model, const Vector& field) { return encode(model, Matrix(field)).col(0); }

Matrix decode(const BtAeModel& model, const Matrix& codes) {
    if (static_cast<std::size_t>(codes.rows()) != model.latent_dim())
        throw ValidationError("latent code has width " + std::to_string(codes.rows()) + ", model expects " +
                              std::to_string(model.latent_dim()));
    return model.normalization.denormalize(nn::forward(model.decoder, codes));
}

Vector decode(const BtAeModel& model, const Vector& code) { return decode(model, Matrix(code)).col(0); }

void write_model(const BtAeModel& model, std::ostream& out) {
    model.validate();
    io::BinaryWriter w(out);
    w.magic("BTAE");
    w.put(kModelVersion);
    w.put(static_cast<std::uint64_t>(model.latent_dim()));
    model.normalization.write(out);
    nn::write_network(model.encoder, out);
    nn::write_network(model.decoder, out);
    nn::write_network(model.projector, out);
    w.put(model.lambda);
    w.put(model.epsilon);
}

BtAeModel read_model(std::istream& in) {
    io::BinaryReader r(in);
    r.expect_magic("BTAE");
    r.expect_version("BTAE", kModelVersion);
    const auto q = r.get<std::uint64_t>();
    BtAeModel model;
    model.normalization = nn::MinMaxNormalization::read(in);
    model.encoder = nn::read_network(in);
    model.decoder = nn::read_network(in);
    model.projector = nn::read_network(in);
    io::BinaryReader tail(in);
    model.lambda = tail.get<double>();
    model.epsilon = tail.get<double>();
    if (model.encoder.output_size() != q) throw RuntimeError("BTAE header latent size disagrees with the encoder");
    try {
        model.validate();
    } catch (const ValidationError& e) {
        throw RuntimeError(std::string("inconsistent BTAE checkpoint: ") + e.what());
    }
    return model;
}

void save_model(const BtAeModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot open '" + path.string() + "' for writing");
    write_model(model, out);
}

BtAeModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open '" + path.string() + "'");
    return read_model(in);
}

}  // namespace romforge::btae
