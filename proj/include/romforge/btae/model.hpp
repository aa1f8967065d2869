#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "romforge/btae/losses.hpp"
#include "romforge/nn/network.hpp"
#include "romforge/nn/normalization.hpp"

namespace romforge::btae {

using nn::Vector;

/// Hidden widths of the three networks. The decoder mirrors the encoder.
struct BtAeArchitecture {
    std::vector<std::size_t> encoder_hidden{256, 64};
    std::vector<std::size_t> projector_hidden{128};
    std::size_t projector_width = 128;

    /// Default widths, shrunk in proportion when the field has fewer than 256 DOFs
    /// (never below the latent size).
    static BtAeArchitecture for_dof(std::size_t dof, std::size_t latent_dim);
    void validate() const;
};

struct BtAeModel {
    nn::DenseNetwork encoder;    ///< N_h -> Q, tanh hidden, identity out
    nn::DenseNetwork decoder;    ///< Q -> N_h
    nn::DenseNetwork projector;  ///< Q -> D_proj
    nn::MinMaxNormalization normalization;  ///< per-DOF, fitted on the training fields
    double lambda = kDefaultLambda;
    double epsilon = 0.1;

    std::size_t latent_dim() const { return encoder.output_size(); }
    std::size_t dof() const { return encoder.input_size(); }

    /// Throws ValidationError unless the three networks and the normalization fit together.
    void validate() const;
    bool operator==(const BtAeModel&) const = default;
};

BtAeModel init_bt_ae(nn::MinMaxNormalization normalization, std::size_t latent_dim,
                     const BtAeArchitecture& arch, std::uint64_t seed);

/// Physical fields (one per column) -> latent codes.
Matrix encode(const BtAeModel& model, const Matrix& fields);
Vector encode(const BtAeModel& model, const Vector& field);

/// Latent codes -> physical fields (de-normalized).
Matrix decode(const BtAeModel& model, const Matrix& codes);
Vector decode(const BtAeModel& model, const Vector& code);

/// "BTAE" | u32 version=1 | u64 Q | normalization | DNET encoder | DNET decoder |
/// DNET projector | f64 lambda | f64 epsilon
void write_model(const BtAeModel& model, std::ostream& out);
BtAeModel read_model(std::istream& in);
void save_model(const BtAeModel& model, const std::filesystem::path& path);
BtAeModel load_model(const std::filesystem::path& path);

}  // namespace romforge::btae
