#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "romforge/btae/model.hpp"
#include "romforge/latent/latent_map.hpp"
#include "romforge/pod/pod.hpp"
#include "romforge/rom/config.hpp"
#include "romforge/rom/metrics.hpp"
#include "romforge/store/snapshot.hpp"

namespace romforge::rom {

using nn::Matrix;
using nn::Vector;

/// <root>/archives, <root>/models, <root>/reports
struct OutputLayout {
    std::filesystem::path root;

    std::filesystem::path archives() const { return root / "archives"; }
    std::filesystem::path models() const { return root / "models"; }
    std::filesystem::path reports() const { return root / "reports"; }
    std::filesystem::path manifest() const { return archives() / "manifest.json"; }
};

enum class Role { Train, Test };

struct ManifestEntry {
    Role role = Role::Train;
    std::size_t index = 0;
    std::vector<double> mu;
    std::string file;  ///< relative to the archives directory
    bool ok = false;
    std::string error;
    double fom_seconds = 0.0;
    std::size_t steps = 0;
    std::size_t snapshots = 0;
};

struct Manifest {
    std::string preset;
    std::size_t parameter_dim = 0;
    std::size_t dof = 0;
    std::string test_placement = "interval midpoints of the training grid";
    std::vector<ManifestEntry> entries;

    std::vector<const ManifestEntry*> with_role(Role role) const;
    std::size_t failures() const;
};

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

/// Runs the FOM for every training and test parameter point (up to config.workers in
/// parallel), writes one archive per point plus the manifest. Failed runs are recorded in
/// the manifest and do not stop the others.
Manifest cmd_generate(const ExperimentConfig& config);

struct TrainSummary {
    std::size_t train_snapshots = 0;
    std::size_t validation_snapshots = 0;
    std::size_t code_size = 0;
    std::optional<btae::BtAeHistory> btae_history;
    double pod_train_mse = 0.0;  ///< POD only: reconstruction MSE on the training snapshots
    latent::LatentTrainingResult latent;  ///< regressor plus its curves
};

/// Loads the training archives, splits off 10% for validation, trains the compressor and the
/// latent map, and writes checkpoints, model.json and loss-curve CSVs.
TrainSummary cmd_train(const ExperimentConfig& config);

/// Trained compressor plus latent map, as loaded from a models directory.
struct RomModel {
    CompressorKind kind = CompressorKind::Pod;
    std::size_t parameter_dim = 0;
    std::optional<pod::ReducedBasis> basis;
    std::optional<btae::BtAeModel> autoencoder;
    latent::LatentRegressor map;

    std::size_t dof() const;
    std::size_t code_size() const;
    /// Fields (one per column) -> codes: POD coefficients or latent vectors.
    Matrix compress(const Matrix& fields) const;
    /// Codes -> physical fields.
    Matrix expand(const Matrix& codes) const;
};

/// Throws RuntimeError when a checkpoint is missing or the regressor output width differs
/// from the compressor's code size.
RomModel load_rom_model(const std::filesystem::path& models_dir);

struct Prediction {
    Vector field;
    bool extrapolated = false;
};

Prediction rom_predict(const RomModel& model, double t, const std::vector<double>& mu);
/// Batch form over (1 + P) x n inputs.
Matrix rom_predict(const RomModel& model, const Matrix& inputs);

/// Single query written as a one-snapshot archive to `out`.
Prediction cmd_predict(const ExperimentConfig& config, double t, const std::vector<double>& mu,
                       const std::filesystem::path& out);

struct MuEvaluation {
    std::size_t index = 0;
    std::vector<double> mu;
    std::vector<double> times;
    std::vector<double> snapshot_mse;
    std::vector<DiffStats> diff;
    double mse = 0.0;
    double fom_seconds = 0.0;
    double rom_query_seconds = 0.0;
    double speedup = 0.0;
};

struct EvaluationReport {
    std::vector<MuEvaluation> per_mu;
    double mean_mse = 0.0;
};

/// Scores the trained model on every test archive and writes the report files.
EvaluationReport cmd_evaluate(const ExperimentConfig& config);

/// Writes (t, mu, code) rows for every snapshot in `archives` (all training archives when
/// empty). Returns the number of rows.
std::size_t cmd_export_latents(const ExperimentConfig& config, const std::vector<std::filesystem::path>& archives,
                               const std::filesystem::path& out);

}  // namespace romforge::rom
