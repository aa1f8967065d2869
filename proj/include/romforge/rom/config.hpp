#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "romforge/btae/trainer.hpp"
#include "romforge/fom/solver.hpp"
#include "romforge/latent/latent_map.hpp"

namespace romforge::rom {

enum class Preset { Ex1, Ex2Elder, Ex4Quad, Custom };
enum class CompressorKind { Pod, BtAe };

std::string_view to_string(Preset p);
std::string_view to_string(CompressorKind k);
Preset parse_preset(std::string_view s);
CompressorKind parse_compressor(std::string_view s);

struct ParameterRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct ExperimentConfig {
    Preset preset = Preset::Ex1;
    std::size_t m_train = 8;
    std::size_t m_test = 2;
    /// One range per Rayleigh component: 1 (uniform) or 4 (quadrants BL, BR, TL, TR).
    std::vector<ParameterRange> ranges{{40.0, 80.0}};
    /// Grid, boundary conditions and stepping. `fom.ra` is filled per parameter point.
    fom::FomConfig fom;

    CompressorKind compressor = CompressorKind::BtAe;
    std::size_t pod_modes = 4;
    btae::BtAeTrainingConfig btae;
    latent::LatentMapConfig latent;

    /// Root seed. Every other seed (split, initialization, distortion, FOM noise) derives from it.
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "romforge-out";
    /// FOM runs in flight during `generate`; 0 picks the hardware concurrency.
    std::size_t workers = 0;

    std::size_t parameter_dim() const noexcept { return ranges.size(); }
    std::size_t code_size() const noexcept { return compressor == CompressorKind::Pod ? pod_modes : btae.latent_dim; }

    /// Pushes the root seed into the derived seeds. Call after changing `seed`.
    void derive_seeds();
    void validate() const;
};

/// Desk-scale defaults for the named preset.
ExperimentConfig preset_config(Preset preset);

/// INI-style text: sections [experiment], [parameters], [fom], [compressor], [latent_map].
/// Starts from the preset named in [experiment] and applies the remaining keys on top.
/// Unknown sections or keys raise ValidationError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Replaces the root seed with ROMFORGE_SEED when that variable is set. Returns true if applied.
bool apply_seed_override(ExperimentConfig& config);

/// Equispaced training points. P = 1: m_train points from lo to hi. P > 1: m_train must be
/// k^P and the result is the tensor grid of k points per axis (last axis varies fastest).
std::vector<std::vector<double>> training_parameters(const ExperimentConfig& config);

/// Test points at the midpoints of the training intervals, disjoint from the training grid.
/// From the tensor grid of midpoints, m_test points are picked evenly through the list.
std::vector<std::vector<double>> test_parameters(const ExperimentConfig& config);

/// FOM settings for one parameter point.
fom::FomConfig fom_for(const ExperimentConfig& config, const std::vector<double>& mu, std::uint64_t run_index);

}  // namespace romforge::rom
