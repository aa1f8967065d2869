#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "romforge/fom/grid.hpp"
#include "romforge/store/snapshot.hpp"

namespace romforge::fom {

struct FomConfig {
    GridSpec grid;
    BoundaryConditionSet bc;
    RayleighField ra;
    double t_final = 0.1;
    double cfl_constant = 0.5;
    double poisson_tol = 1e-10;
    double initial_temperature = 0.0;
    double source = 0.0;
    /// Amplitude of a seeded uniform perturbation added to the initial field (0 disables it).
    double initial_noise = 0.0;
    std::uint64_t rng_seed = 0;
    /// Emit every k-th accepted step (the initial and final states are always emitted).
    std::size_t snapshot_stride = 1;

    void validate() const;
};

struct FlowState {
    std::vector<double> temperature;  ///< cells, row-major
    std::vector<double> psi;          ///< nodes
    std::vector<double> ux;           ///< x-faces
    std::vector<double> uy;           ///< y-faces
    double t = 0.0;
};

struct SorSettings {
    double omega = 1.8;
    std::size_t max_iterations = 20000;
};

struct PoissonResult {
    std::size_t iterations = 0;
    double residual = 0.0;
};

/// Solves lap(psi) = -Ra dT/dx with psi = 0 on impermeable edges (zero tangential
/// pressure gradient on fixed-pressure edges). `psi` is used as the initial guess
/// and overwritten. Throws IterationLimitError carrying the final residual.
PoissonResult solve_streamfunction(const std::vector<double>& temperature, const std::vector<double>& ra_cells,
                                   const GridSpec& grid, const BoundaryConditionSet& bc, double tol,
                                   std::vector<double>& psi, const SorSettings& sor = {});

/// Convenience overload starting from psi = 0.
std::vector<double> solve_streamfunction(const std::vector<double>& temperature, const RayleighField& ra,
                                         const GridSpec& grid, const BoundaryConditionSet& bc, double tol);

/// Max-norm of lap(psi) + Ra dT/dx over the unknown nodes.
double streamfunction_residual(const std::vector<double>& temperature, const std::vector<double>& ra_cells,
                               const GridSpec& grid, const BoundaryConditionSet& bc, const std::vector<double>& psi);

/// ux = dpsi/dy on x-faces, uy = -dpsi/dx on y-faces.
void velocity_from_streamfunction(const std::vector<double>& psi, const GridSpec& grid, std::vector<double>& ux,
                                  std::vector<double>& uy);

/// Largest per-cell |div u|.
double max_divergence(const std::vector<double>& ux, const std::vector<double>& uy, const GridSpec& grid);

/// Largest |u| component over all faces.
double max_speed(const std::vector<double>& ux, const std::vector<double>& uy);

inline constexpr double kVelocityFloor = 1e-12;

/// dt = C * min(h / max(|u|, 1e-12), h^2 / 4).
double cfl_timestep(double max_velocity, double h, double cfl_constant);
double cfl_timestep(const std::vector<double>& ux, const std::vector<double>& uy, const GridSpec& grid,
                    double cfl_constant);

/// One explicit step: first-order upwind advection, 5-point diffusion, constant source.
/// Throws InstabilityError naming the first non-finite cell.
std::vector<double> advance_temperature(const FlowState& state, const GridSpec& grid, double dt,
                                        const BoundaryConditionSet& bc, double source);

/// Closed hull of initial, Dirichlet and inflow temperatures (the maximum-principle bounds).
std::pair<double, double> temperature_bounds(const FomConfig& config);

struct SimulationResult {
    std::vector<store::Snapshot> snapshots;
    std::size_t steps = 0;                ///< accepted time steps
    std::size_t poisson_iterations = 0;   ///< summed over all solves
};

/// Called after every accepted step (and once for the initial state with step = 0).
using StepObserver = std::function<void(std::size_t step, const FlowState&)>;

/// Runs from t = 0 to t_final with adaptive CFL steps; snapshots are tagged with the
/// Rayleigh values as mu. Solver errors are rethrown with the step index prepended.
SimulationResult run_simulation(const FomConfig& config, const StepObserver& observer = {});

}  // namespace romforge::fom
