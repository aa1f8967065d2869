#include "romforge/fom/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "romforge/core/error.hpp"

namespace romforge::fom {

void FomConfig::validate() const {
    grid.validate();
    bc.validate();
    ra.validate();
    // t_final = 0 is allowed and yields only the initial state.
    if (!std::isfinite(t_final) || t_final < 0.0) throw ValidationError("t_final must be finite and >= 0");
    if (!(cfl_constant > 0.0 && cfl_constant <= 1.0)) throw ValidationError("cfl_constant must lie in (0, 1]");
    if (!(poisson_tol > 0.0)) throw ValidationError("poisson_tol must be > 0");
    if (!std::isfinite(initial_temperature) || !std::isfinite(source) || !std::isfinite(initial_noise) ||
        initial_noise < 0.0)
        throw ValidationError("initial temperature, source and noise must be finite (noise >= 0)");
    if (snapshot_stride == 0) throw ValidationError("snapshot_stride must be >= 1");
}

namespace {

/// Temperature seen at a boundary face for gradient purposes: Dirichlet value or the adjacent cell.
double boundary_face_value(const std::vector<double>& T, const GridSpec& g, const BoundaryConditionSet& bc, Edge e,
                           std::size_t k) {
    const auto ft = face_temperature(bc, g, e, k);
    if (ft.dirichlet) return ft.value;
    switch (e) {
        case Edge::Left: return T[g.cell(0, k)];
        case Edge::Right: return T[g.cell(g.nx - 1, k)];
        case Edge::Bottom: return T[g.cell(k, 0)];
        case Edge::Top: return T[g.cell(k, g.ny - 1)];
    }
    return 0.0;
}

/// Ra * dT/dx at node (i, j), averaged over the (one or two) adjacent cell rows.
double ra_dtdx(const std::vector<double>& T, const std::vector<double>& ra, const GridSpec& g,
               const BoundaryConditionSet& bc, std::size_t i, std::size_t j) {
    const double h = g.h();
    double sum = 0.0;
    int rows = 0;
    for (std::size_t r = (j == 0 ? 0 : j - 1); r <= std::min(j, g.ny - 1); ++r) {
        double left, right, dist, ra_row;
        if (i > 0 && i < g.nx) {
            left = T[g.cell(i - 1, r)];
            right = T[g.cell(i, r)];
            dist = h;
            ra_row = 0.5 * (ra[g.cell(i - 1, r)] + ra[g.cell(i, r)]);
        } else if (i == 0) {
            left = boundary_face_value(T, g, bc, Edge::Left, r);
            right = T[g.cell(0, r)];
            dist = 0.5 * h;
            ra_row = ra[g.cell(0, r)];
        } else {
            left = T[g.cell(g.nx - 1, r)];
            right = boundary_face_value(T, g, bc, Edge::Right, r);
            dist = 0.5 * h;
            ra_row = ra[g.cell(g.nx - 1, r)];
        }
        sum += ra_row * (right - left) / dist;
        ++rows;
    }
    return sum / rows;
}

/// Five-point stencil of one unknown node: psi_gs = (sum psi[nb] + c) / 4.
struct StencilRow {
    std::size_t node;
    std::array<std::size_t, 4> nb;
    double c;
};

struct PoissonSystem {
    std::array<std::vector<StencilRow>, 2> colors;  // red-black
    double h2 = 0.0;
};

bool is_fixed_node(const GridSpec& g, const BoundaryConditionSet& bc, std::size_t i, std::size_t j) {
    using enum FlowCondition;
    return (i == 0 && bc[Edge::Left].flow == Impermeable) || (i == g.nx && bc[Edge::Right].flow == Impermeable) ||
           (j == 0 && bc[Edge::Bottom].flow == Impermeable) || (j == g.ny && bc[Edge::Top].flow == Impermeable);
}

/// Ra * T on a vertical fixed-pressure edge at node row j: the tangential Darcy velocity.
double edge_buoyancy(const std::vector<double>& T, const std::vector<double>& ra, const GridSpec& g,
                     const BoundaryConditionSet& bc, Edge e, std::size_t j) {
    const std::size_t col = e == Edge::Left ? 0 : g.nx - 1;
    double sum = 0.0;
    int n = 0;
    for (std::size_t r = (j == 0 ? 0 : j - 1); r <= std::min(j, g.ny - 1); ++r) {
        sum += ra[g.cell(col, r)] * boundary_face_value(T, g, bc, e, r);
        ++n;
    }
    return sum / n;
}

PoissonSystem assemble(const std::vector<double>& T, const std::vector<double>& ra, const GridSpec& g,
                       const BoundaryConditionSet& bc) {
    PoissonSystem sys;
    const double h = g.h();
    sys.h2 = h * h;
    for (std::size_t j = 0; j <= g.ny; ++j) {
        for (std::size_t i = 0; i <= g.nx; ++i) {
            if (is_fixed_node(g, bc, i, j)) continue;
            StencilRow row;
            row.node = g.node(i, j);
            row.c = sys.h2 * ra_dtdx(T, ra, g, bc, i, j);  // -h^2 * rhs, rhs = -Ra dT/dx
            // Ghost nodes on fixed-pressure edges: dpsi/dx = -Ra T (vertical), dpsi/dy = 0 (horizontal).
            if (i > 0) {
                row.nb[0] = g.node(i - 1, j);
            } else {
                row.nb[0] = g.node(1, j);
                row.c += 2.0 * h * edge_buoyancy(T, ra, g, bc, Edge::Left, j);
            }
            if (i < g.nx) {
                row.nb[1] = g.node(i + 1, j);
            } else {
                row.nb[1] = g.node(g.nx - 1, j);
                row.c -= 2.0 * h * edge_buoyancy(T, ra, g, bc, Edge::Right, j);
            }
            row.nb[2] = j > 0 ? g.node(i, j - 1) : g.node(i, 1);
            row.nb[3] = j < g.ny ? g.node(i, j + 1) : g.node(i, g.ny - 1);
            sys.colors[(i + j) % 2].push_back(row);
        }
    }
    return sys;
}

double residual_norm(const PoissonSystem& sys, const std::vector<double>& psi) {
    double worst = 0.0;
    for (const auto& rows : sys.colors)
        for (const auto& r : rows) {
            const double lap = psi[r.nb[0]] + psi[r.nb[1]] + psi[r.nb[2]] + psi[r.nb[3]] + r.c - 4.0 * psi[r.node];
            worst = std::max(worst, std::abs(lap));
        }
    return worst / sys.h2;
}

}  // namespace

PoissonResult solve_streamfunction(const std::vector<double>& temperature, const std::vector<double>& ra_cells,
                                   const GridSpec& grid, const BoundaryConditionSet& bc, double tol,
                                   std::vector<double>& psi, const SorSettings& sor) {
    if (temperature.size() != grid.cells() || ra_cells.size() != grid.cells())
        throw ValidationError("temperature/Rayleigh field size does not match the grid");
    for (double v : temperature)
        if (!std::isfinite(v)) throw ValidationError("temperature must be finite for the streamfunction solve");
    psi.resize(grid.nodes(), 0.0);
    for (std::size_t j = 0; j <= grid.ny; ++j)
        for (std::size_t i = 0; i <= grid.nx; ++i)
            if (is_fixed_node(grid, bc, i, j)) psi[grid.node(i, j)] = 0.0;

    const PoissonSystem sys = assemble(temperature, ra_cells, grid, bc);
    PoissonResult result;
    result.residual = residual_norm(sys, psi);
    const double omega = sor.omega;
    while (result.residual > tol) {
        if (result.iterations >= sor.max_iterations) throw IterationLimitError(result.iterations, result.residual);
        for (const auto& rows : sys.colors)
            for (const auto& r : rows) {
                const double gs = 0.25 * (psi[r.nb[0]] + psi[r.nb[1]] + psi[r.nb[2]] + psi[r.nb[3]] + r.c);
                psi[r.node] += omega * (gs - psi[r.node]);
            }
        ++result.iterations;
        result.residual = residual_norm(sys, psi);
    }
    return result;
}

std::vector<double> solve_streamfunction(const std::vector<double>& temperature, const RayleighField& ra,
                                         const GridSpec& grid, const BoundaryConditionSet& bc, double tol) {
    std::vector<double> psi(grid.nodes(), 0.0);
    solve_streamfunction(temperature, ra.per_cell(grid), grid, bc, tol, psi);
    return psi;
}

double streamfunction_residual(const std::vector<double>& temperature, const std::vector<double>& ra_cells,
                               const GridSpec& grid, const BoundaryConditionSet& bc, const std::vector<double>& psi) {
    return residual_norm(assemble(temperature, ra_cells, grid, bc), psi);
}

namespace {

/// Rounds every entry onto one common binary lattice sized by max|psi|, leaving 3 bits of
/// headroom, so that differences and four-term sums of differences are exact.
std::vector<double> align_to_common_lattice(const std::vector<double>& psi) {
    double peak = 0.0;
    for (double v : psi) peak = std::max(peak, std::abs(v));
    if (peak == 0.0 || !std::isfinite(peak)) return psi;
    int exponent = 0;
    std::frexp(peak, &exponent);
    const int shift = 50 - exponent;
    std::vector<double> out(psi.size());
    for (std::size_t k = 0; k < psi.size(); ++k)
        out[k] = std::ldexp(std::nearbyint(std::ldexp(psi[k], shift)), -shift);
    return out;
}

}  // namespace

void velocity_from_streamfunction(const std::vector<double>& psi_in, const GridSpec& g, std::vector<double>& ux,
                                  std::vector<double>& uy) {
    // Exact face differences make the discrete divergence vanish identically whenever 1/h is a power of two.
    const std::vector<double> psi = align_to_common_lattice(psi_in);
    const double inv_h = 1.0 / g.h();
    ux.assign((g.nx + 1) * g.ny, 0.0);
    uy.assign(g.nx * (g.ny + 1), 0.0);
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i <= g.nx; ++i)
            ux[g.xface(i, j)] = (psi[g.node(i, j + 1)] - psi[g.node(i, j)]) * inv_h;
    for (std::size_t j = 0; j <= g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i)
            uy[g.yface(i, j)] = -(psi[g.node(i + 1, j)] - psi[g.node(i, j)]) * inv_h;
}

double max_divergence(const std::vector<double>& ux, const std::vector<double>& uy, const GridSpec& g) {
    const double inv_h = 1.0 / g.h();
    double worst = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const double div = (ux[g.xface(i + 1, j)] - ux[g.xface(i, j)]) * inv_h +
                               (uy[g.yface(i, j + 1)] - uy[g.yface(i, j)]) * inv_h;
            worst = std::max(worst, std::abs(div));
        }
    return worst;
}

double max_speed(const std::vector<double>& ux, const std::vector<double>& uy) {
    double m = 0.0;
    for (double v : ux) m = std::max(m, std::abs(v));
    for (double v : uy) m = std::max(m, std::abs(v));
    return m;
}

double cfl_timestep(double max_velocity, double h, double cfl_constant) {
    const double advective = h / std::max(max_velocity, kVelocityFloor);
    const double diffusive = 0.25 * h * h;
    return cfl_constant * std::min(advective, diffusive);
}

double cfl_timestep(const std::vector<double>& ux, const std::vector<double>& uy, const GridSpec& grid,
                    double cfl_constant) {
    return cfl_timestep(max_speed(ux, uy), grid.h(), cfl_constant);
}

namespace {

/// Outward total flux (advective + diffusive) through a boundary face of cell value `tp`,
/// given the outward normal velocity `un`.
double boundary_outflux(const BoundaryConditionSet& bc, const GridSpec& g, Edge e, std::size_t k, double tp, double un) {
    const double h = g.h();
    const auto ft = face_temperature(bc, g, e, k);
    if (ft.dirichlet) {
        const double adv = un * (un > 0.0 ? tp : ft.value);
        const double diff = -(ft.value - tp) * 2.0 / h;
        return adv + diff;
    }
    if (un < 0.0) return un * bc[e].inflow_temperature;  // inflow: carries T_in in
    return un * tp;                                      // outflow: zero conductive flux
}

}  // namespace

std::vector<double> advance_temperature(const FlowState& state, const GridSpec& g, double dt,
                                        const BoundaryConditionSet& bc, double source) {
    const auto& T = state.temperature;
    const auto& ux = state.ux;
    const auto& uy = state.uy;
    const double h = g.h();
    const double inv_h = 1.0 / h;
    // net inflow per cell, per unit face length
    std::vector<double> net(g.cells(), 0.0);

    for (std::size_t j = 0; j < g.ny; ++j) {
        for (std::size_t i = 1; i < g.nx; ++i) {
            const double tl = T[g.cell(i - 1, j)];
            const double tr = T[g.cell(i, j)];
            const double u = ux[g.xface(i, j)];
            const double flux = u * (u > 0.0 ? tl : tr) - (tr - tl) * inv_h;
            net[g.cell(i - 1, j)] -= flux;
            net[g.cell(i, j)] += flux;
        }
        net[g.cell(0, j)] -= boundary_outflux(bc, g, Edge::Left, j, T[g.cell(0, j)], -ux[g.xface(0, j)]);
        net[g.cell(g.nx - 1, j)] -=
            boundary_outflux(bc, g, Edge::Right, j, T[g.cell(g.nx - 1, j)], ux[g.xface(g.nx, j)]);
    }
    for (std::size_t i = 0; i < g.nx; ++i) {
        for (std::size_t j = 1; j < g.ny; ++j) {
            const double tb = T[g.cell(i, j - 1)];
            const double tt = T[g.cell(i, j)];
            const double v = uy[g.yface(i, j)];
            const double flux = v * (v > 0.0 ? tb : tt) - (tt - tb) * inv_h;
            net[g.cell(i, j - 1)] -= flux;
            net[g.cell(i, j)] += flux;
        }
        net[g.cell(i, 0)] -= boundary_outflux(bc, g, Edge::Bottom, i, T[g.cell(i, 0)], -uy[g.yface(i, 0)]);
        net[g.cell(i, g.ny - 1)] -=
            boundary_outflux(bc, g, Edge::Top, i, T[g.cell(i, g.ny - 1)], uy[g.yface(i, g.ny)]);
    }

    std::vector<double> next(g.cells());
    const double scale = dt * inv_h;
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i) {
            const std::size_t c = g.cell(i, j);
            next[c] = T[c] + scale * net[c] + dt * source;
            if (!std::isfinite(next[c])) throw InstabilityError(i, j);
        }
    return next;
}

std::pair<double, double> temperature_bounds(const FomConfig& config) {
    double lo = config.initial_temperature - config.initial_noise;
    double hi = config.initial_temperature + config.initial_noise;
    for (Edge e : kEdges) {
        const auto& ec = config.bc[e];
        auto include = [&](double v) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        };
        if (ec.dirichlet) include(*ec.dirichlet);
        for (const auto& s : ec.heated) include(s.temperature);
        if (ec.flow == FlowCondition::FixedPressure) include(ec.inflow_temperature);
    }
    return {lo, hi};
}

SimulationResult run_simulation(const FomConfig& config, const StepObserver& observer) {
    config.validate();
    const GridSpec& g = config.grid;
    const auto ra_cells = config.ra.per_cell(g);

    FlowState state;
    state.temperature.assign(g.cells(), config.initial_temperature);
    if (config.initial_noise > 0.0) {
        std::mt19937_64 rng(config.rng_seed);
        std::uniform_real_distribution<double> dist(-config.initial_noise, config.initial_noise);
        for (double& v : state.temperature) v += dist(rng);
    }
    state.psi.assign(g.nodes(), 0.0);

    SimulationResult result;
    std::size_t step = 0;
    auto solve_flow = [&] {
        try {
            const auto pr = solve_streamfunction(state.temperature, ra_cells, g, config.bc, config.poisson_tol, state.psi);
            result.poisson_iterations += pr.iterations;
        } catch (const RuntimeError& e) {
            throw SimulationError(step, e.what());
        }
        velocity_from_streamfunction(state.psi, g, state.ux, state.uy);
    };
    auto emit = [&] {
        result.snapshots.push_back(store::Snapshot{state.t, config.ra.values, state.temperature});
    };

    solve_flow();
    if (observer) observer(0, state);
    emit();

    while (state.t < config.t_final) {
        double dt = cfl_timestep(state.ux, state.uy, g, config.cfl_constant);
        const bool last = state.t + dt >= config.t_final;
        if (last) dt = config.t_final - state.t;
        ++step;
        try {
            state.temperature = advance_temperature(state, g, dt, config.bc, config.source);
        } catch (const RuntimeError& e) {
            throw SimulationError(step, e.what());
        }
        state.t = last ? config.t_final : state.t + dt;
        solve_flow();
        if (observer) observer(step, state);
        if (last || step % config.snapshot_stride == 0) emit();
    }
    result.steps = step;
    return result;
}

}  // namespace romforge::fom
