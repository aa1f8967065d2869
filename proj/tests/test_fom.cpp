#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "romforge/core/error.hpp"
#include "romforge/fom/solver.hpp"

using namespace romforge;
using namespace romforge::fom;

namespace {

FomConfig side_heated(std::size_t n, double ra) {
    FomConfig c;
    c.grid = {n, n, 1.0, 1.0};
    c.bc[Edge::Left].dirichlet = 1.0;
    c.bc[Edge::Right].dirichlet = 0.0;
    c.ra = RayleighField::from_mu({ra});
    return c;
}

FomConfig elder_like(double ra) {
    FomConfig c;
    c.grid = {32, 16, 2.0, 1.0};
    c.bc[Edge::Bottom].heated = {{0.25, 0.75, 1.0}};
    c.bc[Edge::Top].dirichlet = 0.0;
    c.ra = RayleighField::from_mu({ra});
    c.t_final = 0.05;
    return c;
}

}  // namespace

TEST_CASE("streamfunction solve matches a dense direct solve") {
    // T = x gives dT/dx = 1, so the discrete problem is lap(psi) = -Ra with psi = 0 on the walls.
    const GridSpec grid{8, 8, 1.0, 1.0};
    BoundaryConditionSet bc;
    std::vector<double> temperature(grid.cells());
    for (std::size_t j = 0; j < grid.ny; ++j)
        for (std::size_t i = 0; i < grid.nx; ++i) temperature[grid.cell(i, j)] = grid.xc(i);
    const double ra = 10.0;
    const auto psi = solve_streamfunction(temperature, RayleighField::from_mu({ra}), grid, bc, 1e-12);

    const int m = 7;
    const double h = grid.h();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m * m, m * m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Constant(m * m, -ra * h * h);
    auto id = [&](int i, int j) { return (j - 1) * m + (i - 1); };
    for (int j = 1; j <= m; ++j)
        for (int i = 1; i <= m; ++i) {
            a(id(i, j), id(i, j)) = -4.0;
            if (i > 1) a(id(i, j), id(i - 1, j)) = 1.0;
            if (i < m) a(id(i, j), id(i + 1, j)) = 1.0;
            if (j > 1) a(id(i, j), id(i, j - 1)) = 1.0;
            if (j < m) a(id(i, j), id(i, j + 1)) = 1.0;
        }
    const Eigen::VectorXd expected = a.fullPivLu().solve(rhs);

    double worst = 0.0;
    for (int j = 1; j <= m; ++j)
        for (int i = 1; i <= m; ++i)
            worst = std::max(worst, std::abs(psi[grid.node(i, j)] - expected(id(i, j))));
    CHECK(worst <= 1e-8);
    for (std::size_t i = 0; i <= grid.nx; ++i) {
        CHECK(psi[grid.node(i, 0)] == 0.0);
        CHECK(psi[grid.node(i, grid.ny)] == 0.0);
    }
}

TEST_CASE("poisson solve reports exhaustion with its residual") {
    const GridSpec grid{16, 16, 1.0, 1.0};
    BoundaryConditionSet bc;
    std::vector<double> temperature(grid.cells());
    for (std::size_t k = 0; k < temperature.size(); ++k) temperature[k] = std::sin(0.37 * static_cast<double>(k));
    std::vector<double> psi(grid.nodes(), 0.0);
    const auto ra = RayleighField::from_mu({50.0}).per_cell(grid);
    try {
        solve_streamfunction(temperature, ra, grid, bc, 1e-14, psi, SorSettings{1.8, 3});
        FAIL("expected IterationLimitError");
    } catch (const IterationLimitError& e) {
        CHECK(e.iterations() == 3);
        CHECK(e.residual() > 1e-14);
    }
}

TEST_CASE("velocities of any streamfunction are discretely divergence free") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (const GridSpec grid : {GridSpec{16, 16, 1.0, 1.0}, GridSpec{32, 16, 2.0, 1.0}}) {
        std::vector<double> psi(grid.nodes());
        for (auto& v : psi) v = u(rng);
        std::vector<double> ux, uy;
        velocity_from_streamfunction(psi, grid, ux, uy);
        CHECK(max_divergence(ux, uy, grid) <= 1e-13);
    }
}

TEST_CASE("CFL step takes the tighter of the advective and diffusive bounds") {
    const double h = 1.0 / 32.0;
    CHECK(cfl_timestep(0.0, h, 0.5) == doctest::Approx(0.5 * h * h / 4.0).epsilon(1e-15));
    CHECK(cfl_timestep(1000.0, h, 0.5) == doctest::Approx(0.5 * h / 1000.0).epsilon(1e-15));
    // Below the velocity floor the advective bound is effectively infinite.
    CHECK(cfl_timestep(1e-20, h, 1.0) == doctest::Approx(h * h / 4.0).epsilon(1e-15));
}

TEST_CASE("pure conduction relaxes to the linear profile") {
    auto c = side_heated(16, 0.0);
    c.t_final = 1.5;
    c.snapshot_stride = 1000000;
    const auto r = run_simulation(c);
    const auto& last = r.snapshots.back();
    CHECK(last.t == c.t_final);
    double worst = 0.0;
    for (std::size_t j = 0; j < c.grid.ny; ++j)
        for (std::size_t i = 0; i < c.grid.nx; ++i)
            worst = std::max(worst, std::abs(last.field[c.grid.cell(i, j)] - (1.0 - c.grid.xc(i))));
    CHECK(worst <= 1e-5);
}

TEST_CASE("convecting runs respect the maximum principle and stay divergence free") {
    for (auto c : {side_heated(16, 80.0), elder_like(400.0)}) {
        const auto [lo, hi] = temperature_bounds(c);
        double tmin = 1e300, tmax = -1e300, div = 0.0;
        run_simulation(c, [&](std::size_t, const FlowState& s) {
            for (double v : s.temperature) tmin = std::min(tmin, v), tmax = std::max(tmax, v);
            div = std::max(div, max_divergence(s.ux, s.uy, c.grid));
        });
        CHECK(tmin >= lo - 1e-10);
        CHECK(tmax <= hi + 1e-10);
        CHECK(div <= 1e-13);
    }
}

TEST_CASE("stronger buoyancy needs more steps once advection limits the step") {
    const auto slow = run_simulation(elder_like(350.0));
    const auto fast = run_simulation(elder_like(450.0));
    CHECK(fast.steps > slow.steps);
}

TEST_CASE("snapshots start at zero, land on the final time and follow the stride") {
    auto c = side_heated(8, 60.0);
    c.t_final = 0.02;
    c.snapshot_stride = 7;
    const auto r = run_simulation(c);
    REQUIRE(r.snapshots.size() >= 2);
    CHECK(r.snapshots.front().t == 0.0);
    CHECK(r.snapshots.back().t == c.t_final);
    const std::size_t interior = (r.steps - 1) / 7;  // emitted strictly before the last step
    CHECK(r.snapshots.size() == interior + 2);
    for (std::size_t k = 1; k < r.snapshots.size(); ++k) CHECK(r.snapshots[k].t > r.snapshots[k - 1].t);
    CHECK(r.snapshots.front().mu == std::vector<double>{60.0});
}

TEST_CASE("identical configurations give bitwise identical trajectories") {
    auto c = side_heated(8, 70.0);
    c.t_final = 0.02;
    c.initial_noise = 0.01;
    c.rng_seed = 5;
    const auto a = run_simulation(c);
    const auto b = run_simulation(c);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) CHECK(a.snapshots[k] == b.snapshots[k]);
    c.rng_seed = 6;
    CHECK_FALSE(run_simulation(c).snapshots.back() == a.snapshots.back());
}

TEST_CASE("heated segments resolve per boundary face") {
    const GridSpec grid{16, 8, 2.0, 1.0};
    BoundaryConditionSet bc;
    bc[Edge::Bottom].heated = {{0.25, 0.75, 1.0}};
    bc[Edge::Top].dirichlet = 0.0;
    CHECK(edge_faces(grid, Edge::Bottom) == 16);
    CHECK(edge_faces(grid, Edge::Left) == 8);
    CHECK_FALSE(face_temperature(bc, grid, Edge::Bottom, 0).dirichlet);
    CHECK(face_temperature(bc, grid, Edge::Bottom, 4).dirichlet);
    CHECK(face_temperature(bc, grid, Edge::Bottom, 11).value == 1.0);
    CHECK_FALSE(face_temperature(bc, grid, Edge::Bottom, 12).dirichlet);
    CHECK(face_temperature(bc, grid, Edge::Top, 3).dirichlet);
    CHECK(face_temperature(bc, grid, Edge::Top, 3).value == 0.0);
}

TEST_CASE("four-subdomain Rayleigh field maps quadrants") {
    const GridSpec grid{4, 4, 1.0, 1.0};
    const auto ra = RayleighField::from_mu({1.0, 2.0, 3.0, 4.0}).per_cell(grid);
    CHECK(ra[grid.cell(0, 0)] == 1.0);
    CHECK(ra[grid.cell(3, 0)] == 2.0);
    CHECK(ra[grid.cell(0, 3)] == 3.0);
    CHECK(ra[grid.cell(3, 3)] == 4.0);
    CHECK_THROWS_AS(RayleighField::from_mu({1.0, 2.0}), ValidationError);
}

TEST_CASE("invalid configurations are rejected") {
    auto c = side_heated(8, -1.0);
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = side_heated(8, 10.0);
    c.grid.nx = 2;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = side_heated(8, 10.0);
    c.bc[Edge::Bottom].heated = {{0.5, 0.8, 1.0}, {0.6, 0.9, 1.0}};
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = side_heated(8, 10.0);
    c.cfl_constant = 0.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("non-finite temperatures abort the step with the offending cell") {
    auto c = side_heated(8, 10.0);
    FlowState s;
    s.temperature.assign(c.grid.cells(), 0.0);
    s.temperature[c.grid.cell(3, 2)] = std::nan("");
    s.ux.assign((c.grid.nx + 1) * c.grid.ny, 0.0);
    s.uy.assign(c.grid.nx * (c.grid.ny + 1), 0.0);
    try {
        advance_temperature(s, c.grid, 1e-4, c.bc, 0.0);
        FAIL("expected InstabilityError");
    } catch (const InstabilityError& e) {
        CHECK(e.cell_j() <= 3);
    }
}
