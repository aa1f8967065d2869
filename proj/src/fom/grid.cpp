#include "romforge/fom/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "romforge/core/error.hpp"

namespace romforge::fom {

void GridSpec::validate() const {
    if (nx < 4 || ny < 4) throw ValidationError("grid needs at least 4 cells per axis");
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
        throw ValidationError("domain extents must be positive and finite");
    const double hx = lx / static_cast<double>(nx);
    const double hy = ly / static_cast<double>(ny);
    if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy))
        throw ValidationError("cells must be square: lx/nx=" + std::to_string(hx) + " ly/ny=" + std::to_string(hy));
}

void BoundaryConditionSet::validate() const {
    bool any_impermeable = false;
    for (Edge e : kEdges) {
        const auto& ec = (*this)[e];
        if (ec.dirichlet && !std::isfinite(*ec.dirichlet)) throw ValidationError("non-finite Dirichlet value");
        if (ec.flow == FlowCondition::Impermeable) any_impermeable = true;
        auto segs = ec.heated;
        std::sort(segs.begin(), segs.end(), [](const auto& a, const auto& b) { return a.begin < b.begin; });
        for (std::size_t k = 0; k < segs.size(); ++k) {
            const auto& s = segs[k];
            if (!(s.begin >= 0.0 && s.end <= 1.0 && s.begin < s.end))
                throw ValidationError("heated segment must satisfy 0 <= begin < end <= 1");
            if (!std::isfinite(s.temperature)) throw ValidationError("non-finite heated-segment temperature");
            if (k > 0 && segs[k - 1].end > s.begin) throw ValidationError("heated segments overlap");
        }
    }
    // With only fixed-pressure edges the streamfunction is defined up to a constant.
    if (!any_impermeable) throw ValidationError("at least one edge must be impermeable");
}

std::size_t edge_faces(const GridSpec& grid, Edge edge) {
    return (edge == Edge::Left || edge == Edge::Right) ? grid.ny : grid.nx;
}

FaceTemperature face_temperature(const BoundaryConditionSet& bc, const GridSpec& grid, Edge edge, std::size_t k) {
    const auto& ec = bc[edge];
    const double s = (static_cast<double>(k) + 0.5) / static_cast<double>(edge_faces(grid, edge));
    for (const auto& seg : ec.heated)
        if (s >= seg.begin && s <= seg.end) return {true, seg.temperature};
    if (ec.dirichlet) return {true, *ec.dirichlet};
    return {false, 0.0};
}

RayleighField RayleighField::from_mu(const std::vector<double>& mu) {
    RayleighField f;
    if (mu.size() == 1) {
        f.mode = RayleighMode::Uniform;
    } else if (mu.size() == 4) {
        f.mode = RayleighMode::FourSubdomain;
    } else {
        throw ValidationError("parameter vector must have 1 or 4 Rayleigh values, got " + std::to_string(mu.size()));
    }
    f.values = mu;
    return f;
}

void RayleighField::validate() const {
    const std::size_t expected = mode == RayleighMode::Uniform ? 1 : 4;
    if (values.size() != expected)
        throw ValidationError("Rayleigh field expects " + std::to_string(expected) + " values, got " +
                              std::to_string(values.size()));
    for (double v : values)
        if (!std::isfinite(v) || v < 0.0) throw ValidationError("Rayleigh numbers must be finite and >= 0");
}

std::vector<double> RayleighField::per_cell(const GridSpec& grid) const {
    std::vector<double> out(grid.cells(), values.front());
    if (mode == RayleighMode::Uniform) return out;
    for (std::size_t j = 0; j < grid.ny; ++j) {
        const bool top = grid.yc(j) > 0.5 * grid.ly;
        for (std::size_t i = 0; i < grid.nx; ++i) {
            const bool right = grid.xc(i) > 0.5 * grid.lx;
            out[grid.cell(i, j)] = values[(top ? 2 : 0) + (right ? 1 : 0)];
        }
    }
    return out;
}

}  // namespace romforge::fom
