#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace romforge::fom {

/// Uniform square-cell grid over [0, lx] x [0, ly]. Temperature lives on cell
/// centers (row-major, x fastest), the streamfunction on nodes, velocities on faces.
struct GridSpec {
    std::size_t nx = 32;
    std::size_t ny = 32;
    double lx = 1.0;
    double ly = 1.0;

    double h() const noexcept { return lx / static_cast<double>(nx); }
    std::size_t cells() const noexcept { return nx * ny; }
    std::size_t nodes() const noexcept { return (nx + 1) * (ny + 1); }

    std::size_t cell(std::size_t i, std::size_t j) const noexcept { return j * nx + i; }
    std::size_t node(std::size_t i, std::size_t j) const noexcept { return j * (nx + 1) + i; }
    /// x-face (i = 0..nx, j = 0..ny-1).
    std::size_t xface(std::size_t i, std::size_t j) const noexcept { return j * (nx + 1) + i; }
    /// y-face (i = 0..nx-1, j = 0..ny).
    std::size_t yface(std::size_t i, std::size_t j) const noexcept { return j * nx + i; }

    double xc(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * h(); }
    double yc(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) * h(); }

    /// Throws ValidationError unless nx, ny >= 4 and the cells are square.
    void validate() const;
};

enum class Edge : std::size_t { Left = 0, Right = 1, Bottom = 2, Top = 3 };
inline constexpr std::array<Edge, 4> kEdges{Edge::Left, Edge::Right, Edge::Bottom, Edge::Top};

enum class FlowCondition { Impermeable, FixedPressure };

/// Dirichlet sub-range of an edge, as fractions of the edge measured from its
/// lower coordinate (left to right for bottom/top, bottom to top for left/right).
struct HeatedSegment {
    double begin = 0.0;
    double end = 1.0;
    double temperature = 1.0;
};

struct EdgeCondition {
    /// Base temperature condition: Dirichlet value, or zero-flux when empty.
    std::optional<double> dirichlet;
    std::vector<HeatedSegment> heated;
    FlowCondition flow = FlowCondition::Impermeable;
    /// p_D on fixed-pressure edges; the streamfunction form only needs the edge type.
    double pressure = 0.0;
    /// Temperature carried in through inflow parts of a fixed-pressure edge.
    double inflow_temperature = 0.0;
};

struct BoundaryConditionSet {
    std::array<EdgeCondition, 4> edges{};

    EdgeCondition& operator[](Edge e) { return edges[static_cast<std::size_t>(e)]; }
    const EdgeCondition& operator[](Edge e) const { return edges[static_cast<std::size_t>(e)]; }

    /// Segment fractions in [0,1], ordered, non-overlapping per edge; at least one impermeable edge.
    void validate() const;
};

/// Resolved temperature condition on one boundary face.
struct FaceTemperature {
    bool dirichlet = false;
    double value = 0.0;
};

/// Condition on face `k` of `edge` (k counts faces along the edge from its lower end).
FaceTemperature face_temperature(const BoundaryConditionSet& bc, const GridSpec& grid, Edge edge, std::size_t k);

/// Number of faces along an edge.
std::size_t edge_faces(const GridSpec& grid, Edge edge);

enum class RayleighMode { Uniform, FourSubdomain };

/// Quadrant order for FourSubdomain: bottom-left, bottom-right, top-left, top-right.
struct RayleighField {
    RayleighMode mode = RayleighMode::Uniform;
    std::vector<double> values{1.0};

    static RayleighField from_mu(const std::vector<double>& mu);

    /// Values must be finite and non-negative; Ra = 0 is the pure-conduction limit.
    void validate() const;
    /// Per-cell Rayleigh number, row-major like the temperature field.
    std::vector<double> per_cell(const GridSpec& grid) const;
};

}  // namespace romforge::fom
