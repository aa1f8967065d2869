#include <doctest.h>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "romforge/core/error.hpp"
#include "romforge/pod/pod.hpp"

using namespace romforge;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_snapshots(std::uint64_t seed, Eigen::Index dof, Eigen::Index count) {
    // Smooth-ish fields with a decaying spectrum, like a transient temperature history.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    MatrixXd m = MatrixXd::Zero(dof, count);
    for (int mode = 1; mode <= 12; ++mode)
        for (Eigen::Index c = 0; c < count; ++c) {
            const double amp = g(rng) / (mode * mode);
            for (Eigen::Index r = 0; r < dof; ++r)
                m(r, c) += amp * std::sin(mode * std::numbers::pi * (r + 0.5) / static_cast<double>(dof));
        }
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] += 1e-3 * g(rng);
    return m;
}

/// Eigenvalues of a symmetric 3x3 matrix from its characteristic polynomial (trigonometric root formula).
std::array<double, 3> symmetric_eigenvalues(const Eigen::Matrix3d& s) {
    const double c2 = s.trace();
    const double c1 = s(0, 0) * s(1, 1) + s(1, 1) * s(2, 2) + s(0, 0) * s(2, 2) - s(0, 1) * s(1, 0) -
                      s(1, 2) * s(2, 1) - s(0, 2) * s(2, 0);
    const double c0 = s.determinant();
    // lambda^3 - c2 lambda^2 + c1 lambda - c0 = 0, shifted to the depressed cubic t^3 + p t + q.
    const double shift = c2 / 3.0;
    const double p = c1 - c2 * c2 / 3.0;
    const double q = -2.0 * c2 * c2 * c2 / 27.0 + c2 * c1 / 3.0 - c0;
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double phi = std::acos(std::clamp(3.0 * q / (p * r), -1.0, 1.0)) / 3.0;
    std::array<double, 3> out;
    for (int k = 0; k < 3; ++k) out[k] = shift + r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0);
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

}  // namespace

TEST_CASE("singular values of a 3x3 matrix match the characteristic-polynomial oracle") {
    const Eigen::Matrix3d u = Eigen::AngleAxisd(0.4, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    const Eigen::Matrix3d v = Eigen::AngleAxisd(-1.1, Eigen::Vector3d(-2, 0.5, 1).normalized()).toRotationMatrix();
    const Eigen::Matrix3d a = u * Eigen::Vector3d(2.0, 1.0, 0.0).asDiagonal() * v.transpose();

    const auto lambda = symmetric_eigenvalues(a.transpose() * a);
    const auto basis = pod::compute_pod_basis(MatrixXd(a), 3, {.center = false});
    CHECK(basis.singular_values(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(basis.singular_values(1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(basis.singular_values(2)) <= 1e-12);
    CHECK(basis.singular_values(0) == doctest::Approx(std::sqrt(lambda[0])).epsilon(1e-12));
    CHECK(basis.singular_values(1) == doctest::Approx(std::sqrt(lambda[1])).epsilon(1e-12));
    CHECK(std::abs(basis.singular_values(2) - std::sqrt(std::max(lambda[2], 0.0))) <= 1e-7);
}

TEST_CASE("modes are orthonormal and follow the sign convention") {
    const MatrixXd s = random_snapshots(1, 200, 60);
    const auto basis = pod::compute_pod_basis(s, 16);
    const MatrixXd gram = basis.modes.transpose() * basis.modes;
    CHECK((gram - MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() <= 1e-10);
    for (Eigen::Index k = 0; k < 16; ++k) {
        Eigen::Index first = 0;
        while (std::abs(basis.modes(first, k)) <= 1e-12) ++first;
        CHECK(basis.modes(first, k) > 0.0);
    }
    for (Eigen::Index k = 1; k < 16; ++k) CHECK(basis.singular_values(k) <= basis.singular_values(k - 1));
}

TEST_CASE("reconstruction error never grows with more modes") {
    const MatrixXd s = random_snapshots(2, 150, 40);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : {1u, 2u, 4u, 8u, 16u}) {
        const double e = pod::reconstruction_mse(pod::compute_pod_basis(s, n), s);
        CHECK(e <= prev);
        prev = e;
    }
    // Discarded energy: sum of the dropped squared singular values over (N_h * count).
    const auto full = pod::compute_pod_basis(s, 40);
    const auto four = pod::compute_pod_basis(s, 4);
    const double dropped = full.singular_values.tail(36).squaredNorm() / static_cast<double>(s.size());
    CHECK(pod::reconstruction_mse(four, s) == doctest::Approx(dropped).epsilon(1e-9));
}

TEST_CASE("a full-rank basis reconstructs the snapshots exactly") {
    const MatrixXd s = random_snapshots(3, 30, 12);
    const auto basis = pod::compute_pod_basis(s, 12);
    CHECK(pod::reconstruction_mse(basis, s) <= 1e-12);
    const VectorXd field = s.col(5);
    const auto coeffs = pod::project(basis, std::span<const double>(field.data(), 30));
    const auto back = pod::reconstruct(basis, std::span<const double>(coeffs.data(), coeffs.size()));
    for (int r = 0; r < 30; ++r) CHECK(back[r] == doctest::Approx(field(r)).epsilon(1e-10));
}

TEST_CASE("the snapshot mean projects to zero coefficients") {
    const MatrixXd s = random_snapshots(4, 50, 20);
    const auto basis = pod::compute_pod_basis(s, 5);
    CHECK((basis.mean - s.rowwise().mean()).cwiseAbs().maxCoeff() <= 1e-14);
    const auto c = pod::project(basis, MatrixXd(basis.mean));
    CHECK(c.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("basis size must fit the data") {
    const MatrixXd s = random_snapshots(5, 10, 6);
    CHECK_THROWS_AS(pod::compute_pod_basis(s, 0), ValidationError);
    CHECK_THROWS_AS(pod::compute_pod_basis(s, 7), ValidationError);
    const auto b = pod::compute_pod_basis(s, 2);
    CHECK_THROWS_AS(pod::project(b, MatrixXd::Zero(9, 1)), ValidationError);
}

TEST_CASE("PODB files round-trip byte for byte") {
    const auto basis = pod::compute_pod_basis(random_snapshots(6, 20, 8), 3);
    std::ostringstream a(std::ios::binary);
    pod::write_basis(basis, a);
    CHECK(a.str().size() == 4 + 4 + 8 + 8 + 8 * (3 + 20 + 60));
    std::istringstream in(a.str(), std::ios::binary);
    const auto back = pod::read_basis(in);
    std::ostringstream b(std::ios::binary);
    pod::write_basis(back, b);
    CHECK(a.str() == b.str());
    CHECK(back.modes == basis.modes);
}
