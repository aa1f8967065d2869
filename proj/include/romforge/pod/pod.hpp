#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "romforge/store/snapshot.hpp"

namespace romforge::pod {

/// Orthonormal POD modes (N_h x N) with the matching singular values and the mean field
/// that was removed before the decomposition. Immutable once computed.
struct ReducedBasis {
    Eigen::MatrixXd modes;
    Eigen::VectorXd singular_values;
    Eigen::VectorXd mean;

    std::size_t size() const noexcept { return static_cast<std::size_t>(modes.cols()); }
    std::size_t dof() const noexcept { return static_cast<std::size_t>(modes.rows()); }
};

struct PodOptions {
    /// Subtract the snapshot mean before the SVD (mean stays zero otherwise).
    bool center = true;
};

/// Top-N left singular vectors of the (centered) N_h x count snapshot matrix. Each mode's
/// first entry with magnitude above 1e-12 is made positive. Requires 1 <= N <= min(N_h, count).
ReducedBasis compute_pod_basis(const Eigen::MatrixXd& snapshots, std::size_t n, PodOptions options = {});
ReducedBasis compute_pod_basis(const store::SnapshotSet& set, std::size_t n, PodOptions options = {});

/// modes^T (field - mean)
Eigen::VectorXd project(const ReducedBasis& basis, std::span<const double> field);
/// mean + modes * coefficients
std::vector<double> reconstruct(const ReducedBasis& basis, std::span<const double> coefficients);

/// Column-wise variants for whole batches.
Eigen::MatrixXd project(const ReducedBasis& basis, const Eigen::MatrixXd& fields);
Eigen::MatrixXd reconstruct(const ReducedBasis& basis, const Eigen::MatrixXd& coefficients);

/// Mean over snapshots and DOFs of the squared projection error.
double reconstruction_mse(const ReducedBasis& basis, const Eigen::MatrixXd& fields);

/// "PODB" | u32 version=1 | u64 N_h | u64 N | N x f64 singular values | N_h x f64 mean |
/// N_h*N x f64 modes (column-major)
void write_basis(const ReducedBasis& basis, std::ostream& out);
ReducedBasis read_basis(std::istream& in);
void save_basis(const ReducedBasis& basis, const std::filesystem::path& path);
ReducedBasis load_basis(const std::filesystem::path& path);

}  // namespace romforge::pod
