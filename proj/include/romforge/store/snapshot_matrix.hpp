#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "romforge/store/snapshot.hpp"

namespace romforge::store {

/// N_h x count matrix with one snapshot per column.
Eigen::MatrixXd field_matrix(const SnapshotSet& set);
Eigen::MatrixXd field_matrix(const SnapshotSet& set, std::span<const std::size_t> indices);

/// (1 + P) x count matrix of (t, mu) inputs.
Eigen::MatrixXd input_matrix(const SnapshotSet& set);
Eigen::MatrixXd input_matrix(const SnapshotSet& set, std::span<const std::size_t> indices);

}  // namespace romforge::store
