#include "romforge/store/snapshot_matrix.hpp"

#include <numeric>

namespace romforge::store {

namespace {

std::vector<std::size_t> all_indices(const SnapshotSet& set) {
    std::vector<std::size_t> idx(set.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

}  // namespace

Eigen::MatrixXd field_matrix(const SnapshotSet& set) { return field_matrix(set, all_indices(set)); }

Eigen::MatrixXd field_matrix(const SnapshotSet& set, std::span<const std::size_t> indices) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(set.dof), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t c = 0; c < indices.size(); ++c) {
        const auto& f = set.snapshots.at(indices[c]).field;
        m.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
    }
    return m;
}

Eigen::MatrixXd input_matrix(const SnapshotSet& set) { return input_matrix(set, all_indices(set)); }

Eigen::MatrixXd input_matrix(const SnapshotSet& set, std::span<const std::size_t> indices) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(1 + set.parameter_dim), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t c = 0; c < indices.size(); ++c) {
        const auto& s = set.snapshots.at(indices[c]);
        const auto col = static_cast<Eigen::Index>(c);
        m(0, col) = s.t;
        for (std::size_t p = 0; p < s.mu.size(); ++p) m(static_cast<Eigen::Index>(1 + p), col) = s.mu[p];
    }
    return m;
}

}  // namespace romforge::store
