#include "romforge/pod/pod.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <fstream>
#include <string>

#include "romforge/core/binary_io.hpp"
#include "romforge/core/error.hpp"
#include "romforge/store/snapshot_matrix.hpp"

namespace romforge::pod {

namespace {

constexpr char kMagic[] = "PODB";
constexpr std::uint32_t kVersion = 1;
constexpr double kSignThreshold = 1e-12;

void check_length(std::size_t got, std::size_t expected, const char* what) {
    if (got != expected)
        throw ValidationError(std::string(what) + " length " + std::to_string(got) + " does not match " +
                              std::to_string(expected));
}

}  // namespace

ReducedBasis compute_pod_basis(const Eigen::MatrixXd& snapshots, std::size_t n, PodOptions options) {
    const auto dof = static_cast<std::size_t>(snapshots.rows());
    const auto count = static_cast<std::size_t>(snapshots.cols());
    if (n < 1 || n > std::min(dof, count))
        throw ValidationError("POD size N=" + std::to_string(n) + " must lie in [1, " +
                              std::to_string(std::min(dof, count)) + "]");
    if (!snapshots.allFinite()) throw ValidationError("snapshot matrix contains non-finite values");

    ReducedBasis basis;
    basis.mean = options.center ? Eigen::VectorXd(snapshots.rowwise().mean())
                                : Eigen::VectorXd::Zero(snapshots.rows());
    const Eigen::MatrixXd centered = snapshots.colwise() - basis.mean;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
    const auto cols = static_cast<Eigen::Index>(n);
    basis.modes = svd.matrixU().leftCols(cols);
    basis.singular_values = svd.singularValues().head(cols);

    for (Eigen::Index c = 0; c < basis.modes.cols(); ++c) {
        for (Eigen::Index r = 0; r < basis.modes.rows(); ++r) {
            const double v = basis.modes(r, c);
            if (std::abs(v) > kSignThreshold) {
                if (v < 0.0) basis.modes.col(c) *= -1.0;
                break;
            }
        }
    }
    return basis;
}

ReducedBasis compute_pod_basis(const store::SnapshotSet& set, std::size_t n, PodOptions options) {
    set.validate();
    return compute_pod_basis(store::field_matrix(set), n, options);
}

Eigen::VectorXd project(const ReducedBasis& basis, std::span<const double> field) {
    check_length(field.size(), basis.dof(), "field");
    const Eigen::Map<const Eigen::VectorXd> f(field.data(), static_cast<Eigen::Index>(field.size()));
    return basis.modes.transpose() * (f - basis.mean);
}

std::vector<double> reconstruct(const ReducedBasis& basis, std::span<const double> coefficients) {
    check_length(coefficients.size(), basis.size(), "coefficient vector");
    const Eigen::Map<const Eigen::VectorXd> a(coefficients.data(), static_cast<Eigen::Index>(coefficients.size()));
    const Eigen::VectorXd f = basis.mean + basis.modes * a;
    return {f.data(), f.data() + f.size()};
}

Eigen::MatrixXd project(const ReducedBasis& basis, const Eigen::MatrixXd& fields) {
    check_length(static_cast<std::size_t>(fields.rows()), basis.dof(), "field");
    return basis.modes.transpose() * (fields.colwise() - basis.mean);
}

Eigen::MatrixXd reconstruct(const ReducedBasis& basis, const Eigen::MatrixXd& coefficients) {
    check_length(static_cast<std::size_t>(coefficients.rows()), basis.size(), "coefficient vector");
    return (basis.modes * coefficients).colwise() + basis.mean;
}

double reconstruction_mse(const ReducedBasis& basis, const Eigen::MatrixXd& fields) {
    const Eigen::MatrixXd err = reconstruct(basis, project(basis, fields)) - fields;
    return err.squaredNorm() / static_cast<double>(err.size());
}

void write_basis(const ReducedBasis& basis, std::ostream& out) {
    check_length(static_cast<std::size_t>(basis.singular_values.size()), basis.size(), "singular value");
    check_length(static_cast<std::size_t>(basis.mean.size()), basis.dof(), "mean");
    io::BinaryWriter w(out);
    w.magic(kMagic);
    w.put(kVersion);
    w.put(static_cast<std::uint64_t>(basis.dof()));
    w.put(static_cast<std::uint64_t>(basis.size()));
    w.put_f64s({basis.singular_values.data(), basis.size()});
    w.put_f64s({basis.mean.data(), basis.dof()});
    w.put_f64s({basis.modes.data(), static_cast<std::size_t>(basis.modes.size())});
}

ReducedBasis read_basis(std::istream& in) {
    io::BinaryReader r(in);
    r.expect_magic(kMagic);
    r.expect_version(kMagic, kVersion);
    const auto dof = r.get<std::uint64_t>();
    const auto n = r.get<std::uint64_t>();
    r.require_plausible(dof, 8 * (n + 1), 1ull << 36, "POD entries");
    ReducedBasis b;
    b.singular_values.resize(static_cast<Eigen::Index>(n));
    b.mean.resize(static_cast<Eigen::Index>(dof));
    b.modes.resize(static_cast<Eigen::Index>(dof), static_cast<Eigen::Index>(n));
    r.get_f64s({b.singular_values.data(), n});
    r.get_f64s({b.mean.data(), dof});
    r.get_f64s({b.modes.data(), static_cast<std::size_t>(b.modes.size())});
    return b;
}

void save_basis(const ReducedBasis& basis, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot open '" + path.string() + "' for writing");
    write_basis(basis, out);
}

ReducedBasis load_basis(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open '" + path.string() + "'");
    return read_basis(in);
}

}  // namespace romforge::pod
