#include "romforge/store/snapshot.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "romforge/core/binary_io.hpp"
#include "romforge/core/error.hpp"

namespace romforge::store {

namespace {

constexpr std::uint64_t kMaxArchiveBytes = 1ull << 36;

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](double x, double y) {
               return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
           });
}

}  // namespace

void SnapshotSet::add(Snapshot s, std::uint32_t run_id) {
    if (snapshots.empty() && dof == 0 && parameter_dim == 0) {
        dof = s.field.size();
        parameter_dim = s.mu.size();
    }
    if (s.field.size() != dof || s.mu.size() != parameter_dim)
        throw ValidationError("snapshot shape (N_h=" + std::to_string(s.field.size()) + ", P=" +
                              std::to_string(s.mu.size()) + ") does not match set (N_h=" + std::to_string(dof) +
                              ", P=" + std::to_string(parameter_dim) + ")");
    snapshots.push_back(std::move(s));
    provenance.push_back(run_id);
}

void SnapshotSet::append(const SnapshotSet& other, std::uint32_t run_id) {
    if (!snapshots.empty() && other.field_name != field_name)
        throw ValidationError("cannot mix fields '" + field_name + "' and '" + other.field_name + "'");
    if (snapshots.empty()) field_name = other.field_name;
    for (const auto& s : other.snapshots) add(s, run_id);
}

void SnapshotSet::validate() const {
    if (snapshots.empty()) throw ValidationError("snapshot set is empty");
    if (dof == 0) throw ValidationError("snapshot set declares zero degrees of freedom");
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        const auto& s = snapshots[k];
        if (s.field.size() != dof || s.mu.size() != parameter_dim)
            throw ValidationError("snapshot " + std::to_string(k) + " is heterogeneous with the set");
        if (!std::isfinite(s.t) || s.t < 0.0)
            throw ValidationError("snapshot " + std::to_string(k) + " has invalid time");
        if (!all_finite(s.field) || !all_finite(s.mu))
            throw ValidationError("snapshot " + std::to_string(k) + " contains non-finite values");
    }
}

bool SnapshotSet::same_payload(const SnapshotSet& other) const {
    if (field_name != other.field_name || parameter_dim != other.parameter_dim || dof != other.dof ||
        snapshots.size() != other.snapshots.size())
        return false;
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        const auto& a = snapshots[k];
        const auto& b = other.snapshots[k];
        if (std::bit_cast<std::uint64_t>(a.t) != std::bit_cast<std::uint64_t>(b.t) || !bit_equal(a.mu, b.mu) ||
            !bit_equal(a.field, b.field))
            return false;
    }
    return true;
}

std::uint64_t archive_size(const SnapshotSet& set) {
    const std::uint64_t header = 4 + 4 + 8 + 8 + 8 + 4 + set.field_name.size();
    const std::uint64_t per = 8 * (1 + set.parameter_dim + set.dof);
    return header + per * set.snapshots.size();
}

namespace {

// Empty sets are archivable as long as their shape is declared.
void validate_for_write(const SnapshotSet& set) {
    if (!set.empty()) return set.validate();
    if (set.dof == 0) throw ValidationError("snapshot set declares zero degrees of freedom");
}

}  // namespace

std::uint64_t write_archive(const SnapshotSet& set, std::ostream& out) {
    validate_for_write(set);
    io::BinaryWriter w(out);
    w.magic(kSnapMagic);
    w.put(kSnapVersion);
    w.put(static_cast<std::uint64_t>(set.dof));
    w.put(static_cast<std::uint64_t>(set.parameter_dim));
    w.put(static_cast<std::uint64_t>(set.snapshots.size()));
    w.put_string(set.field_name);
    for (const auto& s : set.snapshots) {
        w.put(s.t);
        w.put_f64s(s.mu);
        w.put_f64s(s.field);
    }
    return w.bytes_written();
}

std::uint64_t write_archive(const SnapshotSet& set, const std::filesystem::path& path) {
    validate_for_write(set);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot open '" + path.string() + "' for writing");
    const auto n = write_archive(set, out);
    out.flush();
    if (!out) throw RuntimeError("failed writing '" + path.string() + "'");
    return n;
}

SnapshotSet read_archive(std::istream& in) {
    io::BinaryReader r(in);
    r.expect_magic(kSnapMagic);
    r.expect_version(kSnapMagic, kSnapVersion);
    const auto dof = r.get<std::uint64_t>();
    const auto p = r.get<std::uint64_t>();
    const auto count = r.get<std::uint64_t>();
    r.require_plausible(dof, 8, kMaxArchiveBytes, "N_h");
    r.require_plausible(p, 8, kMaxArchiveBytes, "P");
    r.require_plausible(count, 8 * (1 + p + dof), kMaxArchiveBytes, "snapshot");

    SnapshotSet set;
    set.field_name = r.get_string();
    set.dof = dof;
    set.parameter_dim = p;
    set.snapshots.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        Snapshot s;
        s.t = r.get<double>();
        s.mu.resize(p);
        r.get_f64s(s.mu);
        s.field.resize(dof);
        r.get_f64s(s.field);
        set.snapshots.push_back(std::move(s));
        set.provenance.push_back(0);
    }
    if (!r.at_eof()) throw ParseError("trailing bytes after last snapshot", r.offset());
    return set;
}

SnapshotSet read_archive(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open archive '" + path.string() + "'");
    return read_archive(in);
}

std::size_t validation_count(std::size_t total) {
    // nearbyint honours the default round-to-nearest-even mode.
    return static_cast<std::size_t>(std::nearbyint(0.1 * static_cast<double>(total)));
}

DatasetSplit split_train_validation(std::size_t total, std::uint64_t seed) {
    if (total < 10) throw ValidationError("need at least 10 snapshots to split, got " + std::to_string(total));
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t n_val = validation_count(total);
    DatasetSplit split;
    split.seed = seed;
    split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.train.begin(), split.train.end());
    return split;
}

DatasetSplit split_train_validation(const SnapshotSet& set, std::uint64_t seed) {
    return split_train_validation(set.size(), seed);
}

}  // namespace romforge::store
