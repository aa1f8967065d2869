#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace romforge::store {

/// One field at (t, mu). `field` is a flat DOF vector (cell-centered, row-major).
struct Snapshot {
    double t = 0.0;
    std::vector<double> mu;
    std::vector<double> field;

    bool operator==(const Snapshot&) const = default;
};

/// Homogeneous collection of snapshots; `provenance[k]` names the run snapshot k came from.
struct SnapshotSet {
    std::string field_name = "temperature";
    std::size_t parameter_dim = 0;
    std::size_t dof = 0;
    std::vector<Snapshot> snapshots;
    std::vector<std::uint32_t> provenance;

    std::size_t size() const noexcept { return snapshots.size(); }
    bool empty() const noexcept { return snapshots.empty(); }

    /// Appends a snapshot tagged with `run_id`; first append fixes P and N_h.
    void add(Snapshot s, std::uint32_t run_id = 0);
    /// Concatenates `other`, tagging its members with `run_id`.
    void append(const SnapshotSet& other, std::uint32_t run_id);

    /// Throws ValidationError when empty, heterogeneous or non-finite.
    void validate() const;

    /// Equality of payload (provenance is in-memory bookkeeping, not archived).
    bool same_payload(const SnapshotSet& other) const;
};

/// SNAP1 layout, little-endian:
///   "SNAP" | u32 version=1 | u64 N_h | u64 P | u64 count | u32 name_len | name bytes
///   then per snapshot: f64 t | P x f64 mu | N_h x f64 field
inline constexpr char kSnapMagic[] = "SNAP";
inline constexpr std::uint32_t kSnapVersion = 1;

/// Exact size of the archive `write_archive` produces for `set`.
std::uint64_t archive_size(const SnapshotSet& set);

std::uint64_t write_archive(const SnapshotSet& set, std::ostream& out);
std::uint64_t write_archive(const SnapshotSet& set, const std::filesystem::path& path);

SnapshotSet read_archive(std::istream& in);
SnapshotSet read_archive(const std::filesystem::path& path);

struct DatasetSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::uint64_t seed = 0;
};

/// Number of validation members for `total` snapshots: round-half-even(0.1 * total).
std::size_t validation_count(std::size_t total);

/// Uniform draw without replacement of validation_count(total) indices; both lists sorted.
/// Throws ValidationError when total < 10.
DatasetSplit split_train_validation(std::size_t total, std::uint64_t seed);
DatasetSplit split_train_validation(const SnapshotSet& set, std::uint64_t seed);

}  // namespace romforge::store
