#include "romforge/nn/normalization.hpp"

#include <cstring>
#include <string>

#include "romforge/core/binary_io.hpp"
#include "romforge/core/error.hpp"

namespace romforge::nn {

MinMaxNormalization MinMaxNormalization::fit(const Matrix& samples) {
    if (samples.cols() == 0 || samples.rows() == 0) throw ValidationError("cannot fit normalization on an empty set");
    if (!samples.allFinite()) throw ValidationError("cannot fit normalization on non-finite samples");
    return {samples.rowwise().minCoeff(), samples.rowwise().maxCoeff()};
}

std::vector<bool> MinMaxNormalization::constant_mask() const {
    std::vector<bool> mask(size());
    for (std::size_t k = 0; k < size(); ++k) mask[k] = is_constant(k);
    return mask;
}

Matrix MinMaxNormalization::normalize(const Matrix& samples) const {
    if (static_cast<std::size_t>(samples.rows()) != size())
        throw ValidationError("normalization expects width " + std::to_string(size()) + ", got " +
                              std::to_string(samples.rows()));
    Matrix out(samples.rows(), samples.cols());
    for (Eigen::Index r = 0; r < samples.rows(); ++r) {
        const double lo = min(r);
        const double span = max(r) - lo;
        if (span > 0.0) {
            out.row(r) = (samples.row(r).array() - lo) / span;
        } else {
            out.row(r).setConstant(0.5);
        }
    }
    return out;
}

Matrix MinMaxNormalization::denormalize(const Matrix& scaled) const {
    if (static_cast<std::size_t>(scaled.rows()) != size())
        throw ValidationError("normalization expects width " + std::to_string(size()) + ", got " +
                              std::to_string(scaled.rows()));
    Matrix out(scaled.rows(), scaled.cols());
    for (Eigen::Index r = 0; r < scaled.rows(); ++r) {
        const double lo = min(r);
        const double span = max(r) - lo;
        if (span > 0.0) {
            out.row(r) = scaled.row(r).array() * span + lo;
        } else {
            out.row(r).setConstant(lo);
        }
    }
    return out;
}

bool MinMaxNormalization::outside(const Vector& sample) const {
    for (Eigen::Index r = 0; r < sample.size(); ++r)
        if (sample(r) < min(r) || sample(r) > max(r)) return true;
    return false;
}

void MinMaxNormalization::write(std::ostream& out) const {
    io::BinaryWriter w(out);
    w.put(static_cast<std::uint64_t>(size()));
    w.put_f64s({min.data(), size()});
    w.put_f64s({max.data(), size()});
}

MinMaxNormalization MinMaxNormalization::read(std::istream& in) {
    io::BinaryReader r(in);
    const auto dim = r.get<std::uint64_t>();
    r.require_plausible(dim, 16, 1ull << 34, "normalization");
    MinMaxNormalization n;
    n.min.resize(static_cast<Eigen::Index>(dim));
    n.max.resize(static_cast<Eigen::Index>(dim));
    r.get_f64s({n.min.data(), dim});
    r.get_f64s({n.max.data(), dim});
    return n;
}

bool MinMaxNormalization::operator==(const MinMaxNormalization& other) const {
    return size() == other.size() && std::memcmp(min.data(), other.min.data(), size() * sizeof(double)) == 0 &&
           std::memcmp(max.data(), other.max.data(), size() * sizeof(double)) == 0;
}

}  // namespace romforge::nn
