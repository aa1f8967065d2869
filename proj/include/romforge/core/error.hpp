#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace romforge {

/// Bad input or configuration. The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Failure while computing. The CLI maps this (and anything else) to exit code 2.
class RuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed binary payload; carries the byte offset where parsing failed.
class ParseError : public RuntimeError {
public:
    ParseError(const std::string& what, std::uint64_t offset)
        : RuntimeError(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

class UnsupportedVersionError : public ParseError {
public:
    UnsupportedVersionError(const std::string& magic, std::uint32_t version, std::uint64_t offset)
        : ParseError(magic + ": unsupported format version " + std::to_string(version), offset),
          version_(version) {}
    std::uint32_t version() const noexcept { return version_; }

private:
    std::uint32_t version_;
};

class TruncatedError : public ParseError {
public:
    using ParseError::ParseError;
};

/// SOR did not reach the residual tolerance.
class IterationLimitError : public RuntimeError {
public:
    IterationLimitError(std::size_t iterations, double residual)
        : RuntimeError("poisson solve did not converge after " + std::to_string(iterations) +
                       " iterations (residual " + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}
    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

/// Explicit temperature update produced a non-finite value.
class InstabilityError : public RuntimeError {
public:
    InstabilityError(std::size_t i, std::size_t j)
        : RuntimeError("temperature became non-finite at cell (i=" + std::to_string(i) +
                       ", j=" + std::to_string(j) + ")"),
          i_(i), j_(j) {}
    std::size_t cell_i() const noexcept { return i_; }
    std::size_t cell_j() const noexcept { return j_; }

private:
    std::size_t i_, j_;
};

/// FOM failure wrapped with the time-step index where it happened.
class SimulationError : public RuntimeError {
public:
    SimulationError(std::size_t step, const std::string& cause)
        : RuntimeError("step " + std::to_string(step) + ": " + cause), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Optimizer received non-finite gradients.
class OptimizerError : public RuntimeError {
public:
    using RuntimeError::RuntimeError;
};

/// Training loss went non-finite; message carries epoch/batch coordinates.
class TrainingAborted : public RuntimeError {
public:
    TrainingAborted(const std::string& what, std::size_t epoch, std::size_t batch)
        : RuntimeError(what + " (epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ")"),
          epoch_(epoch), batch_(batch) {}
    std::size_t epoch() const noexcept { return epoch_; }
    std::size_t batch() const noexcept { return batch_; }

private:
    std::size_t epoch_, batch_;
};

}  // namespace romforge
