#pragma once

#include <stdexcept>
#include <string>

namespace qgrad {

/// Argument outside its documented range (labels, residues, stencil orders...).
class RangeError : public std::out_of_range {
public:
    explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

/// A real value that was required to lie exactly on a sampling lattice does not.
class NotAGridPointError : public std::invalid_argument {
public:
    explicit NotAGridPointError(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid or inconsistent run parameters.
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// A job would exceed a configured resource limit (amplitude cap, memory).
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// A derivative form produced a non-negligible imaginary residue, which
/// signals a function that does not map real inputs to real outputs.
class RealityViolationError : public std::runtime_error {
public:
    explicit RealityViolationError(const std::string& what) : std::runtime_error(what) {}
};

/// Sparse row recovery found two or more candidate rows consistent with
/// every probe residue.
class AmbiguousRecoveryError : public std::runtime_error {
public:
    AmbiguousRecoveryError(int row, const std::string& what)
        : std::runtime_error(what), row_(row) {}
    int row() const { return row_; }

private:
    int row_;
};

/// Measured residues admit no candidate at all, sparse or dense.
class InconsistentResiduesError : public std::runtime_error {
public:
    explicit InconsistentResiduesError(const std::string& what) : std::runtime_error(what) {}
};

/// A series bound was requested outside its region of convergence.
class DivergenceError : public std::invalid_argument {
public:
    explicit DivergenceError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace qgrad
