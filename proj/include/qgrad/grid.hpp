#pragma once

#include <cstdint>
#include <vector>

namespace qgrad {

/// Dyadic sampling lattice with 2^n points per axis. Axis values are
/// a*(k/2^n + 1/2^(n+1)) for labels k in [-2^(n-1), 2^(n-1)-1], so every
/// value lies strictly inside (-a/2, a/2) and consecutive values are a/2^n
/// apart.
struct GridSpec {
    int n = 1;      ///< bits per axis
    int d = 1;      ///< dimension
    double a = 1.0; ///< side length

    GridSpec() = default;
    GridSpec(int n_bits, int dim, double side = 1.0);

    std::int64_t labels_per_axis() const { return std::int64_t{1} << n; }
    std::int64_t min_label() const { return -(std::int64_t{1} << (n - 1)); }
    std::int64_t max_label() const { return (std::int64_t{1} << (n - 1)) - 1; }
    /// Total number of lattice points, 2^(n*d).
    std::int64_t size() const { return std::int64_t{1} << (static_cast<std::int64_t>(n) * d); }
};

/// One lattice point: integer labels plus their exact real coordinates.
struct GridPoint {
    std::vector<std::int64_t> labels;
    std::vector<double> values;
};

/// Modular sampling lattice with q points per axis (q an odd prime); axis
/// values are a*k/q for k in [-(q-1)/2, (q-1)/2].
struct SqSpec {
    std::int64_t q = 3;
    int d = 1;
    double a = 1.0;

    SqSpec() = default;
    SqSpec(std::int64_t q_prime, int dim, double side = 1.0);

    std::int64_t half() const { return (q - 1) / 2; }
};

bool is_prime(std::int64_t v);
/// Smallest prime >= v (v >= 2).
std::int64_t next_prime(std::int64_t v);

double label_to_value(const GridSpec& spec, std::int64_t label);
std::int64_t value_to_label(const GridSpec& spec, double value);

/// Label whose value is closest to `value`; exact midpoints resolve toward
/// the smaller label, values past the lattice edge clamp to the end labels.
std::int64_t nearest_label(const GridSpec& spec, double value);

double sq_value(const SqSpec& spec, std::int64_t k);

/// Decodes a flat row-major index (axis 0 most significant) into labels and
/// values of the d-dimensional lattice.
GridPoint grid_point_at(const GridSpec& spec, std::int64_t flat_index);

} // namespace qgrad
