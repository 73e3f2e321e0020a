#include "qgrad/grid.hpp"

#include <cmath>
#include <string>

#include "qgrad/errors.hpp"

namespace qgrad {

GridSpec::GridSpec(int n_bits, int dim, double side) : n(n_bits), d(dim), a(side) {
    if (n < 1 || n > 40) throw ParameterError("grid bits n must be in [1, 40], got " + std::to_string(n));
    if (d < 1) throw ParameterError("grid dimension must be positive, got " + std::to_string(d));
    if (!(a > 0.0)) throw ParameterError("grid side length must be positive");
}

SqSpec::SqSpec(std::int64_t q_prime, int dim, double side) : q(q_prime), d(dim), a(side) {
    if (q <= 2 || !is_prime(q))
        throw ParameterError("modular grid size q must be an odd prime, got " + std::to_string(q));
    if (d < 1) throw ParameterError("grid dimension must be positive, got " + std::to_string(d));
    if (!(a > 0.0)) throw ParameterError("grid side length must be positive");
}

bool is_prime(std::int64_t v) {
    if (v < 2) return false;
    if (v % 2 == 0) return v == 2;
    for (std::int64_t p = 3; p * p <= v; p += 2)
        if (v % p == 0) return false;
    return true;
}

std::int64_t next_prime(std::int64_t v) {
    if (v <= 2) return 2;
    if (v % 2 == 0) ++v;
    while (!is_prime(v)) v += 2;
    return v;
}

double label_to_value(const GridSpec& spec, std::int64_t label) {
    if (label < spec.min_label() || label > spec.max_label())
        throw RangeError("label " + std::to_string(label) + " outside [" +
                         std::to_string(spec.min_label()) + ", " + std::to_string(spec.max_label()) + "]");
    // a*(2k+1)/2^(n+1), kept exact via ldexp for dyadic a.
    return spec.a * std::ldexp(static_cast<double>(2 * label + 1), -(spec.n + 1));
}

std::int64_t value_to_label(const GridSpec& spec, double value) {
    const double t = std::ldexp(value / spec.a, spec.n + 1); // should be the odd integer 2k+1
    const double k = (t - 1.0) / 2.0;
    std::int64_t candidate = static_cast<std::int64_t>(std::llround(k));
    if (candidate < spec.min_label() || candidate > spec.max_label() ||
        label_to_value(spec, candidate) != value)
        throw NotAGridPointError("value " + std::to_string(value) + " is not a lattice point");
    return candidate;
}

std::int64_t nearest_label(const GridSpec& spec, double value) {
    const double k = (std::ldexp(value / spec.a, spec.n + 1) - 1.0) / 2.0;
    const double lo = std::floor(k);
    std::int64_t k0 = static_cast<std::int64_t>(lo);
    std::int64_t k1 = k0 + 1;
    if (k0 < spec.min_label()) k0 = spec.min_label();
    if (k0 > spec.max_label()) k0 = spec.max_label();
    if (k1 < spec.min_label()) k1 = spec.min_label();
    if (k1 > spec.max_label()) k1 = spec.max_label();
    if (k0 == k1) return k0;
    const double d0 = std::fabs(value - label_to_value(spec, k0));
    const double d1 = std::fabs(value - label_to_value(spec, k1));
    return d0 <= d1 ? k0 : k1; // tie resolves toward the smaller label
}

double sq_value(const SqSpec& spec, std::int64_t k) {
    if (k < -spec.half() || k > spec.half())
        throw RangeError("residue " + std::to_string(k) + " outside [-" +
                         std::to_string(spec.half()) + ", " + std::to_string(spec.half()) + "]");
    return spec.a * static_cast<double>(k) / static_cast<double>(spec.q);
}

GridPoint grid_point_at(const GridSpec& spec, std::int64_t flat_index) {
    const std::int64_t per_axis = spec.labels_per_axis();
    GridPoint p;
    p.labels.resize(spec.d);
    p.values.resize(spec.d);
    for (int axis = spec.d - 1; axis >= 0; --axis) {
        const std::int64_t offset = flat_index % per_axis;
        flat_index /= per_axis;
        p.labels[axis] = offset + spec.min_label();
        p.values[axis] = label_to_value(spec, p.labels[axis]);
    }
    return p;
}

} // namespace qgrad
