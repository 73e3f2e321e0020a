#include "qgrad/stencil.hpp"

#include <cmath>
#include <string>

#include "qgrad/errors.hpp"

namespace qgrad {
namespace {

constexpr int kMaxHalfWidth = 12; // int64 rationals stay exact through here

void check_half_width(int m) {
    if (m < 1) throw ParameterError("stencil half-width m must be >= 1, got " + std::to_string(m));
    if (m > kMaxHalfWidth)
        throw ParameterError("stencil half-width m capped at " + std::to_string(kMaxHalfWidth) +
                             " for exact coefficient arithmetic");
}

/// m!m!/((m+t)!(m-t)!) as a product of small factors.
Rational factorial_ratio(int m, int t) {
    Rational r{1};
    for (int i = 1; i <= t; ++i) r = r * Rational(m - t + i, m + i);
    return r;
}

} // namespace

StencilCoeffs second_order_coeffs(int m) {
    check_half_width(m);
    StencilCoeffs s;
    s.m = m;
    s.kind = StencilCoeffs::Kind::second_order;
    s.table.assign(static_cast<std::size_t>(2 * m + 1), Rational(0));
    Rational center{0};
    for (int t = 1; t <= m; ++t) {
        const Rational sign{(t % 2 == 1) ? 1 : -1};
        const Rational value = sign * Rational(2, static_cast<std::int64_t>(t) * t) * factorial_ratio(m, t);
        s.table[static_cast<std::size_t>(m + t)] = value;
        s.table[static_cast<std::size_t>(m - t)] = value;
        center = center - value - value;
    }
    s.table[static_cast<std::size_t>(m)] = center;
    return s;
}

StencilCoeffs first_order_coeffs(int m) {
    check_half_width(m);
    StencilCoeffs s;
    s.m = m;
    s.kind = StencilCoeffs::Kind::first_order;
    s.table.assign(static_cast<std::size_t>(2 * m + 1), Rational(0));
    for (int l = 1; l <= m; ++l) {
        const Rational sign{(l % 2 == 1) ? 1 : -1};
        // C(m,l)/C(m+l,l) reduces to the same factorial ratio as the
        // second-order table.
        const Rational value = sign * Rational(1, l) * factorial_ratio(m, l);
        s.table[static_cast<std::size_t>(m + l)] = value;
        s.table[static_cast<std::size_t>(m - l)] = -value;
    }
    return s;
}

double apply_stencil(const FunctionOracle& oracle, std::span<const double> x,
                     const StencilCoeffs& coeffs) {
    std::vector<double> point(x.size());
    double acc = 0.0;
    for (int t = -coeffs.m; t <= coeffs.m; ++t) {
        const double c = coeffs.coeff(t);
        if (c == 0.0) continue;
        for (std::size_t i = 0; i < x.size(); ++i) point[i] = t * x[i];
        acc += c * oracle.evaluate_real(point);
    }
    return acc;
}

CoeffBoundCheck coeff_bound_check(int m, int k) {
    check_half_width(m);
    if (k < 2 * m)
        throw ParameterError("coefficient bound requires k >= 2m (k=" + std::to_string(k) +
                             ", m=" + std::to_string(m) + ")");
    const StencilCoeffs s = second_order_coeffs(m);
    CoeffBoundCheck out;
    for (int t = 1; t <= m; ++t)
        out.lhs += 2.0 * std::fabs(s.coeff(t)) * std::pow(static_cast<double>(t), k + 1);
    out.rhs = 24.0 * std::exp(-7.0 * m / 6.0) * std::pow(static_cast<double>(m), k + 1.5);
    out.holds = out.lhs <= out.rhs;
    return out;
}

AbsSumCheck abs_sum_check(int m) {
    check_half_width(m);
    const StencilCoeffs s = second_order_coeffs(m);
    AbsSumCheck out;
    Rational abs_sum{0}, signed_sum{0}, zeta{0};
    for (int t = 1; t <= m; ++t) {
        abs_sum = abs_sum + s.at(t).abs();
        signed_sum = signed_sum + s.at(t);
        zeta = zeta + Rational(1, static_cast<std::int64_t>(t) * t);
    }
    out.abs_sum = abs_sum.to_double();
    out.signed_sum = signed_sum.to_double();
    out.partial_zeta = zeta.to_double();
    out.holds_partial = abs_sum <= zeta;
    const double pi2 = M_PI * M_PI;
    out.holds_pi2_over_6 = out.abs_sum < pi2 / 6.0;
    out.holds_pi2_over_3 = out.abs_sum < pi2 / 3.0;
    out.holds = out.holds_partial && out.holds_pi2_over_6;
    return out;
}

Rational stencil_offset_rational(int m) {
    const StencilCoeffs s = second_order_coeffs(m);
    Rational zeta{0};
    for (int j = 1; j <= m; ++j) zeta = zeta + Rational(1, static_cast<std::int64_t>(j) * j);
    return s.at(0) + Rational(2) * zeta;
}

double stencil_offset_constant(int m, double f0) {
    return stencil_offset_rational(m).to_double() * f0;
}

double error_bound_1d(int m, double x_step, double f_deriv_bound) {
    check_half_width(m);
    if (x_step < 0.0) throw ParameterError("step must be non-negative");
    return 4.0 * std::exp(-0.5 * m) * f_deriv_bound * std::pow(x_step, 2 * m + 1);
}

double error_bound_multivariate(int m, double a, double c, int d) {
    check_half_width(m);
    const double ratio = 13.0 * a * c * m * std::sqrt(static_cast<double>(d));
    if (ratio >= 1.0)
        throw DivergenceError("series ratio 13*a*c*m*sqrt(d) = " + std::to_string(ratio) +
                              " is not below 1");
    return std::pow(ratio, 2 * m + 1) / (1.0 - ratio);
}

FindiffParams select_findiff_params(int d, double B, double epsilon, double R,
                                    FindiffPath path, double c) {
    if (d < 1 || !(epsilon > 0.0) || !(R > 0.0))
        throw ParameterError("finite-difference parameter selection needs positive d, epsilon, R");
    FindiffParams p;
    const double arg = d * B / epsilon;
    p.m = arg > 1.0 ? static_cast<int>(std::ceil(std::log(arg))) : 1;
    if (p.m < 1) p.m = 1;
    if (p.m > kMaxHalfWidth) p.m = kMaxHalfWidth;
    const double sqrt_d = std::sqrt(static_cast<double>(d));
    if (path == FindiffPath::probe_vector) {
        p.a = std::min(2.0 / (sqrt_d * (2.0 * p.m + 1.0)), 2.0 * R / p.m);
    } else {
        if (!(c > 0.0)) throw ParameterError("gevrey path needs positive c");
        const double base = 196.0 * 8.0 * 42.0 * M_PI * c * p.m * sqrt_d / epsilon;
        p.a = 1.0 / (14.0 * c * p.m * sqrt_d * std::pow(base, 1.0 / (2.0 * p.m)));
    }
    return p;
}

} // namespace qgrad
