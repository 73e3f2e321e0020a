#pragma once

#include <span>
#include <vector>

#include "qgrad/oracle.hpp"
#include "qgrad/rational.hpp"

namespace qgrad {

/// Central-difference stencil of half-width m. Coefficients are generated in
/// exact rational arithmetic; the factorial ratios cancel catastrophically
/// in floating point well before m = 12.
struct StencilCoeffs {
    enum class Kind { first_order, second_order };

    int m = 1;
    Kind kind = Kind::second_order;
    std::vector<Rational> table; ///< index t+m holds the coefficient at offset t

    const Rational& at(int t) const { return table[static_cast<std::size_t>(t + m)]; }
    double coeff(int t) const { return at(t).to_double(); }
};

/// Second-derivative stencil: coeff(t) = (-1)^(t-1) * 2/t^2 * m!m!/((m+t)!(m-t)!)
/// for t != 0 and coeff(0) = -sum of the others.
StencilCoeffs second_order_coeffs(int m);

/// First-derivative stencil: coeff(l) = (-1)^(l-1)/l * C(m,|l|)/C(m+|l|,|l|),
/// coeff(0) = 0.
StencilCoeffs first_order_coeffs(int m);

/// sum_t coeff(t) * f(t*x). Second-order approximates x^T H_f(0) x,
/// first-order approximates grad f(0) . x.
double apply_stencil(const FunctionOracle& oracle, std::span<const double> x,
                     const StencilCoeffs& coeffs);

struct CoeffBoundCheck {
    double lhs = 0.0; ///< sum_t |a_t * t^(k+1)|
    double rhs = 0.0; ///< 24 * exp(-7m/6) * m^(k+3/2)
    bool holds = false;
};
/// Valid for k >= 2m.
CoeffBoundCheck coeff_bound_check(int m, int k);

struct AbsSumCheck {
    double abs_sum = 0.0;      ///< sum_{t=1..m} |a_t^(2m)|
    double signed_sum = 0.0;   ///< sum_{t=1..m} a_t^(2m), equals partial_zeta exactly
    double partial_zeta = 0.0; ///< sum_{t=1..m} 1/t^2
    bool holds_partial = false; ///< abs_sum <= partial_zeta (equality only at m=1)
    bool holds_pi2_over_6 = false;
    bool holds_pi2_over_3 = false; ///< the cap the absolute sum provably satisfies
    bool holds = false;            ///< holds_partial && holds_pi2_over_6
};
/// Measures the one-sided coefficient sums. The absolute sum exceeds the
/// partial zeta sum from m = 2 and exceeds pi^2/6 from m = 3 (e.g. 299/180 at
/// m = 3); only the pi^2/3 cap holds throughout, since |a_t| < 2/t^2. The
/// signed sum equals the partial zeta sum identically. All four statuses are
/// reported so verification sweeps can record them separately.
AbsSumCheck abs_sum_check(int m);

/// The constant offset that aligns the stencil value with f''(0)x^2 in the
/// one-dimensional error bound: (a_0 + 2*sum 1/j^2) * f0. It vanishes
/// identically because a_0 = -2*sum_{j<=m} 1/j^2 exactly; kept explicit so
/// measured-error checks subtract whatever the formula yields.
double stencil_offset_constant(int m, double f0);
Rational stencil_offset_rational(int m);

/// 4 * exp(-m/2) * deriv_bound * step^(2m+1), the one-dimensional bound on
/// |f''(0)x^2 - f_(2m)(x) - c|.
double error_bound_1d(int m, double x_step, double f_deriv_bound);

/// Closed form of sum_{k=2m+1..inf} (13*a*c*m*sqrt(d))^k; throws
/// DivergenceError when the ratio reaches 1.
double error_bound_multivariate(int m, double a, double c, int d);

struct FindiffParams {
    int m = 1;
    double a = 1.0;
};
enum class FindiffPath { probe_vector, gevrey };

/// m = ceil(log(d*B/epsilon)) (natural log) and the lattice scale a for the
/// requested analysis path: probe_vector caps a at min(2/(sqrt(d)(2m+1)),
/// 2R/m); gevrey uses 1/a = 14*c*m*sqrt(d)*(196*8*42*pi*c*m*sqrt(d)/eps)^(1/2m).
FindiffParams select_findiff_params(int d, double B, double epsilon, double R,
                                    FindiffPath path = FindiffPath::probe_vector,
                                    double c = 1.0);

} // namespace qgrad
