#pragma once

#include <functional>
#include <span>

#include "qgrad/oracle.hpp"

namespace qgrad {

/// Circle-sampling parameters. delta is the sampling radius, r_tilde the
/// effective convergence radius entering the bound, kappa the magnitude
/// bound on the circle of radius r_tilde.
struct SpectralParams {
    int N = 8;
    double delta = 0.5;
    double r_tilde = 1.0;
    double kappa = 1.0;

    void validate() const;
};

/// c_n / delta^n with c_n = (1/N) sum_k w^(-kn) h(delta w^k), w = e^(-2pi i/N).
/// h is the restriction of the target function to one effective variable.
/// Summation runs in ascending k so results are bit-stable.
Complex spectral_coeff(const std::function<Complex(Complex)>& h, const SpectralParams& params,
                       int order);

/// F(x) = (1/(N delta)) sum_k w^(-k) f(delta w^k x), the circle-sampled
/// approximation of grad f(0) . x. Throws RealityViolationError when the
/// imaginary residue exceeds 1e-8 relative, which signals a function that
/// does not map reals to reals.
double spectral_gradient_form(const FunctionOracle& oracle, std::span<const double> x,
                              const SpectralParams& params);

/// (2/(N delta^2)) sum_k w^(-2k) f(delta w^k z), approximating z^T H_f(0) z.
double spectral_hessian_form(const FunctionOracle& oracle, std::span<const double> z,
                             const SpectralParams& params);

/// kappa * r_tilde^(-order) * rho^N / (1 - rho^N) with rho = delta/r_tilde.
double spectral_error_bound(const SpectralParams& params, int order);

/// Smallest N >= 2 whose order-1 error bound with r_tilde = 2r meets the
/// lattice deviation budget epsilon/(8*42*pi). With delta = r this is
/// ceil(log2(1 + 4*42*pi*kappa/(epsilon*r))).
int select_N(double epsilon, double kappa, double r, double delta);

/// Max sampled modulus on the delta-circle times a safety factor 2; the
/// measurement proxy for kappa when no declared value is available.
double measure_kappa(const FunctionOracle& oracle, std::span<const double> x,
                     const SpectralParams& params);

} // namespace qgrad
