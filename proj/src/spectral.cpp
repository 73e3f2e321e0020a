#include "qgrad/spectral.hpp"

#include <cmath>
#include <string>

#include "qgrad/errors.hpp"

namespace qgrad {
namespace {

constexpr double kRealityTolerance = 1e-8;

Complex circle_node(int k, int N) {
    return std::polar(1.0, -2.0 * M_PI * k / N); // w^k with w = e^(-2pi i/N)
}

CVector scaled_point(std::span<const double> x, Complex tau) {
    CVector z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = tau * x[i];
    return z;
}

double take_real(Complex value, const char* what) {
    if (std::fabs(value.imag()) > kRealityTolerance * (1.0 + std::fabs(value.real())))
        throw RealityViolationError(std::string(what) +
                                    " has imaginary residue " + std::to_string(value.imag()) +
                                    "; the function does not map reals to reals");
    return value.real();
}

} // namespace

void SpectralParams::validate() const {
    if (N < 2) throw ParameterError("spectral sampling needs N >= 2, got " + std::to_string(N));
    if (!(delta > 0.0)) throw ParameterError("sampling radius delta must be positive");
    if (!(delta < r_tilde))
        throw ParameterError("sampling radius delta must be below the effective radius r_tilde");
    if (!(kappa >= 0.0)) throw ParameterError("kappa must be non-negative");
}

Complex spectral_coeff(const std::function<Complex(Complex)>& h, const SpectralParams& params,
                       int order) {
    if (params.N < 2) throw ParameterError("spectral sampling needs N >= 2");
    if (order < 0 || order >= params.N)
        throw RangeError("coefficient order must lie in [0, N-1]");
    Complex acc{0.0, 0.0};
    for (int k = 0; k < params.N; ++k) {
        const Complex wk = circle_node(k, params.N);
        acc += std::conj(std::pow(wk, order)) * h(params.delta * wk);
    }
    return acc / (static_cast<double>(params.N) * std::pow(params.delta, order));
}

double spectral_gradient_form(const FunctionOracle& oracle, std::span<const double> x,
                              const SpectralParams& params) {
    if (params.N < 2) throw ParameterError("spectral sampling needs N >= 2");
    Complex acc{0.0, 0.0};
    for (int k = 0; k < params.N; ++k) {
        const Complex wk = circle_node(k, params.N);
        acc += std::conj(wk) * oracle.evaluate(scaled_point(x, params.delta * wk));
    }
    acc /= static_cast<double>(params.N) * params.delta;
    return take_real(acc, "spectral gradient form");
}

double spectral_hessian_form(const FunctionOracle& oracle, std::span<const double> z,
                             const SpectralParams& params) {
    if (params.N < 2) throw ParameterError("spectral sampling needs N >= 2");
    Complex acc{0.0, 0.0};
    for (int k = 0; k < params.N; ++k) {
        const Complex wk = circle_node(k, params.N);
        acc += std::conj(wk * wk) * oracle.evaluate(scaled_point(z, params.delta * wk));
    }
    acc *= 2.0 / (static_cast<double>(params.N) * params.delta * params.delta);
    return take_real(acc, "spectral Hessian form");
}

double spectral_error_bound(const SpectralParams& params, int order) {
    if (!(params.delta > 0.0) || !(params.delta < params.r_tilde))
        throw ParameterError("error bound needs 0 < delta < r_tilde");
    if (params.N < 2) throw ParameterError("error bound needs N >= 2");
    const double rho_n = std::pow(params.delta / params.r_tilde, params.N);
    return params.kappa * std::pow(params.r_tilde, -order) * rho_n / (1.0 - rho_n);
}

int select_N(double epsilon, double kappa, double r, double delta) {
    if (!(epsilon > 0.0)) throw ParameterError("target accuracy must be positive");
    if (!(r > 0.0)) throw ParameterError("convergence radius must be positive");
    if (!(delta > 0.0) || !(delta < 2.0 * r))
        throw ParameterError("sampling radius must satisfy 0 < delta < 2r");
    const double budget = epsilon / (8.0 * 42.0 * M_PI);
    SpectralParams p;
    p.delta = delta;
    p.r_tilde = 2.0 * r;
    p.kappa = kappa;
    for (int N = 2; N <= 4096; ++N) {
        p.N = N;
        if (spectral_error_bound(p, 1) <= budget) return N;
    }
    throw ParameterError("no N up to 4096 meets the accuracy budget; enlarge epsilon or shrink delta");
}

double measure_kappa(const FunctionOracle& oracle, std::span<const double> x,
                     const SpectralParams& params) {
    double max_mod = 0.0;
    for (int k = 0; k < params.N; ++k) {
        const Complex wk = circle_node(k, params.N);
        max_mod = std::max(max_mod, std::abs(oracle.evaluate(scaled_point(x, params.delta * wk))));
    }
    return 2.0 * max_mod;
}

} // namespace qgrad
