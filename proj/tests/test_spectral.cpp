#include <doctest.h>

#include <cmath>
#include <vector>

#include "qgrad/corpus.hpp"
#include "qgrad/errors.hpp"
#include "qgrad/rng.hpp"
#include "qgrad/spectral.hpp"

using namespace qgrad;

namespace {

SpectralParams params(int N, double delta, double r_tilde = 2.0, double kappa = 1.0) {
    SpectralParams p;
    p.N = N;
    p.delta = delta;
    p.r_tilde = r_tilde;
    p.kappa = kappa;
    return p;
}

} // namespace

TEST_CASE("spectral_coeff on monomials: exact mode, annihilation, aliasing") {
    const auto linear = [](Complex t) { return t; };
    for (int N : {2, 4, 9, 16})
        CHECK(spectral_coeff(linear, params(N, 0.5), 1).real() == doctest::Approx(1.0));

    const auto cubic = [](Complex t) { return t * t * t; };
    CHECK(std::abs(spectral_coeff(cubic, params(4, 0.5), 1)) < 1e-15); // 3 != 1 mod 4
    CHECK(spectral_coeff(cubic, params(2, 0.5), 1).real() == doctest::Approx(0.25)); // 3 == 1 mod 2

    CHECK_THROWS_AS(spectral_coeff(linear, params(4, 0.5), 4), RangeError);
}

TEST_CASE("gradient form is exact on linear functions") {
    const FunctionOracle f = make_linear({0.5, -0.25});
    const std::vector<double> x{0.375, -0.125};
    for (int N : {2, 3, 8, 17}) {
        const double F = spectral_gradient_form(f, x, params(N, 0.5));
        CHECK(F == doctest::Approx(0.5 * 0.375 + (-0.25) * (-0.125)).epsilon(1e-14));
    }
}

TEST_CASE("gradient form annihilates x^2 and the Hessian form doubles it") {
    const FunctionOracle sq(1, [](std::span<const Complex> z) { return z[0] * z[0]; });
    const std::vector<double> x{0.3};
    for (int N : {3, 4, 12})
        CHECK(std::fabs(spectral_gradient_form(sq, x, params(N, 0.5))) < 1e-14);
    for (int N : {3, 4, 12})
        CHECK(spectral_hessian_form(sq, x, params(N, 0.5)) == doctest::Approx(2.0 * 0.3 * 0.3));
}

TEST_CASE("Hessian form kills linear and constant functions at N >= 3") {
    const FunctionOracle lin = make_linear({0.7});
    const FunctionOracle cst(1, [](std::span<const Complex>) { return Complex{1.3, 0.0}; });
    const std::vector<double> z{0.25};
    for (int N : {3, 5, 8}) {
        CHECK(std::fabs(spectral_hessian_form(lin, z, params(N, 0.5))) < 1e-13);
        CHECK(std::fabs(spectral_hessian_form(cst, z, params(N, 0.5))) < 1e-13);
    }
}

TEST_CASE("a function with nonzero imaginary part on the reals is rejected") {
    const FunctionOracle bad(1, [](std::span<const Complex> z) { return Complex{0.0, 1.0} * z[0]; });
    const std::vector<double> x{0.25};
    CHECK_THROWS_AS(spectral_gradient_form(bad, x, params(8, 0.5)), RealityViolationError);
}

TEST_CASE("error bound closed form and shape") {
    CHECK(spectral_error_bound(params(8, 1.0, 2.0, 1.0), 1) == doctest::Approx(1.0 / 510.0));
    for (int N = 2; N < 20; ++N)
        CHECK(spectral_error_bound(params(N + 1, 1.0, 2.0, 1.0), 1) <
              spectral_error_bound(params(N, 1.0, 2.0, 1.0), 1));
    CHECK(spectral_error_bound(params(8, 1.0, 2.0, 2.0), 1) ==
          doctest::Approx(2.0 * spectral_error_bound(params(8, 1.0, 2.0, 1.0), 1)));
    CHECK_THROWS_AS(spectral_error_bound(params(8, 2.0, 2.0, 1.0), 1), ParameterError);
}

TEST_CASE("select_N: frozen example, halving, zero function") {
    CHECK(select_N(0.1, 1.0, 1.0, 1.0) == 13);
    // the bound crosses the budget exactly between 12 and 13
    CHECK(spectral_error_bound(params(13, 1.0, 2.0, 1.0), 1) <= 0.1 / (8.0 * 42.0 * M_PI));
    CHECK(spectral_error_bound(params(12, 1.0, 2.0, 1.0), 1) > 0.1 / (8.0 * 42.0 * M_PI));
    CHECK(select_N(0.05, 1.0, 1.0, 1.0) - select_N(0.1, 1.0, 1.0, 1.0) <= 1);
    CHECK(select_N(0.1, 0.0, 1.0, 1.0) == 2);
}

TEST_CASE("gradient form beats the bound on the exp composite") {
    const FunctionOracle f = corpus_lookup("exp_d1").oracle;
    const std::vector<double> x{0.25};
    SpectralParams p = params(16, 1.0, 2.0, std::exp(0.5));
    const double F = spectral_gradient_form(f, x, p);
    CHECK(std::fabs(F - 0.25) <= spectral_error_bound(p, 1));
}

TEST_CASE("measured error stays under the bound with the measured-kappa proxy") {
    Rng rng(5);
    for (const char* name : {"poly_d2", "expquad_d2", "exp_pole_d1", "quartic_d3"}) {
        const FunctionOracle f = corpus_lookup(name).oracle;
        const int d = f.dim();
        const std::vector<double>& truth = *f.meta().gradient0;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> x(d);
            for (int i = 0; i < d; ++i)
                x[i] = (std::floor(rng.uniform() * 64.0) - 32.0 + 0.5) / 64.0; // n=6 lattice point
            SpectralParams p = params(18, 1.0, 2.0);
            p.kappa = measure_kappa(f, x, p);
            double dot = 0.0;
            for (int i = 0; i < d; ++i) dot += truth[i] * x[i];
            const double err = std::fabs(spectral_gradient_form(f, x, p) - dot);
            INFO(name, " trial ", trial);
            CHECK(err <= spectral_error_bound(p, 1) + 1e-13);
        }
    }
}

TEST_CASE("error decays geometrically on the pole-limited member") {
    const FunctionOracle f = corpus_lookup("exp_pole_d1").oracle;
    const double truth = (*f.meta().gradient0)[0];
    const std::vector<double> x{1.0};
    std::vector<double> ns, logs;
    for (int N = 4; N <= 24; ++N) {
        SpectralParams p = params(N, 1.0, 2.0, *f.meta().kappa);
        const double err = std::fabs(spectral_gradient_form(f, x, p) - truth);
        REQUIRE(err > 0.0);
        CHECK(err <= spectral_error_bound(p, 1));
        ns.push_back(N);
        logs.push_back(std::log(err));
    }
    // least-squares slope of log(err) vs N
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double count = static_cast<double>(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        sx += ns[i];
        sy += logs[i];
        sxx += ns[i] * ns[i];
        sxy += ns[i] * logs[i];
    }
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    CHECK(std::fabs(slope - std::log(0.5)) <= 0.15 * std::fabs(std::log(0.5)));
}

TEST_CASE("gradient form is exact on polynomials with no mode-1 aliasing") {
    // degrees {2,3,4} with N=16 leave only the true degree-1 mode
    const FunctionOracle f(1, [](std::span<const Complex> z) {
        const Complex t = z[0];
        return 0.4 * t - 0.3 * t * t + 0.2 * t * t * t + 0.1 * t * t * t * t;
    });
    const std::vector<double> x{0.4375};
    const double F = spectral_gradient_form(f, x, params(16, 0.5));
    CHECK(F == doctest::Approx(0.4 * 0.4375).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
    SpectralParams p = params(1, 0.5);
    CHECK_THROWS_AS(p.validate(), ParameterError);
    p = params(4, 3.0);
    CHECK_THROWS_AS(p.validate(), ParameterError);
    const FunctionOracle lin = make_linear({1.0});
    CHECK_THROWS_AS(spectral_gradient_form(lin, std::vector<double>{0.1}, params(1, 0.5)),
                    ParameterError);
}
