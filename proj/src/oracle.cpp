#include "qgrad/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "qgrad/errors.hpp"
#include "qgrad/stencil.hpp"

namespace qgrad {

void QueryLedger::add_theoretical_cost(double units) {
    if (units < 0) throw ParameterError("theoretical cost increment must be non-negative");
    theory_milli_ += static_cast<std::uint64_t>(std::llround(units * 1000.0));
}

double QueryLedger::theoretical_cost() const {
    return static_cast<double>(theory_milli_.load()) / 1000.0;
}

void QueryLedger::reset() {
    simulated_calls_ = 0;
    pointwise_ = 0;
    domain_warnings_ = 0;
    theory_milli_ = 0;
}

LedgerSnapshot snapshot(const QueryLedger& ledger) {
    return {ledger.simulated_oracle_calls(), ledger.pointwise_evaluations(),
            ledger.domain_warnings(), ledger.theoretical_cost()};
}

FunctionOracle::FunctionOracle(int dim, Evaluator evaluator, OracleMetadata meta)
    : d_(dim), eval_(std::move(evaluator)), meta_(std::move(meta)) {
    if (d_ < 1) throw ParameterError("oracle dimension must be positive");
    if (!eval_) throw ParameterError("oracle evaluator must be callable");
}

Complex FunctionOracle::evaluate(std::span<const Complex> z) const {
    if (static_cast<int>(z.size()) != d_)
        throw ParameterError("oracle expects " + std::to_string(d_) + " coordinates, got " +
                             std::to_string(z.size()));
    if (meta_.radius) {
        for (const Complex& zi : z)
            if (std::abs(zi) > *meta_.radius * (1.0 + 1e-12)) {
                ledger_->add_domain_warning();
                break;
            }
    }
    ledger_->add_pointwise(1);
    return eval_(z);
}

std::pair<double, double> FunctionOracle::real_imag(std::span<const Complex> z) const {
    const Complex v = evaluate(z);
    return {v.real(), v.imag()};
}

double FunctionOracle::evaluate_real(std::span<const double> x) const {
    CVector z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = Complex(x[i], 0.0);
    return evaluate(z).real();
}

FunctionOracle FunctionOracle::translated(std::vector<double> x0) const {
    if (static_cast<int>(x0.size()) != d_)
        throw ParameterError("translation offset has wrong dimension");
    FunctionOracle shifted;
    shifted.d_ = d_;
    shifted.meta_ = meta_;
    shifted.meta_.gradient0.reset(); // truths are tied to the original base point
    shifted.meta_.hessian0.reset();
    shifted.ledger_ = ledger_;
    Evaluator inner = eval_;
    shifted.eval_ = [inner, offset = std::move(x0)](std::span<const Complex> z) {
        CVector w(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) w[i] = z[i] + offset[i];
        return inner(w);
    };
    return shifted;
}

PhaseOracleCost cost_of_phase_oracle(const PhaseOracleCostParams& params) {
    PhaseOracleCost cost;
    cost.repetitions = 1;
    if (params.rho > 0.0) {
        if (params.rho >= 1.0) throw ParameterError("failure probability rho must be below 1");
        if (params.d < 1) throw ParameterError("dimension must be positive");
        cost.repetitions = static_cast<int>(
            std::ceil(params.c_T * std::log(static_cast<double>(params.d) / params.rho)));
        if (cost.repetitions < 1) cost.repetitions = 1;
    }
    if (params.method == PhaseOracleCostParams::Method::spectral) {
        if (params.N < 2) throw ParameterError("spectral cost needs N >= 2 circle samples");
        if (!(params.delta > 0.0) || !(params.epsilon > 0.0) || !(params.eta > 0.0))
            throw ParameterError("spectral cost needs positive delta, epsilon, eta");
        cost.per_application = M_PI / (2.0 * params.epsilon * params.delta) +
                               params.N * std::log(params.N / params.eta);
    } else {
        if (params.m < 1) throw ParameterError("finite-difference cost needs m >= 1");
        cost.per_application = 2.0 * params.m + 1.0;
        const StencilCoeffs stencil = second_order_coeffs(params.m);
        double scale = 0.0;
        for (int t = -params.m; t <= params.m; ++t) scale += std::fabs(stencil.coeff(t));
        cost.fractional_scale = scale;
    }
    cost.total = cost.per_application * cost.repetitions;
    return cost;
}

} // namespace qgrad
