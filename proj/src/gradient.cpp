#include "qgrad/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "qgrad/errors.hpp"

namespace qgrad {

void GradientJob::validate() const {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
    if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0, 1)");
    if (!(M > 0.0)) throw ParameterError("gradient bound M must be positive");
    if (!(epsilon < M))
        throw ParameterError("epsilon must be below the gradient bound M (epsilon=" +
                             std::to_string(epsilon) + ", M=" + std::to_string(M) + ")");
    if (!(a > 0.0)) throw ParameterError("lattice scale a must be positive");
}

GradientPlan plan(const GradientJob& job) {
    job.validate();
    const int d = job.oracle.dim();
    GradientPlan p;
    p.a = job.a;

    if (job.method == DerivativeMethod::finite_difference) {
        const double B = job.oracle.meta().deriv_bound.value_or(1.0);
        const double R = job.radius.value_or(job.oracle.meta().radius.value_or(1.0));
        const FindiffParams fp = select_findiff_params(d, B, job.epsilon, R);
        p.m = job.m.value_or(fp.m);
        p.a = fp.a;
    } else {
        const double r = job.radius.value_or(job.oracle.meta().radius.value_or(1.0));
        const double kappa = job.kappa.value_or(job.oracle.meta().kappa.value_or(1.0));
        p.delta = job.delta.value_or(r); // the gradient path samples at delta = r
        p.r_tilde = 2.0 * r;
        p.kappa = kappa;
        p.N = job.N.value_or(select_N(job.epsilon, kappa, r, p.delta));
    }

    const double n_eps_raw = std::log2(4.0 / (p.a * job.epsilon));
    p.n_eps = static_cast<int>(std::ceil(n_eps_raw));
    if (p.n_eps < 1) {
        p.n_eps = 1;
        p.clamped_n_eps = true;
    }
    p.n_M = static_cast<int>(std::ceil(std::log2(3.0 * p.a * job.M)));
    p.n = p.n_eps + p.n_M;
    if (p.n < 1) p.n = 1;

    p.T = static_cast<int>(std::ceil(job.c_T * std::log(static_cast<double>(d) / job.rho)));
    if (p.T < 1) p.T = 1;

    const std::int64_t total_bits = static_cast<std::int64_t>(p.n) * d;
    if (total_bits >= 62 || (std::int64_t{1} << total_bits) > job.amplitude_cap)
        throw ResourceError("lattice needs 2^" + std::to_string(total_bits) +
                            " amplitudes, beyond the cap of " + std::to_string(job.amplitude_cap) +
                            "; reduce the dimension, loosen epsilon, or lower M");
    return p;
}

double decode_axis(const GridSpec& grid, std::int64_t label, int n_M, double a) {
    return label_to_value(grid, label) * std::ldexp(1.0, n_M) / a;
}

std::function<double(std::span<const double>)> gradient_form(const GradientJob& job,
                                                             const GradientPlan& plan) {
    if (job.method == DerivativeMethod::finite_difference) {
        return [oracle = job.oracle, coeffs = first_order_coeffs(plan.m)](
                   std::span<const double> z) { return apply_stencil(oracle, z, coeffs); };
    }
    SpectralParams params;
    params.N = plan.N;
    params.delta = plan.delta;
    params.r_tilde = plan.r_tilde;
    params.kappa = plan.kappa;
    return [oracle = job.oracle, params](std::span<const double> z) {
        return spectral_gradient_form(oracle, z, params);
    };
}

double gradient_theory_cost_per_rep(const GradientJob& job, const GradientPlan& plan) {
    PhaseOracleCostParams cp;
    if (job.method == DerivativeMethod::finite_difference) {
        cp.method = PhaseOracleCostParams::Method::finite_difference;
        cp.m = plan.m;
    } else {
        cp.method = PhaseOracleCostParams::Method::spectral;
        cp.N = plan.N;
        cp.delta = plan.delta;
        cp.epsilon = job.epsilon;
        cp.eta = job.eta;
    }
    return cost_of_phase_oracle(cp).per_application;
}

GradientPipeline::GradientPipeline(const GradientJob& job, GradientPlan resolved_plan)
    : plan_(std::move(resolved_plan)),
      ledger_(job.oracle.ledger_ptr()),
      theory_cost_per_rep_(gradient_theory_cost_per_rep(job, plan_)) {
    prepare(gradient_form(job, plan_), job.oracle.dim(), job.amplitude_cap);
}

GradientPipeline::GradientPipeline(const GradientJob& job) : GradientPipeline(job, qgrad::plan(job)) {}

GradientPipeline::GradientPipeline(std::function<double(std::span<const double>)> form, int d,
                                   GradientPlan resolved_plan, std::shared_ptr<QueryLedger> ledger,
                                   std::int64_t amplitude_cap, double theory_cost_per_rep)
    : plan_(std::move(resolved_plan)), ledger_(std::move(ledger)), theory_cost_per_rep_(theory_cost_per_rep) {
    prepare(form, d, amplitude_cap);
}

void GradientPipeline::prepare(const std::function<double(std::span<const double>)>& form, int d,
                               std::int64_t amplitude_cap) {
    const GridSpec grid = plan_.grid(d);
    const double phase_scale = std::ldexp(1.0, plan_.n_eps);
    const double a = plan_.a;
    PhaseField field{grid, [form, phase_scale, a, d](std::span<const double> x) {
                         std::vector<double> z(x.size());
                         for (int i = 0; i < d; ++i) z[static_cast<std::size_t>(i)] = a * x[static_cast<std::size_t>(i)];
                         return phase_scale * form(z);
                     }};
    transformed_ = inverse_qft_axiswise(build_state(field, amplitude_cap));
}

GradientResult GradientPipeline::run(Rng& rng) const {
    const int d = transformed_.axes();
    const GridSpec grid = plan_.grid(d);
    std::vector<std::vector<std::int64_t>> samples(static_cast<std::size_t>(d));
    for (int t = 0; t < plan_.T; ++t) {
        const MeasurementOutcome out = sample_outcome(transformed_, rng);
        for (int ax = 0; ax < d; ++ax)
            samples[static_cast<std::size_t>(ax)].push_back(out.labels[static_cast<std::size_t>(ax)]);
        if (ledger_) ledger_->add_simulated_calls(1);
    }
    if (ledger_) ledger_->add_theoretical_cost(theory_cost_per_rep_ * plan_.T);

    GradientResult result;
    result.plan = plan_;
    result.labels.resize(static_cast<std::size_t>(d));
    result.g.resize(static_cast<std::size_t>(d));
    const double decode_limit = std::ldexp(1.0, plan_.n_M) / (2.0 * plan_.a) + 1e-12;
    for (int ax = 0; ax < d; ++ax) {
        auto& column = samples[static_cast<std::size_t>(ax)];
        std::sort(column.begin(), column.end());
        const std::int64_t label = column[static_cast<std::size_t>((plan_.T - 1) / 2)];
        result.labels[static_cast<std::size_t>(ax)] = label;
        const double value = decode_axis(grid, label, plan_.n_M, plan_.a);
        if (std::fabs(value) > decode_limit)
            throw RangeError("decoded slope exceeds the representable range");
        result.g[static_cast<std::size_t>(ax)] = value;
    }
    if (ledger_) result.ledger = snapshot(*ledger_);
    return result;
}

GradientResult estimate_gradient(const GradientJob& job, Rng& rng) {
    return GradientPipeline(job).run(rng);
}

} // namespace qgrad
