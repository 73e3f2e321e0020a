#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qgrad/corpus.hpp"
#include "qgrad/errors.hpp"
#include "qgrad/gradient.hpp"
#include "qgrad/grid.hpp"
#include "qgrad/hessian.hpp"
#include "qgrad/rng.hpp"
#include "qgrad/sampler.hpp"
#include "qgrad/spectral.hpp"
#include "qgrad/stencil.hpp"

namespace py = pybind11;
using namespace qgrad;

namespace {

FunctionOracle oracle_from_callable(int d, const py::function& fn) {
    OracleMetadata meta;
    meta.radius = 1.0;
    return FunctionOracle(
        d,
        [fn](std::span<const Complex> z) {
            py::gil_scoped_acquire gil;
            std::vector<Complex> point(z.begin(), z.end());
            return fn(point).cast<Complex>();
        },
        meta);
}

py::dict gradient_result_to_dict(const GradientResult& res) {
    py::dict out;
    out["g"] = res.g;
    out["labels"] = res.labels;
    out["n"] = res.plan.n;
    out["n_eps"] = res.plan.n_eps;
    out["n_M"] = res.plan.n_M;
    out["T"] = res.plan.T;
    out["N"] = res.plan.N;
    out["m"] = res.plan.m;
    out["a"] = res.plan.a;
    return out;
}

} // namespace

PYBIND11_MODULE(_qgrad, m) {
    m.doc() = "lattice-sampling gradient and Hessian estimation";

    py::register_exception<RangeError>(m, "RangeError");
    py::register_exception<NotAGridPointError>(m, "NotAGridPointError");
    py::register_exception<ParameterError>(m, "ParameterError");
    py::register_exception<ResourceError>(m, "ResourceError");
    py::register_exception<AmbiguousRecoveryError>(m, "AmbiguousRecoveryError");
    py::register_exception<InconsistentResiduesError>(m, "InconsistentResiduesError");

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<int, int, double>(), py::arg("n"), py::arg("d"), py::arg("a") = 1.0)
        .def_readonly("n", &GridSpec::n)
        .def_readonly("d", &GridSpec::d)
        .def_readonly("a", &GridSpec::a)
        .def("min_label", &GridSpec::min_label)
        .def("max_label", &GridSpec::max_label);

    m.def("label_to_value", &label_to_value, py::arg("spec"), py::arg("label"));
    m.def("value_to_label", &value_to_label, py::arg("spec"), py::arg("value"));
    m.def("nearest_label", &nearest_label, py::arg("spec"), py::arg("value"));
    m.def(
        "sq_value",
        [](std::int64_t q, int d, double a, std::int64_t k) { return sq_value(SqSpec(q, d, a), k); },
        py::arg("q"), py::arg("d"), py::arg("a"), py::arg("k"));

    m.def(
        "second_order_coeffs",
        [](int half_width) {
            const StencilCoeffs s = second_order_coeffs(half_width);
            std::vector<double> out;
            for (int t = -s.m; t <= s.m; ++t) out.push_back(s.coeff(t));
            return out;
        },
        py::arg("m"), "degree-2m central-difference coefficients for the second derivative");
    m.def(
        "first_order_coeffs",
        [](int half_width) {
            const StencilCoeffs s = first_order_coeffs(half_width);
            std::vector<double> out;
            for (int t = -s.m; t <= s.m; ++t) out.push_back(s.coeff(t));
            return out;
        },
        py::arg("m"));
    m.def(
        "coeff_bound_check",
        [](int half_width, int k) {
            const CoeffBoundCheck c = coeff_bound_check(half_width, k);
            return py::make_tuple(c.lhs, c.rhs, c.holds);
        },
        py::arg("m"), py::arg("k"));
    m.def(
        "abs_sum_check",
        [](int half_width) {
            const AbsSumCheck c = abs_sum_check(half_width);
            py::dict out;
            out["abs_sum"] = c.abs_sum;
            out["signed_sum"] = c.signed_sum;
            out["partial_zeta"] = c.partial_zeta;
            out["holds_partial"] = c.holds_partial;
            out["holds_pi2_over_6"] = c.holds_pi2_over_6;
            out["holds_pi2_over_3"] = c.holds_pi2_over_3;
            return out;
        },
        py::arg("m"));
    m.def("error_bound_1d", &error_bound_1d, py::arg("m"), py::arg("x_step"),
          py::arg("f_deriv_bound"));
    m.def("error_bound_multivariate", &error_bound_multivariate, py::arg("m"), py::arg("a"),
          py::arg("c"), py::arg("d"));

    m.def(
        "spectral_error_bound",
        [](int N, double delta, double r_tilde, double kappa, int order) {
            SpectralParams p;
            p.N = N;
            p.delta = delta;
            p.r_tilde = r_tilde;
            p.kappa = kappa;
            return spectral_error_bound(p, order);
        },
        py::arg("N"), py::arg("delta"), py::arg("r_tilde"), py::arg("kappa"), py::arg("order") = 1);
    m.def("select_N", &select_N, py::arg("epsilon"), py::arg("kappa"), py::arg("r"),
          py::arg("delta"));
    m.def(
        "spectral_gradient_form",
        [](const py::function& f, int d, std::vector<double> x, int N, double delta) {
            SpectralParams p;
            p.N = N;
            p.delta = delta;
            p.r_tilde = 2.0 * delta;
            p.kappa = 1.0;
            return spectral_gradient_form(oracle_from_callable(d, f), x, p);
        },
        py::arg("f"), py::arg("d"), py::arg("x"), py::arg("N"), py::arg("delta"),
        "circle-sampled directional derivative of a python callable of complex inputs");

    m.def("corpus_names", [] {
        std::vector<std::string> names;
        for (const auto& e : corpus()) names.push_back(e.name);
        return names;
    });
    m.def(
        "corpus_truth",
        [](const std::string& name) {
            const CorpusEntry entry = corpus_lookup(name);
            py::dict out;
            out["d"] = entry.oracle.dim();
            if (entry.oracle.meta().gradient0) out["gradient0"] = *entry.oracle.meta().gradient0;
            if (entry.oracle.meta().hessian0) out["hessian0"] = *entry.oracle.meta().hessian0;
            return out;
        },
        py::arg("name"));

    m.def(
        "estimate_gradient",
        [](const std::string& function, double epsilon, double rho, double M, std::uint64_t seed,
           const std::string& method) {
            GradientJob job;
            job.oracle = corpus_lookup(function).oracle;
            job.method = method == "findiff" ? DerivativeMethod::finite_difference
                                             : DerivativeMethod::spectral;
            job.epsilon = epsilon;
            job.rho = rho;
            job.M = M > 0.0 ? M : job.oracle.meta().gradient_bound.value_or(1.0);
            Rng rng(seed);
            return gradient_result_to_dict(estimate_gradient(job, rng));
        },
        py::arg("function"), py::arg("epsilon") = 0.1, py::arg("rho") = 0.1, py::arg("M") = 0.0,
        py::arg("seed") = 1, py::arg("method") = "spectral");

    m.def(
        "estimate_hessian_dense",
        [](const std::string& function, double epsilon, double rho, double M, std::uint64_t seed,
           const std::string& method) {
            HessianJob job;
            job.oracle = corpus_lookup(function).oracle;
            job.method = method == "findiff" ? DerivativeMethod::finite_difference
                                             : DerivativeMethod::spectral;
            job.epsilon = epsilon;
            job.rho = rho;
            job.M = M > 0.0 ? M : job.oracle.meta().hessian_bound.value_or(1.0);
            Rng rng(seed);
            const HessianDenseResult res = estimate_hessian_dense(job, rng);
            py::dict out;
            out["hessian"] = res.hessian;
            out["presym_asymmetry"] = res.presym_asymmetry;
            return out;
        },
        py::arg("function"), py::arg("epsilon") = 0.1, py::arg("rho") = 0.1, py::arg("M") = 0.0,
        py::arg("seed") = 1, py::arg("method") = "spectral");

    m.def(
        "estimate_hessian_sparse",
        [](const std::string& function, double epsilon, double M, std::int64_t q, int sparsity,
           std::uint64_t seed, const std::string& method) {
            SparseHessianJob job;
            job.oracle = corpus_lookup(function).oracle;
            job.method = method == "findiff" ? DerivativeMethod::finite_difference
                                             : DerivativeMethod::spectral;
            job.epsilon = epsilon;
            job.M = M;
            if (q > 0) job.q = q;
            job.recovery.support_bound = sparsity;
            Rng rng(seed);
            const SparseHessianResult res = estimate_hessian_sparse(job, rng);
            py::dict out;
            out["residues"] = res.residues.entries;
            out["form"] = res.form;
            out["hessian"] = res.hessian;
            out["q"] = res.q;
            out["probes"] = res.probes_used;
            out["applications"] = res.applications;
            out["counted_queries"] = res.counted_queries;
            return out;
        },
        py::arg("function"), py::arg("epsilon") = 0.1, py::arg("M") = 1.0, py::arg("q") = 0,
        py::arg("sparsity") = 1, py::arg("seed") = 1, py::arg("method") = "spectral");
}
