#pragma once

#include <atomic>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qgrad {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;
using Matrix = std::vector<std::vector<double>>;

/// Dual query accounting: superposition phase-oracle applications are the
/// quantity the cost statements are written in; pointwise evaluations record
/// the classical simulation work and are kept strictly separate.
class QueryLedger {
public:
    void add_simulated_calls(std::uint64_t n) { simulated_calls_ += n; }
    void add_pointwise(std::uint64_t n) { pointwise_ += n; }
    void add_domain_warning() { domain_warnings_ += 1; }
    void add_theoretical_cost(double units);

    std::uint64_t simulated_oracle_calls() const { return simulated_calls_.load(); }
    std::uint64_t pointwise_evaluations() const { return pointwise_.load(); }
    std::uint64_t domain_warnings() const { return domain_warnings_.load(); }
    double theoretical_cost() const;

    void reset();

private:
    std::atomic<std::uint64_t> simulated_calls_{0};
    std::atomic<std::uint64_t> pointwise_{0};
    std::atomic<std::uint64_t> domain_warnings_{0};
    std::atomic<std::uint64_t> theory_milli_{0}; // fixed-point so increments stay atomic
};

struct LedgerSnapshot {
    std::uint64_t simulated_oracle_calls = 0;
    std::uint64_t pointwise_evaluations = 0;
    std::uint64_t domain_warnings = 0;
    double theoretical_cost = 0.0;
};

LedgerSnapshot snapshot(const QueryLedger& ledger);

/// Closed-form ground truth and analytic metadata attached to corpus members.
struct OracleMetadata {
    std::optional<std::vector<double>> gradient0;  ///< exact gradient at 0
    std::optional<Matrix> hessian0;                ///< exact Hessian at 0
    std::optional<double> radius;                  ///< polydisc convergence radius r
    std::optional<double> kappa;                   ///< magnitude bound on the relevant circle
    std::optional<double> gradient_bound;          ///< M with  max-norm(grad) <= M
    std::optional<double> hessian_bound;           ///< M with  max-norm(Hessian) <= M
    std::optional<double> gevrey_c;                ///< c in the derivative growth c^k k^(k/2)
    std::optional<double> deriv_bound;             ///< B bounding directional derivatives of order 2m+1
    bool real_on_real = true;
};

/// Evaluatable analytic function f: C^d -> C together with its ledger.
/// Copies share the ledger, so estimator pipelines can hand oracles around
/// freely while the caller keeps one view of the counters.
class FunctionOracle {
public:
    using Evaluator = std::function<Complex(std::span<const Complex>)>;

    FunctionOracle() = default;
    FunctionOracle(int dim, Evaluator evaluator, OracleMetadata meta = {});

    int dim() const { return d_; }
    const OracleMetadata& meta() const { return meta_; }
    QueryLedger& ledger() const { return *ledger_; }
    std::shared_ptr<QueryLedger> ledger_ptr() const { return ledger_; }

    /// f(z); counts one pointwise evaluation. Points outside a declared
    /// convergence polydisc record a domain warning and still evaluate.
    Complex evaluate(std::span<const Complex> z) const;
    Complex evaluate(const CVector& z) const { return evaluate(std::span<const Complex>(z)); }

    /// (Re f, Im f) at z.
    std::pair<double, double> real_imag(std::span<const Complex> z) const;

    /// Evaluation at a real point, returning the real part.
    double evaluate_real(std::span<const double> x) const;

    /// Oracle for g(z) = f(z + x0): estimation pipelines always work at the
    /// origin and reach other base points through this composition.
    FunctionOracle translated(std::vector<double> x0) const;

private:
    int d_ = 0;
    Evaluator eval_;
    OracleMetadata meta_;
    std::shared_ptr<QueryLedger> ledger_ = std::make_shared<QueryLedger>();
};

/// Parameters for the theoretical per-application query cost of the phase
/// oracle that evaluates a derivative form over the whole lattice.
struct PhaseOracleCostParams {
    enum class Method { spectral, finite_difference };
    Method method = Method::spectral;
    // spectral
    int N = 0;
    double delta = 0.0;
    double epsilon = 0.0;
    double eta = 0.0;
    // finite difference
    int m = 0;
    // repetition count inputs
    int d = 1;
    double rho = 0.0;
    double c_T = 3.0;
};

struct PhaseOracleCost {
    double per_application = 0.0; ///< queries to each underlying oracle per application
    int repetitions = 1;          ///< T from ceil(c_T * log(d/rho)), 1 when rho unset
    double total = 0.0;           ///< per_application * repetitions
    double fractional_scale = 0.0; ///< sum of |stencil coefficients| (finite difference only)
};

/// Spectral: per application pi/(2*eps*delta) + N*log(N/eta) queries to each
/// of the real- and imaginary-part oracles. Finite difference: 2m+1
/// evaluation points per application; the coefficient-magnitude scale of the
/// fractional-oracle construction is reported alongside.
PhaseOracleCost cost_of_phase_oracle(const PhaseOracleCostParams& params);

} // namespace qgrad
