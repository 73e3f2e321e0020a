#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qgrad/grid.hpp"
#include "qgrad/oracle.hpp"
#include "qgrad/rng.hpp"
#include "qgrad/sampler.hpp"
#include "qgrad/spectral.hpp"
#include "qgrad/stencil.hpp"

namespace qgrad {

enum class DerivativeMethod { spectral, finite_difference };

/// End-to-end gradient estimation job. M bounds the max-norm of the gradient;
/// optional overrides pin parameters the planner would otherwise derive from
/// the oracle metadata.
struct GradientJob {
    FunctionOracle oracle;
    DerivativeMethod method = DerivativeMethod::spectral;
    double epsilon = 0.1;
    double rho = 0.1;
    double M = 1.0;
    double a = 1.0; ///< lattice scale; the finite-difference planner replaces it

    std::optional<int> N;
    std::optional<int> m;
    std::optional<double> delta;
    std::optional<double> radius;
    std::optional<double> kappa;
    double c_T = 3.0;
    double eta = 1e-2; ///< oracle precision entering the theoretical cost only
    std::int64_t amplitude_cap = default_amplitude_cap();

    void validate() const;
};

struct GradientPlan {
    int n_eps = 1;
    int n_M = 0;
    int n = 1;
    double a = 1.0;
    int T = 1;
    bool clamped_n_eps = false; ///< epsilon >= 4/a would have driven n_eps below 1
    // spectral
    int N = 0;
    double delta = 0.0;
    double r_tilde = 0.0;
    double kappa = 0.0;
    // finite difference
    int m = 0;

    GridSpec grid(int d) const { return GridSpec(n, d, 1.0); }
};

/// Resolves n_eps = ceil(log2(4/(a*eps))), n_M = ceil(log2(3*a*M)),
/// n = n_eps + n_M, the repetition count T = ceil(c_T * log(d/rho)), and the
/// method parameters (N via select_N, or (m, a) via select_findiff_params).
GradientPlan plan(const GradientJob& job);

/// (lattice value of label) * 2^n_M / a: the unique scaling under which a
/// lattice-exact linear phase decodes the slope itself.
double decode_axis(const GridSpec& grid, std::int64_t label, int n_M, double a);

struct GradientResult {
    std::vector<double> g;
    std::vector<std::int64_t> labels;
    GradientPlan plan;
    LedgerSnapshot ledger;
};

/// Prepares the derivative-form phase field and the transformed state once;
/// each run draws fresh repetitions and decodes. Seeds drive runs, so one
/// pipeline serves a whole seed sweep without rebuilding the lattice.
class GradientPipeline {
public:
    GradientPipeline(const GradientJob& job, GradientPlan resolved_plan);
    explicit GradientPipeline(const GradientJob& job);

    /// Pipeline over an externally supplied linearized form F(z) evaluated at
    /// the scaled point z = a*x (the Hessian column reduction enters here).
    GradientPipeline(std::function<double(std::span<const double>)> form, int d,
                     GradientPlan resolved_plan, std::shared_ptr<QueryLedger> ledger,
                     std::int64_t amplitude_cap, double theory_cost_per_rep);

    GradientResult run(Rng& rng) const;
    const GradientPlan& plan() const { return plan_; }

private:
    void prepare(const std::function<double(std::span<const double>)>& form, int d,
                 std::int64_t amplitude_cap);

    GradientPlan plan_;
    std::shared_ptr<QueryLedger> ledger_;
    double theory_cost_per_rep_ = 0.0;
    StateVector transformed_;
};

/// One-shot pipeline run.
GradientResult estimate_gradient(const GradientJob& job, Rng& rng);

/// The derivative form F(z) ~ grad f(0) . z the job's method prescribes,
/// evaluated at z = a*x.
std::function<double(std::span<const double>)> gradient_form(const GradientJob& job,
                                                             const GradientPlan& plan);

/// Theoretical per-repetition query cost for the job's phase oracle.
double gradient_theory_cost_per_rep(const GradientJob& job, const GradientPlan& plan);

} // namespace qgrad
