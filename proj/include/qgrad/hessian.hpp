#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qgrad/gradient.hpp"
#include "qgrad/grid.hpp"
#include "qgrad/oracle.hpp"
#include "qgrad/rng.hpp"

namespace qgrad {

/// Integer matrix with entries in the symmetric residue range
/// [-(q-1)/2, (q-1)/2]; the real form matrix it encodes is entries/q.
struct ZqMatrix {
    std::int64_t q = 3;
    std::vector<std::vector<std::int64_t>> entries;

    int dim() const { return static_cast<int>(entries.size()); }
    bool symmetric() const;
    int row_nonzeros(int row) const;
    int total_nonzeros() const;
};

/// Reduce v into the symmetric residue range mod q.
std::int64_t symmetric_mod(std::int64_t v, std::int64_t q);

struct HessianJob {
    FunctionOracle oracle;
    DerivativeMethod method = DerivativeMethod::spectral;
    double epsilon = 0.1;
    double rho = 0.1;
    double M = 1.0; ///< bound on the Hessian max-norm

    std::optional<int> N;
    std::optional<int> m;
    double c_T = 3.0;
    double eta = 1e-2;
    std::int64_t amplitude_cap = default_amplitude_cap();

    void validate() const;
};

struct HessianDenseResult {
    Matrix hessian;             ///< symmetrized estimate
    double presym_asymmetry = 0.0; ///< max-norm of (raw - raw^T) before symmetrizing
    std::vector<GradientResult> columns;
    LedgerSnapshot ledger;
};

/// Column-by-column reduction: for each basis probe e_i the difference field
/// (Form(x+e_i) - Form(x))/2 is linear in x with slope H e_i, and the
/// gradient pipeline decodes it. Each column runs at failure budget
/// rho' = d*rho/(d+rho).
HessianDenseResult estimate_hessian_dense(const HessianJob& job, Rng& rng);

/// Prepares all d column states once so seed sweeps only redraw samples.
class HessianDensePipeline {
public:
    explicit HessianDensePipeline(const HessianJob& job);
    HessianDenseResult run(Rng& rng) const;
    const GradientPlan& column_plan() const { return plan_; }
    /// Theoretical base-oracle queries per run: d columns, T repetitions
    /// each, two form evaluations per phase application.
    double theory_cost_per_run() const { return theory_per_run_; }

private:
    int d_ = 0;
    GradientPlan plan_;
    double theory_per_run_ = 0.0;
    std::shared_ptr<QueryLedger> ledger_;
    std::vector<GradientPipeline> columns_;
};

enum class ProbeKind { binary, signed_unit };

struct SparseRecoveryParams {
    std::int64_t q = 7;
    int probe_count = 0;   ///< 0: use ceil(c_k * s * log(q*d))
    double c_k = 2.0;
    ProbeKind probe_kind = ProbeKind::binary;
    int support_bound = 1;               ///< s, per row and column
    std::optional<int> total_nonzeros;   ///< optional budget m; sets the dense-row threshold
    int repetitions = 0;                 ///< per-probe majority votes; 0: auto O(log d)
    double relaxed_probe_alpha = 0.0;    ///< >0 switches probes to {0,1}^d/(alpha*s)

    int effective_support(int d) const;
    int effective_probes(int d) const;
    int effective_repetitions(int d) const;
};

/// Measures (L y mod q) coordinate-by-coordinate from the product state of the
/// probe difference field: axis j carries phase k*(L y)_j / q, the inverse
/// length-q DFT concentrates on the residue, and `repetitions` Born samples
/// are majority-voted. `axis_phase(j, x)` must return the phase (in 2*pi
/// units) of the difference field at x = value * e_j.
std::vector<std::int64_t> sparse_probe_measure(
    const std::function<double(int, double)>& axis_phase, const SqSpec& spec,
    const SparseRecoveryParams& params, Rng& rng, QueryLedger* ledger = nullptr);

/// Per-row support enumeration plus modular Gaussian elimination. A row is
/// accepted only when exactly one candidate matches every residue; rows with
/// no sparse candidate are re-measured through `measure_dense` with
/// standard-basis probes. Two consistent candidates raise
/// AmbiguousRecoveryError; contract violations (asymmetry, sparsity beyond
/// the declaration) raise InconsistentResiduesError.
ZqMatrix recover_sparse_rows(
    const std::vector<std::vector<std::int64_t>>& probes,
    const std::vector<std::vector<std::int64_t>>& residues, int d,
    const SparseRecoveryParams& params,
    const std::function<std::vector<std::int64_t>(const std::vector<std::int64_t>&)>& measure_dense = {});

struct SparseHessianJob {
    FunctionOracle oracle;
    DerivativeMethod method = DerivativeMethod::spectral;
    double epsilon = 0.1;
    double M = 1.0;
    double c_q = 4.0;
    std::optional<std::int64_t> q;       ///< override the prime choice
    SparseRecoveryParams recovery;
    std::optional<double> declared_noise; ///< eta of the H = M*(Htilde + E) split
    double a = 1.0;                       ///< finite-difference path lattice scale

    void validate() const;
};

struct SparseHessianResult {
    ZqMatrix residues;   ///< recovered L with form matrix M*L/q
    Matrix form;         ///< M * L / q
    Matrix hessian;      ///< 2 * form (the Hessian of x^T F x at 0)
    std::int64_t q = 0;
    int probes_used = 0;
    std::uint64_t applications = 0; ///< superposition calls including repetitions
    double counted_queries = 0.0;   ///< applications * per-application oracle power
    LedgerSnapshot ledger;
};

/// Probe-based recovery of the q-lattice part of the quadratic form matrix.
/// Spectral path: binary probes, per-application oracle power q/M.
/// Finite-difference path: +-1/sqrt(d) probes, power q*sqrt(d)/(a*M).
SparseHessianResult estimate_hessian_sparse(const SparseHessianJob& job, Rng& rng);

} // namespace qgrad
