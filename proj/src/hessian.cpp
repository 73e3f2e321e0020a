#include "qgrad/hessian.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "qgrad/errors.hpp"
#include "qgrad/spectral.hpp"
#include "qgrad/stencil.hpp"

namespace qgrad {
namespace {

constexpr double kDeviationBudgetFactor = 8.0 * 42.0 * M_PI;

/// Smallest N >= 3 with 2*kappa*rt^-2 * rho^N/(1-rho^N) within the budget.
int select_hessian_N(double epsilon, double kappa, double r_tilde, double delta) {
    const double budget = epsilon / kDeviationBudgetFactor;
    SpectralParams p;
    p.delta = delta;
    p.r_tilde = r_tilde;
    p.kappa = kappa;
    for (int N = 3; N <= 4096; ++N) {
        p.N = N;
        if (2.0 * spectral_error_bound(p, 2) <= budget) return N;
    }
    throw ParameterError("no N up to 4096 meets the Hessian accuracy budget");
}

struct HessianForm {
    std::function<double(std::span<const double>)> eval; ///< approximates z^T H_f(0) z
    double theory_per_eval = 0.0;
    int N = 0;
    int m = 0;
    double a = 1.0; ///< lattice scale of the decoding grid
};

HessianForm make_hessian_form(const FunctionOracle& oracle, DerivativeMethod method,
                              double epsilon, std::optional<int> N_override,
                              std::optional<int> m_override, double eta) {
    HessianForm form;
    const int d = oracle.dim();
    if (method == DerivativeMethod::finite_difference) {
        const double B = oracle.meta().deriv_bound.value_or(1.0);
        const double R = oracle.meta().radius.value_or(1.0);
        const FindiffParams fp = select_findiff_params(d, B, epsilon, R);
        form.m = m_override.value_or(fp.m);
        form.a = fp.a;
        if (B > 0.0 && form.m < std::log(d * B / epsilon))
            throw ParameterError(
                "finite-difference Hessian estimation requires m >= log(d*B/epsilon); got m=" +
                std::to_string(form.m));
        form.eval = [oracle, coeffs = second_order_coeffs(form.m)](std::span<const double> z) {
            return apply_stencil(oracle, z, coeffs);
        };
        form.theory_per_eval = 2.0 * form.m + 1.0;
    } else {
        const double r = oracle.meta().radius.value_or(1.0);
        const double kappa = oracle.meta().kappa.value_or(1.0);
        SpectralParams params;
        params.r_tilde = 2.0 * r / 3.0; // probe shifts keep |tau*z_j| <= r at this radius
        params.delta = params.r_tilde / 2.0;
        params.kappa = kappa;
        params.N = N_override.value_or(select_hessian_N(epsilon, kappa, params.r_tilde, params.delta));
        form.N = params.N;
        form.eval = [oracle, params](std::span<const double> z) {
            return spectral_hessian_form(oracle, z, params);
        };
        PhaseOracleCostParams cp;
        cp.method = PhaseOracleCostParams::Method::spectral;
        cp.N = params.N;
        cp.delta = params.delta;
        cp.epsilon = epsilon;
        cp.eta = eta;
        form.theory_per_eval = cost_of_phase_oracle(cp).per_application;
    }
    return form;
}

GradientPlan make_column_plan(int d, double epsilon, double rho_col, double M, double a, double c_T,
                         const HessianForm& form, std::int64_t cap) {
    GradientPlan p;
    p.a = a;
    p.N = form.N;
    p.m = form.m;
    const double n_eps_raw = std::log2(4.0 / (a * epsilon));
    p.n_eps = static_cast<int>(std::ceil(n_eps_raw));
    if (p.n_eps < 1) {
        p.n_eps = 1;
        p.clamped_n_eps = true;
    }
    p.n_M = static_cast<int>(std::ceil(std::log2(3.0 * a * M)));
    p.n = std::max(1, p.n_eps + p.n_M);
    p.T = std::max(1, static_cast<int>(std::ceil(c_T * std::log(static_cast<double>(d) / rho_col))));
    const std::int64_t total_bits = static_cast<std::int64_t>(p.n) * d;
    if (total_bits >= 62 || (std::int64_t{1} << total_bits) > cap)
        throw ResourceError("Hessian column lattice needs 2^" + std::to_string(total_bits) +
                            " amplitudes, beyond the cap of " + std::to_string(cap));
    return p;
}

} // namespace

void HessianJob::validate() const {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
    if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0, 1)");
    if (!(M > epsilon)) throw ParameterError("Hessian bound M must exceed epsilon");
}

HessianDensePipeline::HessianDensePipeline(const HessianJob& job) {
    job.validate();
    d_ = job.oracle.dim();
    ledger_ = job.oracle.ledger_ptr();
    const HessianForm form =
        make_hessian_form(job.oracle, job.method, job.epsilon, job.N, job.m, job.eta);
    const double rho_col = d_ * job.rho / (d_ + job.rho);
    plan_ = make_column_plan(d_, job.epsilon, rho_col, job.M, form.a, job.c_T, form, job.amplitude_cap);
    theory_per_run_ = static_cast<double>(d_) * plan_.T * 2.0 * form.theory_per_eval;
    columns_.reserve(static_cast<std::size_t>(d_));
    for (int col = 0; col < d_; ++col) {
        auto column_form = [form, col](std::span<const double> z) {
            std::vector<double> shifted(z.begin(), z.end());
            shifted[static_cast<std::size_t>(col)] += 1.0; // probe e_col
            return 0.5 * (form.eval(shifted) - form.eval(z));
        };
        columns_.emplace_back(column_form, d_, plan_, ledger_, job.amplitude_cap,
                              2.0 * form.theory_per_eval);
    }
}

HessianDenseResult HessianDensePipeline::run(Rng& rng) const {
    HessianDenseResult result;
    Matrix raw(d_, std::vector<double>(d_, 0.0));
    for (int col = 0; col < d_; ++col) {
        Rng column_rng = rng.spawn(static_cast<std::uint64_t>(col));
        GradientResult gr = columns_[static_cast<std::size_t>(col)].run(column_rng);
        for (int row = 0; row < d_; ++row)
            raw[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] =
                gr.g[static_cast<std::size_t>(row)];
        result.columns.push_back(std::move(gr));
    }

    result.hessian.assign(static_cast<std::size_t>(d_), std::vector<double>(static_cast<std::size_t>(d_), 0.0));
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j) {
            result.presym_asymmetry = std::max(
                result.presym_asymmetry,
                std::fabs(raw[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                          raw[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]));
            result.hessian[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                0.5 * (raw[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +
                       raw[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
        }
    result.ledger = snapshot(*ledger_);
    return result;
}

HessianDenseResult estimate_hessian_dense(const HessianJob& job, Rng& rng) {
    return HessianDensePipeline(job).run(rng);
}

bool ZqMatrix::symmetric() const {
    for (int i = 0; i < dim(); ++i)
        for (int j = i + 1; j < dim(); ++j)
            if (entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] !=
                entries[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)])
                return false;
    return true;
}

int ZqMatrix::row_nonzeros(int row) const {
    int count = 0;
    for (std::int64_t v : entries[static_cast<std::size_t>(row)]) count += (v != 0);
    return count;
}

int ZqMatrix::total_nonzeros() const {
    int count = 0;
    for (int r = 0; r < dim(); ++r) count += row_nonzeros(r);
    return count;
}

std::int64_t symmetric_mod(std::int64_t v, std::int64_t q) {
    std::int64_t r = ((v % q) + q) % q;
    if (r > (q - 1) / 2) r -= q;
    return r;
}

int SparseRecoveryParams::effective_support(int d) const {
    if (total_nonzeros) {
        const double threshold =
            std::sqrt(static_cast<double>(*total_nonzeros) /
                      std::log(static_cast<double>(q) * static_cast<double>(d)));
        return std::max(1, static_cast<int>(std::ceil(threshold)));
    }
    return std::max(0, support_bound);
}

int SparseRecoveryParams::effective_probes(int d) const {
    if (probe_count > 0) return probe_count;
    const int s = std::max(1, effective_support(d));
    return static_cast<int>(std::ceil(c_k * s * std::log(static_cast<double>(q) * d)));
}

int SparseRecoveryParams::effective_repetitions(int d) const {
    if (repetitions > 0) return repetitions;
    int r = std::max(3, static_cast<int>(std::ceil(2.0 * std::log(std::max(d, 2)))));
    return r | 1; // odd count keeps the majority vote unambiguous
}

std::vector<std::int64_t> sparse_probe_measure(
    const std::function<double(int, double)>& axis_phase, const SqSpec& spec,
    const SparseRecoveryParams& params, Rng& rng, QueryLedger* ledger) {
    const int d = spec.d;
    const std::int64_t q = spec.q;
    const std::int64_t h = spec.half();
    const int reps = params.effective_repetitions(d);

    // product state: one transformed length-q vector per axis
    std::vector<std::vector<Complex>> transformed(static_cast<std::size_t>(d));
    const double scale = 1.0 / std::sqrt(static_cast<double>(q));
    for (int j = 0; j < d; ++j) {
        std::vector<Complex> axis(static_cast<std::size_t>(q));
        for (std::int64_t k = -h; k <= h; ++k)
            axis[static_cast<std::size_t>(k + h)] =
                std::polar(scale, 2.0 * M_PI * axis_phase(j, sq_value(spec, k)));
        transformed[static_cast<std::size_t>(j)] = zq_transform_axis(axis, q);
    }

    std::vector<std::map<std::int64_t, int>> votes(static_cast<std::size_t>(d));
    for (int rep = 0; rep < reps; ++rep) {
        if (ledger) ledger->add_simulated_calls(1);
        for (int j = 0; j < d; ++j) {
            const auto& amps = transformed[static_cast<std::size_t>(j)];
            double mass = 0.0;
            for (const Complex& c : amps) mass += std::norm(c);
            const double u = rng.uniform() * mass;
            double acc = 0.0;
            std::int64_t picked = h;
            for (std::int64_t idx = 0; idx < q; ++idx) {
                acc += std::norm(amps[static_cast<std::size_t>(idx)]);
                if (u < acc) { picked = idx; break; }
            }
            votes[static_cast<std::size_t>(j)][picked - h] += 1;
        }
    }

    std::vector<std::int64_t> residues(static_cast<std::size_t>(d), 0);
    for (int j = 0; j < d; ++j) {
        int best = -1;
        std::int64_t best_res = 0;
        for (const auto& [res, count] : votes[static_cast<std::size_t>(j)])
            if (count > best) { best = count; best_res = res; }
        residues[static_cast<std::size_t>(j)] = best_res;
    }
    return residues;
}

namespace {

/// Solves A x = b over Z_q restricted to `support`; returns every solution
/// (usually one) as full-width symmetric-residue vectors. q must be prime.
std::vector<std::vector<std::int64_t>> solve_on_support(
    const std::vector<std::vector<std::int64_t>>& probes, const std::vector<std::int64_t>& rhs,
    const std::vector<int>& support, std::int64_t q, int d) {
    const int k = static_cast<int>(probes.size());
    const int s = static_cast<int>(support.size());
    auto mod = [q](std::int64_t v) { return ((v % q) + q) % q; };

    // modular inverse via Fermat
    auto inv = [&](std::int64_t a) {
        std::int64_t result = 1, base = mod(a), e = q - 2;
        while (e > 0) {
            if (e & 1) result = mod(result * base);
            base = mod(base * base);
            e >>= 1;
        }
        return result;
    };

    std::vector<std::vector<std::int64_t>> aug(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        aug[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(s + 1));
        for (int c = 0; c < s; ++c)
            aug[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
                mod(probes[static_cast<std::size_t>(i)][static_cast<std::size_t>(support[static_cast<std::size_t>(c)])]);
        aug[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] = mod(rhs[static_cast<std::size_t>(i)]);
    }

    int rank = 0;
    std::vector<int> pivot_col;
    for (int col = 0; col < s && rank < k; ++col) {
        int pivot = -1;
        for (int r = rank; r < k; ++r)
            if (aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] != 0) { pivot = r; break; }
        if (pivot < 0) continue;
        std::swap(aug[static_cast<std::size_t>(rank)], aug[static_cast<std::size_t>(pivot)]);
        const std::int64_t piv_inv = inv(aug[static_cast<std::size_t>(rank)][static_cast<std::size_t>(col)]);
        for (int c = col; c <= s; ++c)
            aug[static_cast<std::size_t>(rank)][static_cast<std::size_t>(c)] =
                mod(aug[static_cast<std::size_t>(rank)][static_cast<std::size_t>(c)] * piv_inv);
        for (int r = 0; r < k; ++r) {
            if (r == rank) continue;
            const std::int64_t factor = aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
            if (factor == 0) continue;
            for (int c = col; c <= s; ++c)
                aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                    mod(aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -
                        factor * aug[static_cast<std::size_t>(rank)][static_cast<std::size_t>(c)]);
        }
        pivot_col.push_back(col);
        ++rank;
    }
    for (int r = rank; r < k; ++r)
        if (aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)] != 0) return {}; // inconsistent

    std::vector<int> free_cols;
    for (int c = 0; c < s; ++c)
        if (std::find(pivot_col.begin(), pivot_col.end(), c) == pivot_col.end()) free_cols.push_back(c);
    double combos = 1.0;
    for (std::size_t i = 0; i < free_cols.size(); ++i) combos *= static_cast<double>(q);
    if (combos > 4096.0)
        throw AmbiguousRecoveryError(-1, "underdetermined support system with too many solutions");

    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> free_vals(free_cols.size(), 0);
    while (true) {
        std::vector<std::int64_t> x(static_cast<std::size_t>(s), 0);
        for (std::size_t i = 0; i < free_cols.size(); ++i)
            x[static_cast<std::size_t>(free_cols[i])] = free_vals[i];
        for (int r = rank - 1; r >= 0; --r) {
            const int pc = pivot_col[static_cast<std::size_t>(r)];
            std::int64_t v = aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)];
            for (int c = pc + 1; c < s; ++c)
                v = mod(v - aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] *
                                x[static_cast<std::size_t>(c)]);
            x[static_cast<std::size_t>(pc)] = v;
        }
        std::vector<std::int64_t> full(static_cast<std::size_t>(d), 0);
        for (int c = 0; c < s; ++c)
            full[static_cast<std::size_t>(support[static_cast<std::size_t>(c)])] =
                symmetric_mod(x[static_cast<std::size_t>(c)], q);
        out.push_back(std::move(full));
        // advance the free-variable odometer
        std::size_t pos = 0;
        for (; pos < free_vals.size(); ++pos) {
            if (++free_vals[pos] < q) break;
            free_vals[pos] = 0;
        }
        if (pos == free_vals.size()) break;
    }
    return out;
}

void enumerate_supports(int d, int size, std::vector<int>& current,
                        const std::function<void(const std::vector<int>&)>& visit, int start = 0) {
    if (static_cast<int>(current.size()) == size) {
        visit(current);
        return;
    }
    for (int i = start; i <= d - (size - static_cast<int>(current.size())); ++i) {
        current.push_back(i);
        enumerate_supports(d, size, current, visit, i + 1);
        current.pop_back();
    }
}

} // namespace

ZqMatrix recover_sparse_rows(
    const std::vector<std::vector<std::int64_t>>& probes,
    const std::vector<std::vector<std::int64_t>>& residues, int d,
    const SparseRecoveryParams& params,
    const std::function<std::vector<std::int64_t>(const std::vector<std::int64_t>&)>& measure_dense) {
    if (probes.size() != residues.size())
        throw ParameterError("one residue vector per probe is required");
    if (probes.empty()) throw ParameterError("at least one probe is required");
    const std::int64_t q = params.q;
    if (!is_prime(q) || q <= 2) throw ParameterError("recovery needs an odd prime q");
    const int k = static_cast<int>(probes.size());
    const int s_eff = params.effective_support(d);

    ZqMatrix L;
    L.q = q;
    L.entries.assign(static_cast<std::size_t>(d), std::vector<std::int64_t>(static_cast<std::size_t>(d), 0));
    std::vector<int> dense_rows;

    for (int row = 0; row < d; ++row) {
        std::vector<std::int64_t> rhs(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i)
            rhs[static_cast<std::size_t>(i)] = residues[static_cast<std::size_t>(i)][static_cast<std::size_t>(row)];

        std::set<std::vector<std::int64_t>> candidates;
        for (int size = 0; size <= s_eff; ++size) {
            std::vector<int> current;
            enumerate_supports(d, size, current, [&](const std::vector<int>& support) {
                std::vector<std::vector<std::int64_t>> sols;
                try {
                    sols = solve_on_support(probes, rhs, support, q, d);
                } catch (const AmbiguousRecoveryError&) {
                    throw AmbiguousRecoveryError(row, "row " + std::to_string(row) +
                                                          ": underdetermined recovery system");
                }
                for (auto& sol : sols) candidates.insert(std::move(sol));
            });
            if (candidates.size() > 1) break;
        }
        if (candidates.size() > 1)
            throw AmbiguousRecoveryError(
                row, "row " + std::to_string(row) + ": " + std::to_string(candidates.size()) +
                         " sparse candidates are consistent with all " + std::to_string(k) +
                         " probe residues; add probes");
        if (candidates.empty()) {
            dense_rows.push_back(row);
            continue;
        }
        L.entries[static_cast<std::size_t>(row)] = *candidates.begin();
    }

    if (!dense_rows.empty()) {
        if (!measure_dense)
            throw InconsistentResiduesError("row " + std::to_string(dense_rows.front()) +
                                            " admits no sparse candidate and no dense fallback is available");
        // one standard-basis sweep serves every dense row
        std::vector<std::vector<std::int64_t>> columns(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) {
            std::vector<std::int64_t> basis(static_cast<std::size_t>(d), 0);
            basis[static_cast<std::size_t>(j)] = 1;
            columns[static_cast<std::size_t>(j)] = measure_dense(basis);
        }
        for (int row : dense_rows)
            for (int j = 0; j < d; ++j)
                L.entries[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)] =
                    symmetric_mod(columns[static_cast<std::size_t>(j)][static_cast<std::size_t>(row)], q);
    }

    if (!L.symmetric())
        throw InconsistentResiduesError("recovered residue matrix is not symmetric");
    if (params.total_nonzeros) {
        if (L.total_nonzeros() > *params.total_nonzeros)
            throw InconsistentResiduesError("recovered matrix has " +
                                            std::to_string(L.total_nonzeros()) +
                                            " nonzeros, beyond the declared budget of " +
                                            std::to_string(*params.total_nonzeros));
    } else {
        for (int row = 0; row < d; ++row)
            if (L.row_nonzeros(row) > params.support_bound)
                throw InconsistentResiduesError("row " + std::to_string(row) + " carries " +
                                                std::to_string(L.row_nonzeros(row)) +
                                                " nonzeros, beyond the declared sparsity " +
                                                std::to_string(params.support_bound));
    }
    return L;
}

void SparseHessianJob::validate() const {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
    if (!(M > 0.0)) throw ParameterError("scale M must be positive");
    if (!(a > 0.0)) throw ParameterError("lattice scale a must be positive");
    if (q && (!is_prime(*q) || *q <= 2))
        throw ParameterError("q override must be an odd prime, got " + std::to_string(*q));
}

SparseHessianResult estimate_hessian_sparse(const SparseHessianJob& job, Rng& rng) {
    job.validate();
    const int d = job.oracle.dim();
    const std::int64_t q =
        job.q ? *job.q : next_prime(static_cast<std::int64_t>(std::ceil(job.c_q * job.M / job.epsilon)));
    SparseRecoveryParams params = job.recovery;
    params.q = q;
    const int s_eff = std::max(1, params.effective_support(d));

    if (job.declared_noise) {
        const double eta = *job.declared_noise;
        const double limit =
            job.method == DerivativeMethod::spectral
                ? 1.0 / (20.0 * s_eff * static_cast<double>(q))
                : std::min(1.0 / (2.0 * static_cast<double>(q)),
                           std::sqrt(static_cast<double>(d)) / (20.0 * s_eff * static_cast<double>(q)));
        if (eta > limit * (1.0 + 1e-12))
            throw ParameterError("declared lattice-decomposition noise " + std::to_string(eta) +
                                 " exceeds the admissible level " + std::to_string(limit));
    }

    const HessianForm form = make_hessian_form(job.oracle, job.method, job.epsilon, std::nullopt,
                                               std::nullopt, 1e-2);
    const SqSpec spec(q, d, 1.0);
    const bool findiff = job.method == DerivativeMethod::finite_difference;
    const double sqrt_d = std::sqrt(static_cast<double>(d));
    const double a_path = findiff ? job.a : 1.0;

    SparseHessianResult result;
    result.q = q;
    QueryLedger* ledger = &job.oracle.ledger();

    // value-space probe and its integer-probe scale c_y (w = c_y * y)
    auto measure_probe = [&](const std::vector<double>& y_values, double c_y) {
        const double phase_scale = static_cast<double>(q) * c_y / (4.0 * job.M * a_path);
        auto joint_phase = [&, phase_scale](std::span<const double> x) {
            std::vector<double> base(static_cast<std::size_t>(d));
            std::vector<double> shifted(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) {
                base[static_cast<std::size_t>(i)] = a_path * x[static_cast<std::size_t>(i)];
                shifted[static_cast<std::size_t>(i)] =
                    base[static_cast<std::size_t>(i)] + y_values[static_cast<std::size_t>(i)];
            }
            return phase_scale * (form.eval(shifted) - form.eval(base));
        };
        auto axis_phase = [&, phase_scale](int axis, double x) {
            std::vector<double> base(static_cast<std::size_t>(d), 0.0);
            base[static_cast<std::size_t>(axis)] = a_path * x;
            std::vector<double> shifted(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i)
                shifted[static_cast<std::size_t>(i)] =
                    base[static_cast<std::size_t>(i)] + y_values[static_cast<std::size_t>(i)];
            return phase_scale * (form.eval(shifted) - form.eval(base));
        };

        // The product-state path is exact only when the probe field is linear
        // in x. Spot-check separability; any mismatch routes through the full
        // statevector instead of mis-measuring silently.
        bool separable = true;
        {
            std::vector<double> zeros(static_cast<std::size_t>(d), 0.0);
            const double joint0 = joint_phase(zeros);
            std::vector<double> axis0(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j) axis0[static_cast<std::size_t>(j)] = axis_phase(j, 0.0);
            std::vector<double> x(static_cast<std::size_t>(d));
            for (int trial = 0; trial < 4 && separable; ++trial) {
                for (int j = 0; j < d; ++j)
                    x[static_cast<std::size_t>(j)] =
                        sq_value(spec, rng.uniform_int(-spec.half(), spec.half()));
                double sum = 0.0;
                for (int j = 0; j < d; ++j)
                    sum += axis_phase(j, x[static_cast<std::size_t>(j)]) - axis0[static_cast<std::size_t>(j)];
                const double joint = joint_phase(x) - joint0;
                separable = std::fabs(joint - sum) <= 1e-6 * (1.0 + std::fabs(joint));
            }
        }

        const int reps = params.effective_repetitions(d);
        std::vector<std::int64_t> residues;
        if (separable) {
            residues = sparse_probe_measure(axis_phase, spec, params, rng, ledger);
        } else {
            if (d > 4)
                throw ParameterError(
                    "probe difference field is not separable; the full-state path is restricted "
                    "to d <= 4");
            const PhaseField field{spec, joint_phase};
            const StateVector transformed = inverse_zq_axiswise(build_state(field));
            std::vector<std::map<std::int64_t, int>> votes(static_cast<std::size_t>(d));
            for (int rep = 0; rep < reps; ++rep) {
                if (ledger) ledger->add_simulated_calls(1);
                const MeasurementOutcome out = sample_outcome(transformed, rng);
                for (int j = 0; j < d; ++j)
                    votes[static_cast<std::size_t>(j)][out.labels[static_cast<std::size_t>(j)]] += 1;
            }
            residues.assign(static_cast<std::size_t>(d), 0);
            for (int j = 0; j < d; ++j) {
                int best = -1;
                for (const auto& [res, count] : votes[static_cast<std::size_t>(j)])
                    if (count > best) {
                        best = count;
                        residues[static_cast<std::size_t>(j)] = res;
                    }
            }
        }
        result.applications += static_cast<std::uint64_t>(reps);
        result.counted_queries += reps * static_cast<double>(q) * c_y / (job.M * a_path);
        return residues;
    };

    const int k = params.effective_probes(d);
    std::vector<std::vector<std::int64_t>> probes;
    std::vector<std::vector<std::int64_t>> residues;
    for (int i = 0; i < k; ++i) {
        std::vector<std::int64_t> w(static_cast<std::size_t>(d));
        std::vector<double> y(static_cast<std::size_t>(d));
        double c_y = 1.0;
        if (findiff) {
            c_y = sqrt_d;
            for (int j = 0; j < d; ++j) {
                const std::int64_t sign = rng.coin() ? 1 : -1;
                w[static_cast<std::size_t>(j)] = sign;
                y[static_cast<std::size_t>(j)] = static_cast<double>(sign) / sqrt_d;
            }
        } else {
            const double alpha = params.relaxed_probe_alpha;
            const double shrink = alpha > 0.0 ? alpha * s_eff : 1.0;
            c_y = shrink;
            for (int j = 0; j < d; ++j) {
                const std::int64_t bit = rng.coin() ? 1 : 0;
                w[static_cast<std::size_t>(j)] = bit;
                y[static_cast<std::size_t>(j)] = static_cast<double>(bit) / shrink;
            }
        }
        residues.push_back(measure_probe(y, c_y));
        probes.push_back(std::move(w));
    }

    auto measure_dense = [&](const std::vector<std::int64_t>& basis) {
        std::vector<double> y(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) y[static_cast<std::size_t>(j)] = static_cast<double>(basis[static_cast<std::size_t>(j)]);
        return measure_probe(y, 1.0);
    };

    result.residues = recover_sparse_rows(probes, residues, d, params, measure_dense);
    result.probes_used = k;

    result.form.assign(static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(d), 0.0));
    result.hessian.assign(static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(d), 0.0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double v = job.M *
                             static_cast<double>(result.residues.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) /
                             static_cast<double>(q);
            result.form[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
            result.hessian[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 2.0 * v;
        }
    ledger->add_theoretical_cost(result.counted_queries);
    result.ledger = snapshot(*ledger);
    return result;
}

} // namespace qgrad
