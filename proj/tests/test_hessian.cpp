#include <doctest.h>

#include <cmath>

#include "qgrad/corpus.hpp"
#include "qgrad/errors.hpp"
#include "qgrad/hessian.hpp"
#include "qgrad/spectral.hpp"

using namespace qgrad;

namespace {

double maxnorm(const Matrix& a, const Matrix& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) e = std::max(e, std::fabs(a[i][j] - b[i][j]));
    return e;
}

/// Residues of L*probe mod q, the arithmetic the measurement must reproduce.
std::vector<std::int64_t> apply_mod(const std::vector<std::vector<std::int64_t>>& L,
                                    const std::vector<std::int64_t>& probe, std::int64_t q) {
    const int d = static_cast<int>(L.size());
    std::vector<std::int64_t> out(static_cast<std::size_t>(d), 0);
    for (int r = 0; r < d; ++r) {
        std::int64_t acc = 0;
        for (int c = 0; c < d; ++c) acc += L[r][c] * probe[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = symmetric_mod(acc, q);
    }
    return out;
}

std::vector<std::vector<std::int64_t>> demo_L64() {
    auto L32 = sparse_demo_residues();
    std::vector<std::vector<std::int64_t>> L(8, std::vector<std::int64_t>(8, 0));
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) L[i][j] = L32[i][j];
    return L;
}

} // namespace

TEST_CASE("symmetric_mod folds into the symmetric residue range") {
    CHECK(symmetric_mod(8, 7) == 1);
    CHECK(symmetric_mod(-8, 7) == -1);
    CHECK(symmetric_mod(4, 7) == -3);
    CHECK(symmetric_mod(-4, 7) == 3);
    CHECK(symmetric_mod(21, 7) == 0);
}

TEST_CASE("dense estimation recovers quadratic-form Hessians exactly on the lattice") {
    // Decodable slopes at epsilon=0.1, M=1/3 are odd multiples of 1/128, so a
    // form whose Hessian entries are all odd/128 decodes with zero error.
    const double a = 37.0 / 256.0, b = -19.0 / 256.0;
    HessianJob job;
    job.oracle = make_quadratic_form({{a, b}, {b, a}}); // Hessian [[2a, 2b], [2b, 2a]]
    job.epsilon = 0.1;
    job.rho = 0.1;
    job.M = 1.0 / 3.0;
    Rng rng(1);
    const HessianDenseResult res = estimate_hessian_dense(job, rng);
    CHECK(maxnorm(res.hessian, *job.oracle.meta().hessian0) == 0.0);
    CHECK(res.presym_asymmetry == 0.0);

    // entries off the decode lattice (the zeros of quad_d2) land on the
    // nearest decodable value instead
    HessianJob off;
    off.oracle = corpus_lookup("quad_d2").oracle; // Hessian [[0,2],[2,0]]
    off.epsilon = 0.1;
    off.rho = 0.1;
    off.M = 2.0;
    Rng rng2(1);
    const HessianDenseResult res2 = estimate_hessian_dense(off, rng2);
    CHECK(maxnorm(res2.hessian, *off.oracle.meta().hessian0) <= off.epsilon / 4.0);
}

TEST_CASE("dense estimation: corpus quartic within epsilon on most seeds") {
    HessianJob job;
    job.oracle = corpus_lookup("quartic_d3").oracle;
    job.epsilon = 0.1;
    job.rho = 0.1;
    job.M = 0.5;
    const HessianDensePipeline pipeline(job);
    int good = 0;
    for (int seed = 1; seed <= 10; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed));
        good += maxnorm(pipeline.run(rng).hessian, *job.oracle.meta().hessian0) <= job.epsilon;
    }
    CHECK(good >= 9);
    CHECK(pipeline.column_plan().T ==
          static_cast<int>(std::ceil(3.0 * std::log(3.0 / (3.0 * 0.1 / 3.1)))));
}

TEST_CASE("d=1 dense estimation matches the second-derivative circle form") {
    HessianJob job;
    job.oracle = corpus_lookup("exp_d1").oracle;
    job.epsilon = 0.1;
    job.rho = 0.1;
    job.M = 1.5;
    Rng rng(9);
    const HessianDenseResult res = estimate_hessian_dense(job, rng);
    CHECK(std::fabs(res.hessian[0][0] - 1.0) <= job.epsilon);
}

TEST_CASE("per-column failure split keeps the joint success above 1 - rho") {
    HessianJob job;
    job.oracle = corpus_lookup("quartic_d3").oracle;
    job.epsilon = 0.1;
    job.rho = 0.25;
    job.M = 0.5;
    const HessianDensePipeline pipeline(job);
    int good = 0;
    const int trials = 40;
    for (int seed = 1; seed <= trials; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed) * 7919);
        good += maxnorm(pipeline.run(rng).hessian, *job.oracle.meta().hessian0) <= job.epsilon;
    }
    CHECK(static_cast<double>(good) / trials >= 1.0 - job.rho);
}

TEST_CASE("finite-difference dense path enforces the half-width precondition") {
    HessianJob job;
    job.oracle = corpus_lookup("poly_d2").oracle; // declared derivative bound 2
    job.method = DerivativeMethod::finite_difference;
    job.epsilon = 0.1;
    job.rho = 0.1;
    job.M = 0.5;
    job.m = 1; // below log(d*B/eps) = log(40)
    Rng rng(3);
    CHECK_THROWS_WITH_AS(estimate_hessian_dense(job, rng), doctest::Contains("m >= log"),
                         ParameterError);
}

TEST_CASE("finite-difference dense path on an exact quadratic") {
    HessianJob job;
    job.oracle = corpus_lookup("quad_d2").oracle;
    job.method = DerivativeMethod::finite_difference;
    job.epsilon = 0.1;
    job.rho = 0.1;
    job.M = 2.0;
    Rng rng(4);
    const HessianDenseResult res = estimate_hessian_dense(job, rng);
    CHECK(maxnorm(res.hessian, *job.oracle.meta().hessian0) <= job.epsilon);
}

TEST_CASE("probe residue measurement: frozen row example") {
    // H row (0, 3/q, 0, -2/q), probe of all ones -> residue 1 mod 7
    const std::int64_t q = 7;
    std::vector<std::vector<std::int64_t>> L(4, std::vector<std::int64_t>(4, 0));
    L[0] = {0, 3, 0, -2};
    L[1] = {3, 0, 0, 0};
    L[3] = {-2, 0, 0, 0};
    const std::vector<std::int64_t> ones{1, 1, 1, 1};
    CHECK(apply_mod(L, ones, q)[0] == 1);

    // and through the actual product-state measurement on the form x^T (L/q) x
    Matrix form(4, std::vector<double>(4, 0.0));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) form[i][j] = static_cast<double>(L[i][j]) / static_cast<double>(q);
    const FunctionOracle oracle = make_quadratic_form(form);
    SparseRecoveryParams params;
    params.q = q;
    params.repetitions = 3;
    const SqSpec spec(q, 4, 1.0);
    auto axis_phase = [&](int axis, double x) {
        CVector z1(4, Complex{0.0, 0.0}), z2(4, Complex{0.0, 0.0});
        z1[static_cast<std::size_t>(axis)] = x;
        z2[static_cast<std::size_t>(axis)] = x;
        for (int i = 0; i < 4; ++i) z1[static_cast<std::size_t>(i)] += static_cast<double>(ones[static_cast<std::size_t>(i)]);
        const double q_over_2 = static_cast<double>(q) / 2.0;
        return q_over_2 * (oracle.evaluate(z1).real() - oracle.evaluate(z2).real());
    };
    Rng rng(17);
    const auto measured = sparse_probe_measure(axis_phase, spec, params, rng);
    CHECK(measured == apply_mod(L, ones, q));
}

TEST_CASE("the all-zero probe measures the zero vector") {
    const std::int64_t q = 5;
    SparseRecoveryParams params;
    params.q = q;
    params.repetitions = 3;
    const SqSpec spec(q, 3, 1.0);
    auto axis_phase = [](int, double) { return 0.0; };
    Rng rng(2);
    const auto measured = sparse_probe_measure(axis_phase, spec, params, rng);
    // a flat axis state spreads evenly, but the vote still lands on a residue;
    // a zero phase field is the frequency-zero mode, so every vote is 0
    for (std::int64_t r : measured) CHECK(r == 0);
}

TEST_CASE("noisy single-shot residues stay exact at a 99 percent rate") {
    // E at the admissible level 1/(20*s*q) shifts each axis frequency by at
    // most s*eta; the leakage off the true residue stays below one percent
    const std::int64_t q = 7;
    const int s = 2;
    const double eta = 1.0 / (20.0 * s * static_cast<double>(q));
    const SqSpec spec(q, 1, 1.0);
    SparseRecoveryParams params;
    params.q = q;
    params.repetitions = 1;
    int exact = 0;
    const int trials = 1000;
    Rng rng(31);
    for (int t = 0; t < trials; ++t) {
        const std::int64_t b = rng.uniform_int(-3, 3);
        auto axis_phase = [&](int, double x) {
            return static_cast<double>(q) * x * (static_cast<double>(b) / q + s * eta);
        };
        const auto measured = sparse_probe_measure(axis_phase, spec, params, rng);
        exact += (measured[0] == b);
    }
    CHECK(exact >= 990);
}

TEST_CASE("row recovery: known sparse rows from exact residues") {
    const std::int64_t q = 5;
    const int d = 6;
    SparseRecoveryParams params;
    params.q = q;
    params.support_bound = 1;
    int good = 0;
    for (int seed = 0; seed < 50; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed) + 2000);
        // random involution pairing: every row has exactly one nonzero
        std::vector<int> order(d);
        for (int i = 0; i < d; ++i) order[i] = i;
        for (int i = d - 1; i > 0; --i)
            std::swap(order[i], order[static_cast<int>(rng.uniform_below(i + 1))]);
        std::vector<std::vector<std::int64_t>> L(d, std::vector<std::int64_t>(d, 0));
        for (int p = 0; p + 1 < d; p += 2) {
            const std::int64_t v = rng.uniform_int(1, q - 1);
            L[order[p]][order[p + 1]] = L[order[p + 1]][order[p]] = symmetric_mod(v, q);
        }
        SparseRecoveryParams local = params;
        std::vector<std::vector<std::int64_t>> probes, residues;
        for (int i = 0; i < 8; ++i) {
            std::vector<std::int64_t> y(d);
            for (auto& b : y) b = rng.coin() ? 1 : 0;
            residues.push_back(apply_mod(L, y, q));
            probes.push_back(std::move(y));
        }
        try {
            const ZqMatrix rec = recover_sparse_rows(probes, residues, d, local);
            bool match = true;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) match &= rec.entries[i][j] == symmetric_mod(L[i][j], q);
            good += match;
        } catch (const AmbiguousRecoveryError&) {
        } catch (const InconsistentResiduesError&) {
        }
    }
    CHECK(good >= 48);
}

TEST_CASE("row recovery: the zero matrix needs no structure") {
    SparseRecoveryParams params;
    params.q = 5;
    params.support_bound = 0;
    std::vector<std::vector<std::int64_t>> probes{{1, 0, 1}, {0, 1, 1}};
    std::vector<std::vector<std::int64_t>> residues{{0, 0, 0}, {0, 0, 0}};
    const ZqMatrix rec = recover_sparse_rows(probes, residues, 3, params);
    CHECK(rec.total_nonzeros() == 0);
}

TEST_CASE("row recovery: an engineered single probe is ambiguous") {
    SparseRecoveryParams params;
    params.q = 5;
    params.support_bound = 1;
    // two distinct 1-sparse rows agree on the only probe
    std::vector<std::vector<std::int64_t>> probes{{1, 1}};
    std::vector<std::vector<std::int64_t>> residues{{2, 2}};
    CHECK_THROWS_AS(recover_sparse_rows(probes, residues, 2, params), AmbiguousRecoveryError);
}

TEST_CASE("sparse estimation: exact recovery of the demo matrix") {
    const auto L = demo_L64();
    SparseHessianJob job;
    job.oracle = corpus_lookup("quad_sparse_d8_q7").oracle;
    job.epsilon = 0.1;
    job.M = 1.0;
    job.q = 7;
    job.recovery.support_bound = 2;
    int good = 0;
    for (int seed = 1; seed <= 5; ++seed) {
        Rng rng(static_cast<std::uint64_t>(seed));
        try {
            const SparseHessianResult res = estimate_hessian_sparse(job, rng);
            bool match = true;
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) match &= res.residues.entries[i][j] == L[i][j];
            good += match;
            CHECK(res.q == 7);
        } catch (const std::exception&) {
        }
    }
    CHECK(good >= 4);
}

TEST_CASE("sparse estimation via the finite-difference probes costs sqrt(d) more") {
    SparseHessianJob spectral_job;
    spectral_job.oracle = corpus_lookup("quad_sparse_d8_q7").oracle;
    spectral_job.epsilon = 0.1;
    spectral_job.M = 1.0;
    spectral_job.q = 7;
    spectral_job.recovery.support_bound = 2;
    SparseHessianJob findiff_job = spectral_job;
    findiff_job.method = DerivativeMethod::finite_difference;

    Rng r1(3), r2(3);
    const SparseHessianResult rs = estimate_hessian_sparse(spectral_job, r1);
    const SparseHessianResult rf = estimate_hessian_sparse(findiff_job, r2);
    const auto L = demo_L64();
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            CHECK(rs.residues.entries[i][j] == L[i][j]);
            CHECK(rf.residues.entries[i][j] == L[i][j]);
        }
    const double ratio = rf.counted_queries / rs.counted_queries;
    const double sqrt_d = std::sqrt(8.0);
    CHECK(ratio >= 0.5 * sqrt_d);
    CHECK(ratio <= 2.0 * sqrt_d);
}

TEST_CASE("a dense matrix declared sparse errors out instead of answering wrong") {
    Matrix form(6, std::vector<double>(6, 0.0));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) form[i][j] = symmetric_mod(i + 2 * j + 1, 7) / 7.0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < i; ++j) form[i][j] = form[j][i];
    SparseHessianJob job;
    job.oracle = make_quadratic_form(form);
    job.epsilon = 0.1;
    job.M = 1.0;
    job.q = 7;
    job.recovery.support_bound = 1; // far below the true occupancy
    Rng rng(8);
    try {
        estimate_hessian_sparse(job, rng);
        FAIL("expected an ambiguity or inconsistency error");
    } catch (const AmbiguousRecoveryError&) {
    } catch (const InconsistentResiduesError&) {
    }
}

TEST_CASE("total-nonzero budgets allow dense rows through the fallback") {
    // one dense row among sparse ones, learned via the standard-basis sweep
    const std::int64_t q = 5;
    const int d = 5;
    std::vector<std::vector<std::int64_t>> L(d, std::vector<std::int64_t>(d, 0));
    for (int j = 0; j < d; ++j) L[0][j] = symmetric_mod(j + 1, q);
    for (int j = 0; j < d; ++j) L[j][0] = L[0][j];
    L[2][2] = 2;
    Matrix form(d, std::vector<double>(d, 0.0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) form[i][j] = static_cast<double>(L[i][j]) / q;
    SparseHessianJob job;
    job.oracle = make_quadratic_form(form);
    job.epsilon = 0.1;
    job.M = 1.0;
    job.q = q;
    job.recovery.total_nonzeros = 11;
    job.recovery.probe_count = 12;
    Rng rng(6);
    const SparseHessianResult res = estimate_hessian_sparse(job, rng);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) CHECK(res.residues.entries[i][j] == L[i][j]);
}

TEST_CASE("noise declarations beyond the admissible level are rejected") {
    SparseHessianJob job;
    job.oracle = corpus_lookup("quad_sparse_d8_q7").oracle;
    job.epsilon = 0.1;
    job.M = 1.0;
    job.q = 7;
    job.recovery.support_bound = 2;
    job.declared_noise = 1.0; // far above 1/(20*s*q)
    Rng rng(1);
    CHECK_THROWS_AS(estimate_hessian_sparse(job, rng), ParameterError);
}

TEST_CASE("q selection picks the first prime above c_q*M/epsilon") {
    SparseHessianJob job;
    job.oracle = corpus_lookup("quad_d2").oracle;
    job.epsilon = 0.1;
    job.M = 1.0;
    job.recovery.support_bound = 2;
    job.recovery.probe_count = 10;
    Rng rng(2);
    const SparseHessianResult res = estimate_hessian_sparse(job, rng);
    CHECK(res.q == 41); // next prime at or above 40
}

TEST_CASE("engineered distinct rows collide on a random binary probe about half the time") {
    // rows differing in exactly one coordinate collide iff that probe bit is 0
    const std::int64_t q = 5;
    Rng rng(77);
    const int trials = 4000;
    int collisions = 0;
    for (int t = 0; t < trials; ++t) {
        const std::int64_t bit = rng.coin() ? 1 : 0;
        // difference vector v = 3*e_1; collision iff bit * 3 = 0 mod 5
        collisions += symmetric_mod(bit * 3, q) == 0;
    }
    const double freq = static_cast<double>(collisions) / trials;
    const double sigma = std::sqrt(0.25 / trials);
    CHECK(freq <= 0.5 + 3.0 * sigma);
}

TEST_CASE("spectral-sparse counted applications track s*log(qd), independent of d") {
    // identical sparsity at growing dimension: probes grow only with log(qd)
    std::vector<double> counted;
    for (int d : {4, 8, 16}) {
        Matrix form(d, std::vector<double>(d, 0.0));
        for (int i = 0; i + 1 < d; i += 2) {
            form[i][i + 1] = form[i + 1][i] = 2.0 / 7.0;
        }
        SparseHessianJob job;
        job.oracle = make_quadratic_form(form);
        job.epsilon = 0.1;
        job.M = 1.0;
        job.q = 7;
        job.recovery.support_bound = 1;
        job.recovery.c_k = 3.0;
        job.recovery.repetitions = 3;
        Rng rng(13);
        const SparseHessianResult res = estimate_hessian_sparse(job, rng);
        counted.push_back(static_cast<double>(res.applications));
    }
    // doubling d should move the count by log-factors only
    CHECK(counted[2] / counted[0] <= 2.0);
}

TEST_CASE("non-separable probe fields route through the full statevector") {
    // a small quartic cross term breaks separability; the fallback simulates
    // the joint state and still lands on the lattice residues
    const std::int64_t q = 5;
    const int d = 3;
    std::vector<std::vector<std::int64_t>> L(d, std::vector<std::int64_t>(d, 0));
    L[0][1] = L[1][0] = 2;
    L[2][2] = -1;
    FunctionOracle oracle(
        d,
        [&, L](std::span<const Complex> z) {
            Complex acc{0.0, 0.0};
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    acc += (static_cast<double>(L[i][j]) / static_cast<double>(q)) * z[i] * z[j];
            return acc + 1e-3 * z[0] * z[0] * z[1] * z[1];
        },
        [] {
            OracleMetadata meta;
            meta.radius = 1.0;
            meta.kappa = 4.0;
            return meta;
        }());
    SparseHessianJob job;
    job.oracle = oracle;
    job.epsilon = 0.1;
    job.M = 1.0;
    job.q = q;
    job.recovery.support_bound = 2;
    job.recovery.probe_count = 10;
    Rng rng(19);
    const SparseHessianResult res = estimate_hessian_sparse(job, rng);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) CHECK(res.residues.entries[i][j] == L[i][j]);
}

TEST_CASE("joint modular transform concentrates product modes") {
    const SqSpec spec(5, 2, 1.0);
    const std::int64_t b0 = 2, b1 = -1;
    // axis value k/q at frequency b gives phase k*b/q
    const PhaseField field{spec, [&](std::span<const double> x) {
                               return x[0] * static_cast<double>(b0) +
                                      x[1] * static_cast<double>(b1);
                           }};
    const StateVector s = inverse_zq_axiswise(build_state(field));
    Rng rng(4);
    for (int i = 0; i < 10; ++i) {
        const MeasurementOutcome out = sample_outcome(s, rng);
        CHECK(out.labels[0] == b0);
        CHECK(out.labels[1] == b1);
    }
}
