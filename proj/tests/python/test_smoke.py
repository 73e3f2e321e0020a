"""Smoke tests for the python module over the C++ core."""

import math

import pytest

try:
    import _qgrad as q
except ImportError:  # packaged layout
    import qgrad as q


def test_lattice_round_trip():
    spec = q.GridSpec(4, 1)
    assert q.label_to_value(spec, -8) == -15.0 / 32.0
    assert q.value_to_label(spec, -15.0 / 32.0) == -8
    assert q.nearest_label(spec, 0.47) == 7
    with pytest.raises(q.RangeError):
        q.label_to_value(spec, 99)


def test_modular_lattice():
    assert q.sq_value(5, 1, 1.0, 2) == pytest.approx(0.4)


def test_stencil_golden_values():
    assert q.second_order_coeffs(1) == [1.0, -2.0, 1.0]
    assert q.second_order_coeffs(2) == [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0]
    assert q.first_order_coeffs(1) == [-0.5, 0.0, 0.5]
    lhs, rhs, holds = q.coeff_bound_check(1, 2)
    assert (lhs, holds) == (2.0, True)
    status = q.abs_sum_check(3)
    assert status["abs_sum"] == pytest.approx(299.0 / 180.0)
    assert not status["holds_pi2_over_6"]
    assert status["holds_pi2_over_3"]


def test_spectral_selection_and_bound():
    assert q.select_N(0.1, 1.0, 1.0, 1.0) == 13
    assert q.spectral_error_bound(8, 1.0, 2.0, 1.0, 1) == pytest.approx(1.0 / 510.0)


def test_spectral_form_on_python_callable():
    value = q.spectral_gradient_form(lambda z: 0.5 * z[0], 1, [0.25], 8, 0.5)
    assert value == pytest.approx(0.5 * 0.25, abs=1e-12)


def test_gradient_estimation_exact_linear():
    truth = q.corpus_truth("linear_d3")["gradient0"]
    res = q.estimate_gradient("linear_d3", epsilon=0.1, rho=0.1, M=1.0 / 3.0, seed=7)
    assert res["n"] == 6
    assert res["g"] == pytest.approx(truth, abs=0.0)


def test_dense_hessian_estimation():
    truth = q.corpus_truth("poly_d2")["hessian0"]
    res = q.estimate_hessian_dense("poly_d2", epsilon=0.1, rho=0.1, M=0.5, seed=3)
    worst = max(
        abs(res["hessian"][i][j] - truth[i][j]) for i in range(2) for j in range(2)
    )
    assert worst <= 0.1


def test_sparse_hessian_recovery():
    res = q.estimate_hessian_sparse("quad_sparse_d8_q7", q=7, sparsity=2, seed=5)
    assert res["q"] == 7
    # the recovered residues reproduce the lattice form exactly
    truth = q.corpus_truth("quad_sparse_d8_q7")["hessian0"]
    for i in range(8):
        for j in range(8):
            assert 2.0 * res["form"][i][j] == pytest.approx(truth[i][j], abs=1e-12)


def test_error_bounds():
    assert q.error_bound_1d(4, 0.1, 1.0) == pytest.approx(4.0 * math.exp(-2.0) * 1e-9)
    assert q.error_bound_multivariate(1, 0.5 / 13.0, 1.0, 1) == pytest.approx(0.25)
    with pytest.raises(Exception):
        q.error_bound_multivariate(1, 1.0 / 13.0, 1.0, 1)
