import math

import numpy as np
import pytest

from translab.corpus import pw_corpus, standard_corpus
from translab.levitan import (ContourError, ContourSpec, analytic_transform, carleman_residual_check,
                              cauchy_derivatives, constant_pair_operator, cos_lambda_derivative,
                              derivative_operator, eigenfunction_expansion_check,
                              expansion_apply, levitan_coefficients, multiplication_operator,
                              residual_transform, shift_operator)

Z = np.array([0.05, 0.1 + 0.05j, -0.1])
C = ContourSpec(0.0, 0.5, 64)
J = np.arange(9)
FACT = np.array([math.factorial(int(n)) for n in J], dtype=float)


def test_multiplication_coefficients():
    a = levitan_coefficients(multiplication_operator, C, Z, 8).a
    assert np.abs(a[:, 0] - Z).max() <= 1e-10
    assert np.abs(a[:, 1:]).max() <= 1e-10


def test_derivative_coefficients():
    a = levitan_coefficients(derivative_operator, C, Z, 8).a
    want = np.tile((J == 1).astype(float), (len(Z), 1))
    assert np.abs(a - want).max() <= 1e-10


def test_shift_coefficients():
    a = levitan_coefficients(shift_operator(0.1), C, Z, 8).a
    assert np.abs(a[:, :7] - 0.1 ** J[:7] / FACT[:7]).max() <= 1e-8


@pytest.mark.parametrize("op", [multiplication_operator, derivative_operator, shift_operator(0.1)])
def test_node_doubling_converged(op):
    a = levitan_coefficients(op, C, Z, 8).a
    b = levitan_coefficients(op, C.refined(), Z, 8).a
    assert np.abs(a - b).max() <= 1e-10


def test_radius_independence():
    z = Z[:1] * 0.5
    a = levitan_coefficients(shift_operator(0.1), C, z, 8).a
    b = levitan_coefficients(shift_operator(0.1), C.scaled(0.5), z, 8).a
    assert np.abs(a - b).max() <= 1e-8


def test_cauchy_reproduction(grid):
    for tf in standard_corpus(grid)[:4]:
        F = analytic_transform(tf.values, grid)
        z = np.array([1.0, 2.0 + 0.3j])
        got = cauchy_derivatives(F, z, ContourSpec(1.5, 1.5, 64), 0)[:, 0]
        assert np.abs(got - F(z)).max() <= 1e-10 * max(1.0, np.abs(F(z)).max())


def test_cauchy_derivatives_of_exp():
    d = cauchy_derivatives(np.exp, [0.2], ContourSpec(0.0, 1.0, 64), 6)[0]
    assert np.allclose(d, np.exp(0.2), rtol=1e-12)


def test_shift_expansion_converges_geometrically():
    h0 = 0.1
    co = levitan_coefficients(shift_operator(h0), C, Z, 10)
    r = expansion_apply(co, np.exp, direct=np.exp(Z + h0))
    res = np.array(r.residuals)
    assert not r.stalled
    assert np.all(res[1:8] <= res[:7] * (h0 / C.radius))
    assert res[-1] <= 1e-12


def test_multiplication_exact_at_zero_order():
    co = levitan_coefficients(multiplication_operator, C, Z, 4)
    r = expansion_apply(co, np.sin, j_trunc=0, direct=Z * np.sin(Z))
    assert r.residuals[0] <= 1e-12


def test_constant_pair_expansion(grid):
    lam = np.array([4.0, 6.0, 9.0])
    co = levitan_coefficients(constant_pair_operator(0.0, 1.0), ContourSpec(6.5, 5.0, 64), lam, 12)
    for tf in pw_corpus(grid):
        F1 = analytic_transform(tf.values, grid)
        direct = analytic_transform(tf.values, grid, c=1.0)(lam)
        r = expansion_apply(co, F1, j_trunc=8, direct=direct)
        assert r.residuals[-1] <= 5e-2 * np.abs(direct).max()


def test_stall_reported():
    # the pole at 0.3 lies closer to z than the shift, so the Taylor series diverges
    z = np.array([0.05])
    co = levitan_coefficients(shift_operator(0.4), ContourSpec(0.0, 0.6), z, 12)
    F = lambda w: 1.0 / (np.asarray(w) - 0.3)
    r = expansion_apply(co, F, direct=F(z + 0.4), deriv_contour=ContourSpec(0.05, 0.1))
    assert r.stalled and r.stall_order is not None


def test_contour_validation():
    with pytest.raises(ContourError):
        ContourSpec(0.0, -1.0)
    with pytest.raises(ContourError):
        ContourSpec(0.0, 1.0, 15)
    with pytest.raises(ContourError):
        levitan_coefficients(multiplication_operator, C, [2.0])
    with pytest.raises(ContourError):
        expansion_apply(levitan_coefficients(multiplication_operator, C, Z, 4), np.exp, j_trunc=9)


def test_failed_operator_named():
    def bad(F, z):
        raise RuntimeError("boom")
    with pytest.raises(ContourError, match="zeta"):
        levitan_coefficients(bad, C, Z)


def test_cos_lambda_derivative_matches_chain_rule():
    x, k = np.array([0.3, 1.0, 2.0]), 2.0
    d1 = cos_lambda_derivative(x, k * k, 1)
    assert np.allclose(d1.real, -x * np.sin(k * x) / (2 * k), rtol=1e-12)
    d0 = cos_lambda_derivative(x, 0.0, 0)
    assert np.allclose(d0.real, 1.0)


def test_eigen_expansion_identical(identity_pair, grid):
    co = levitan_coefficients(constant_pair_operator(0.0, 0.0), ContourSpec(4.0, 2.0), [4.0], 8)
    r = eigenfunction_expansion_check(identity_pair, co, grid.nodes[grid.nodes <= 2.0], 2.0)
    assert r.residuals[0] <= 1e-6


def test_eigen_expansion_const(const_pair, grid):
    co = levitan_coefficients(constant_pair_operator(0.0, 1.0), ContourSpec(4.0, 2.0), [4.0], 12)
    r = eigenfunction_expansion_check(const_pair, co, grid.nodes[grid.nodes <= 2.0], 2.0,
                                      orders=(2, 4, 8))
    assert r.decreasing and not r.stalled


def test_eigen_expansion_small_k_refused(const_pair):
    co = levitan_coefficients(constant_pair_operator(0.0, 1.0), ContourSpec(0.1, 2.0), [0.09], 4)
    with pytest.raises(ContourError):
        eigenfunction_expansion_check(const_pair, co, [0.5], 0.3)


def test_carleman_identical(identity_pair, grid):
    assert np.all(residual_transform(identity_pair).values == 0)
    assert carleman_residual_check(identity_pair, standard_corpus(grid)).worst == 0.0


def test_carleman_const(const_pair, grid):
    r = carleman_residual_check(const_pair, standard_corpus(grid))
    assert r.worst <= 1e-2
    assert np.isfinite(r.g_norm)
    assert r.hypothesis_b == {"p": 0, "m": 1, "satisfied": True, "constant_density": True}
