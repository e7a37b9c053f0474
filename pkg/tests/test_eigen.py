import numpy as np
import pytest

from translab.eigen import (apply_operator, eigen_closed_form, eigen_reference, eigen_solve)
from translab.grids import PotentialSpec, SpaceGrid, SpectralGrid


def test_reference_at_origin():
    e = eigen_reference(SpaceGrid(4.0, 64), SpectralGrid(10.0, 21))
    assert np.all(e.psi[0] == 1.0)


def test_reference_zero_wavenumber():
    e = eigen_reference(SpaceGrid(4.0, 64), SpectralGrid(10.0, 21))
    assert np.all(e.psi[:, 0] == 1.0)


def test_reference_cos_pi():
    g = SpaceGrid(2 * np.pi, 201)
    e = eigen_reference(g, SpectralGrid(2.0, 3))
    assert e.psi[100, 1] == pytest.approx(-1.0, abs=1e-15)


def test_solve_zero_potential_matches_cos():
    g = SpaceGrid(8.0, 512)
    gk = SpectralGrid(20.0, 41)
    e = eigen_solve(PotentialSpec.zero(), g, gk)
    assert np.abs(e.psi - np.cos(np.outer(g.nodes, gk.nodes))).max() < 1e-5


def test_solve_constant_matches_closed_form():
    g = SpaceGrid(8.0, 512)
    gk = SpectralGrid(20.0, 41)
    q = PotentialSpec.constant(1.0)
    a, b = eigen_solve(q, g, gk), eigen_closed_form(q, g, gk)
    assert np.abs(a.psi - b.psi).max() < 1e-5


def test_solve_at_spectral_edge_is_one():
    g = SpaceGrid(8.0, 256)
    gk = SpectralGrid(5.0, 11, shift=1.0)
    e = eigen_solve(PotentialSpec.constant(1.0), g, gk)
    assert np.abs(e.psi[:, 0] - 1.0).max() < 1e-12


def test_initial_conditions_exact():
    g = SpaceGrid(8.0, 128)
    gk = SpectralGrid(30.0, 31)
    e = eigen_solve(PotentialSpec.constant(0.5), g, gk)
    assert np.all(e.psi[0] == 1.0) and np.all(e.psi_x[0] == 0.0)


def test_fourth_order_without_substeps():
    gk = SpectralGrid(5.0, 11)
    q = PotentialSpec.constant(1.0)
    errs = []
    for n in (129, 257, 513):
        g = SpaceGrid(8.0, n)
        errs.append(np.abs(eigen_solve(q, g, gk, n_sub=1).psi - eigen_closed_form(q, g, gk).psi).max())
    assert errs[0] / errs[2] >= 12.0


def test_wronskian_reference():
    g = SpaceGrid(8.0, 512)
    gk = SpectralGrid(10.0, 11)
    e = eigen_solve(PotentialSpec.zero(), g, gk)
    k = gk.nodes[1:]
    w = e.psi[:, 1:] ** 2 + (e.psi_x[:, 1:] / k) ** 2
    assert np.abs(w - 1).max() < 1e-6


def test_nonzero_boundary_parameter_rejected():
    with pytest.raises(NotImplementedError):
        eigen_solve(PotentialSpec.zero(), SpaceGrid(1.0, 16), SpectralGrid(1.0, 4), boundary_h=0.5)


def test_deterministic():
    g, gk = SpaceGrid(8.0, 128), SpectralGrid(30.0, 31)
    q = PotentialSpec.sampled(np.sin(np.linspace(0, 8, 20)), SpaceGrid(8.0, 20))
    a, b = eigen_solve(q, g, gk), eigen_solve(q, g, gk)
    assert np.array_equal(a.psi, b.psi)


def test_apply_operator_cos():
    g = SpaceGrid(8.0, 1024)
    k = 3.0
    v, mask = apply_operator(PotentialSpec.zero(), np.cos(k * g.nodes), g)
    assert np.abs(v - k * k * np.cos(k * g.nodes))[mask].max() < 2e-3


def test_apply_operator_constant_one():
    g = SpaceGrid(1.0, 32)
    v, _ = apply_operator(PotentialSpec.constant(1.0), np.ones(32), g)
    assert np.allclose(v, 1.0, atol=1e-10)


def test_apply_operator_quadratic():
    g = SpaceGrid(1.0, 64)
    v, mask = apply_operator(PotentialSpec.zero(), g.nodes**2, g)
    assert np.abs(v[mask] + 2.0).max() < 1e-8


def test_eigen_relation_residual_order():
    q = PotentialSpec.constant(1.0)
    gk = SpectralGrid(5.0, 6, shift=1.0)
    res = []
    for n in (256, 512):
        g = SpaceGrid(8.0, n)
        e = eigen_solve(q, g, gk)
        r = [np.abs(apply_operator(q, e.psi[:, j], g)[0] - gk.lam[j] * e.psi[:, j])[2:-2].max()
             for j in range(gk.n_k)]
        res.append(max(r))
    assert res[0] / res[1] >= 3.0
