import os
import subprocess
import sys

import numpy as np
import pytest

from translab import _backend, _fallback
from translab.grids import PotentialSpec, SpaceGrid

core = pytest.importorskip("translab._core")


def _goursat_args(n=200, c=lambda x: np.exp(-x)):
    g = SpaceGrid(5.0, n)
    q = PotentialSpec.sampled(c(g.nodes), g)
    x, h = g.nodes, g.h
    half = np.maximum(x - 0.5 * h, 0.0)
    return (np.ascontiguousarray(q(x)), np.ascontiguousarray(q(half)),
            np.ascontiguousarray(q.half_integral(x)), np.ascontiguousarray(q.half_integral(half)), h)


def test_goursat_backends_agree():
    args = _goursat_args()
    Kc, okc = core.goursat_march(*args)
    Kp, okp = _fallback.goursat_march(*args)
    assert okc and okp
    assert np.abs(np.asarray(Kc) - Kp).max() <= 1e-13


def test_volterra_backends_agree():
    rng = np.random.default_rng(0)
    KW = np.ascontiguousarray(np.tril(rng.normal(size=(150, 150))) * 0.01)
    assert np.abs(np.asarray(core.volterra_invert(KW)) - _fallback.volterra_invert(KW)).max() <= 1e-13


def test_rk4_backends_agree():
    q = np.ascontiguousarray(np.cos(np.linspace(0, 4, 2 * 2 * 99 + 1)))
    lam = np.ascontiguousarray(np.linspace(-1.0, 30.0, 17))
    h = 4.0 / 99
    pc, dc, vc = core.rk4_march(q, lam, h, 2)
    pp, dp, vp = _fallback.rk4_march(q, lam, h, 2)
    assert np.array_equal(np.asarray(vc), np.asarray(vp))
    assert np.abs(np.asarray(pc) - pp).max() <= 1e-12
    assert np.abs(np.asarray(dc) - dp).max() <= 1e-12


def test_growth_flag_both_backends():
    args = _goursat_args(64, lambda x: 400.0 + 0 * x)
    assert not core.goursat_march(*args)[1]
    assert not _fallback.goursat_march(*args)[1]


@pytest.mark.skipif(os.environ.get("TRANSLAB_PURE") == "1", reason="fallback forced")
def test_compiled_backend_selected():
    assert _backend.NAME == "cython"


def test_pure_python_switch():
    env = dict(os.environ, TRANSLAB_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import translab; print(translab.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    assert out == "python"
