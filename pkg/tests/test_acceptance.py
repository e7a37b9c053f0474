"""Exit criteria at the stated tolerances, one test per criterion.

Default setting: x_max = 8, n_x = 512, k_max = 100, n_k = 512.  The pair
fixtures are (0, 0) and (0, const 1).
"""
import subprocess
import sys

import numpy as np
import pytest

from translab.corpus import interior_corpus, pw_corpus, standard_corpus
from translab.eigen import eigen_closed_form, eigen_reference, eigen_solve
from translab.grids import PotentialSpec, SpaceGrid, SpectralGrid, measure_for
from translab.kernels import (goursat_solve, inversion_kernel_check, invert_kernel,
                              spectral_kernel_extrapolated, volterra_matrix)
from translab.levitan import (ContourSpec, carleman_residual_check, derivative_operator,
                              levitan_coefficients, multiplication_operator, shift_operator)
from translab.paleywiener import pwp_check, triangularity_probe
from translab.transforms import parseval_check
from translab.transmute import (OperatorPair, build_Bcal, build_Bcal_sqrt, build_V,
                                factorization_check, intertwining_residual, kernel_operator)

pytestmark = pytest.mark.acceptance

ZERO = PotentialSpec.zero()
ONE = PotentialSpec.constant(1.0)


def _l2(f, grid):
    return np.sqrt(np.dot(grid.pairing_weights, f * f))


def test_c01_identity_pair(grid, identity_pair, criterion):
    K = goursat_solve(ZERO, grid)
    corpus = standard_corpus(grid)
    V = build_V(identity_pair)
    v_err = max(_l2(V(t.values) - t.values, grid) / _l2(t.values, grid) for t in corpus)
    fac = max(factorization_check(identity_pair, K, invert_kernel(K), corpus).values())
    ok = np.all(K.values == 0) and v_err <= 1e-3 and fac <= 1e-3
    criterion(1, ok, "identity pair: K = 0, V = I, factorizations",
              f"max|K|={np.abs(K.values).max():.1e} V-I={v_err:.2e} fact={fac:.2e}")


def test_c02_eigen_order(criterion):
    gk = SpectralGrid(5.0, 11)
    errs = []
    for n in (129, 257, 513):
        g = SpaceGrid(8.0, n)
        errs.append(np.abs(eigen_solve(ONE, g, gk, n_sub=1).psi - eigen_closed_form(ONE, g, gk).psi).max())
    ratio = errs[0] / errs[2]
    criterion(2, ratio >= 12.0, "RK4 error drop over two halvings of h",
              f"errors={errs[0]:.2e},{errs[1]:.2e},{errs[2]:.2e} ratio={ratio:.0f}")


def test_c03_transmutation_identity(grid, criterion):
    B = volterra_matrix(goursat_solve(ONE, grid))
    worst = 0.0
    for k in (1.0, 2.0, 3.0, 5.0):
        gk = SpectralGrid(k, 2)
        phi = eigen_reference(grid, gk).psi[:, 1]
        psi = eigen_solve(ONE, grid, gk).psi[:, 1]
        worst = max(worst, np.abs(B @ phi - psi).max())
    criterion(3, worst <= 1e-3, "(I + K) phi = psi2 for k in {1,2,3,5}", f"sup={worst:.2e}")


def test_c04_kernel_cross_method(grid, criterion):
    gk = SpectralGrid(100.0, 512)
    m = measure_for(ZERO, 100.0, 512)
    e1 = eigen_reference(grid, gk)
    X, T = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
    off = np.abs(X - T) > 0.2
    errs = {}
    for c in (0.5, 1.0):
        q = PotentialSpec.constant(c)
        S = spectral_kernel_extrapolated(e1, eigen_closed_form(q, grid, gk), m)
        errs[c] = float(np.abs(S.values - goursat_solve(q, grid).values)[off].max())
    worst = max(errs.values())
    criterion(4, worst <= 0.05, "Goursat vs spectral kernel off the diagonal",
              " ".join(f"c={c}:{v:.2e}" for c, v in errs.items()))


def _parseval_worst(q, grid, k_max, n_k):
    m = measure_for(q, k_max, n_k)
    eig = eigen_closed_form(q, grid, m.grid)
    corpus = standard_corpus(grid)
    assert len(corpus) == 10
    wide = max(corpus, key=lambda t: t.sigma - t.support[0])
    return max(max(parseval_check(t.values, t.values, eig, m).rel_err,
                   parseval_check(t.values, wide.values, eig, m).rel_err) for t in corpus)


def test_c05_parseval(grid, criterion):
    plain = _parseval_worst(ZERO, grid, 200.0, 1024)
    shifted = _parseval_worst(ONE, grid, 200.0, 1024)
    criterion(5, plain <= 1e-2 and shifted <= 2e-2, "Parseval on the 10-member corpus, k_max = 200",
              f"q=0:{plain:.2e} shifted:{shifted:.2e}")


def test_c06_intertwining(grid, const_pair, criterion):
    r = intertwining_residual(build_V(const_pair), ZERO, ONE, interior_corpus(grid))
    criterion(6, r.worst <= 1e-2, "V Q2 f = Q1 V f on the interior corpus", f"rel={r.worst:.2e}")


def test_c07_triangularity(const_pair, criterion):
    r = triangularity_probe(build_V(const_pair, window="hann"), y0=2.0)
    leak = r.leak_fraction
    criterion(7, r.monotone and leak[-1] <= 0.02, "delta-probe mass beyond y0 + 0.1",
              "widths 16h,8h,4h: " + ",".join(f"{v:.1e}" for v in leak))


def test_c08_pwp_transfer(grid, const_pair, criterion):
    r = pwp_check(const_pair, pw_corpus(grid, (1.0, 2.0, 4.0)))
    rows = "; ".join(f"s={row.sigma:g} supp(Vf)={row.sigma_supp_out:.3f} type={row.sigma_type:.3f}"
                     f" back={row.sigma_supp_back:.3f}" for row in r.rows)
    criterion(8, r.ok, "support/type transfer, both directions", rows)


def test_c09_kernel_inversion(grid, const_pair, criterion):
    K = goursat_solve(ONE, grid)
    L = invert_kernel(K)
    corpus = standard_corpus(grid)
    volterra = inversion_kernel_check(K, L, corpus).worst
    Bc, B, IL = build_Bcal(const_pair, 1.0), kernel_operator(K), volterra_matrix(L)
    spectral = 0.0
    for t in corpus:
        f = IL @ t.values
        spectral = max(spectral, np.abs(Bc(B(f)) - f).max() / np.abs(f).max())
    criterion(9, volterra <= 1e-6 and spectral <= 1e-2, "(I+L)(I+K) = I and Bcal B = I",
              f"volterra={volterra:.1e} spectral={spectral:.2e}")


def test_c10_rescaled_intertwining(grid, const_pair, criterion):
    r = intertwining_residual(build_Bcal_sqrt(const_pair), ZERO, ONE, interior_corpus(grid))
    criterion(10, r.worst <= 1e-2, "Q1 Bcal f = Bcal Q2 f, multiplier sqrt(gamma2/gamma1)",
              f"rel={r.worst:.2e}")


def test_c11_levitan_oracles(criterion):
    z = np.array([0.05, 0.1 + 0.05j, -0.1])
    C = ContourSpec(0.0, 0.5, 64)
    j = np.arange(9)
    fact = np.cumprod(np.r_[1.0, np.arange(1, 9)])
    want = {
        "mult": (multiplication_operator, np.column_stack([z] + [np.zeros_like(z)] * 8)),
        "deriv": (derivative_operator, np.tile((j == 1).astype(float), (3, 1))),
        "shift": (shift_operator(0.1), np.tile(0.1**j / fact, (3, 1))),
    }
    errs = {k: float(np.abs(levitan_coefficients(op, C, z, 8).a - w).max())
            for k, (op, w) in want.items()}
    zi = z[:1] * 0.5
    errs["radius"] = float(np.abs(levitan_coefficients(shift_operator(0.1), C, zi, 8).a
                                  - levitan_coefficients(shift_operator(0.1), C.scaled(0.5), zi, 8).a
                                  ).max())
    criterion(11, max(errs.values()) <= 1e-8, "contour coefficients of the three oracles",
              " ".join(f"{k}={v:.1e}" for k, v in errs.items()))


def test_c12_carleman(grid, const_pair, criterion):
    r = carleman_residual_check(const_pair, standard_corpus(grid))
    ok = r.worst <= 1e-2 and np.isfinite(r.g_norm)
    criterion(12, ok, "Carleman identity and finite g profile",
              f"worst={r.worst:.2e} |g|={r.g_norm:.3g}")


def test_c13_determinism(tmp_path, criterion):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        subprocess.run([sys.executable, "-m", "translab.cli", "run", "const-shift",
                        "--out-dir", str(d), "--threads", "2" if name == "b" else "1"],
                       check=True, capture_output=True)
        outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    same = outs[0].keys() == outs[1].keys() and all(outs[0][k] == outs[1][k] for k in outs[0])
    criterion(13, same and len(outs[0]) >= 10, "two runs give byte-identical artifacts",
              f"{len(outs[0])} files")
