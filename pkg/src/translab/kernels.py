"""Triangular transmutation kernels.

``K`` (Gelfand-Levitan) satisfies ``psi = (I + K) phi``:

    psi(x, lam) = phi(x, lam) + int_0^x K(x, t) phi(t, lam) dt.

It is the solution of the Goursat problem

    K_xx - K_tt = q(x) K,   0 <= t <= x,
    K(x, x) = 1/2 int_0^x q,   K_t(x, 0) = 0,

obtained by substituting the representation into ``-psi'' + q psi = lam psi``
and integrating by parts twice: the boundary terms at ``t = x`` give the
diagonal condition, those at ``t = 0`` vanish because ``phi'(0) = 0`` and
``K_t(x, 0) = 0``.  The march works on characteristic rhombi; the rhombus
identity ``K_A - K_B - K_C + K_D = 1/2 iint q K`` is exact, so the only error
is the quadrature of ``q K`` (fourth order inside the triangle, third order
on the cells that touch the diagonal).

Storage convention: ``values[i, j]`` is ``K(x_i, t_j)`` -- row is the output
variable, column the input variable -- and the upper triangle is zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .eigen import EigenTable
from .grids import GridError, PotentialSpec, SpaceGrid, SpectralMeasure, gregory_weights
from .transforms import forward, inverse

KINDS = ("gelfand-levitan", "inverse", "spectral-beta", "spectral-gamma", "v-kernel")


class KernelInstability(RuntimeError):
    pass


@dataclass(frozen=True)
class KernelMatrix:
    grid: SpaceGrid
    values: np.ndarray = field(repr=False)
    kind: str = "gelfand-levitan"
    diagonal_policy: str = "sampled"
    eps: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GridError(f"unknown kernel kind {self.kind!r}")
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_x, self.grid.n_x):
            raise GridError("kernel shape does not match the grid")
        if not np.all(np.isfinite(v)):
            raise GridError("kernel values must be finite")
        if self.kind in ("gelfand-levitan", "inverse"):
            v = np.tril(v)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.values)

    def weighted(self) -> np.ndarray:
        """Quadrature-weighted kernel ``K[i, j] * W[i, j]`` (row integrals)."""
        return self.values * self.grid.row_weights


def goursat_solve(q: PotentialSpec, grid: SpaceGrid) -> KernelMatrix:
    x, h = grid.nodes, grid.h
    half = np.maximum(x - 0.5 * h, 0.0)
    qx = np.ascontiguousarray(q(x), dtype=float)
    q_half = np.ascontiguousarray(q(half), dtype=float)
    kd = np.ascontiguousarray(q.half_integral(x), dtype=float)
    kd_half = np.ascontiguousarray(q.half_integral(half), dtype=float)
    K, ok = _backend.goursat_march(qx, q_half, kd, kd_half, h)
    if not ok:
        raise KernelInstability("Goursat march exceeded the growth limit 1e12")
    return KernelMatrix(grid, K, "gelfand-levitan")


def kernel_from_weighted(grid: SpaceGrid, KW: np.ndarray, kind: str,
                         diagonal: np.ndarray | None = None) -> KernelMatrix:
    W = grid.row_weights
    vals = np.zeros_like(KW)
    nz = W != 0.0
    vals[nz] = KW[nz] / W[nz]
    if diagonal is not None:
        vals[0, 0] = diagonal[0]
    return KernelMatrix(grid, vals, kind)


def invert_kernel(K: KernelMatrix, method: str = "discrete") -> KernelMatrix:
    """Kernel ``L`` of ``(I + K)^-1 = I + L``.

    ``method="discrete"`` inverts the discrete Volterra operator with the same
    row quadrature used to apply the kernels, so the composition is the
    identity to rounding.  Its samples within a few nodes of the diagonal are
    rough because the Gregory end weights are divided out.

    ``method="pointwise"`` solves ``L(x,t) + K(x,t) + int_t^x K(x,s) L(s,t) ds = 0``
    with Gregory weights on each panel ``[t, x]``.  The samples are accurate
    to the order of ``K`` itself, at the price of an O(h^4) composition error.
    """
    if K.kind != "gelfand-levitan":
        raise GridError("invert_kernel expects a Gelfand-Levitan kernel")
    if method == "pointwise":
        return _pointwise_inverse(K)
    if method != "discrete":
        raise ValueError(f"unknown inversion method {method!r}")
    KW = np.ascontiguousarray(K.weighted())
    LW = _backend.volterra_invert(KW)
    return kernel_from_weighted(K.grid, LW, "inverse", diagonal=-K.diagonal)


_GREGORY_EXCESS = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0]) - 1.0


def _pointwise_inverse(K: KernelMatrix) -> KernelMatrix:
    grid, Kv = K.grid, K.values
    h, n = grid.h, grid.n_x
    short = [gregory_weights(m, h) for m in range(5)]
    L = np.zeros((n, n))
    for i in range(1, n):
        row = Kv[i]
        j = np.arange(i)
        S = h * (row[:i] @ L[:i, :i])
        last = np.zeros(i)
        jb = j[i - j >= 5]
        for k, ek in enumerate(_GREGORY_EXCESS):
            S[jb] += h * ek * row[jb + k] * L[jb + k, jb]
            if k:
                S[jb] += h * ek * row[i - k] * L[i - k, jb]
        last[jb] = h * (1.0 + _GREGORY_EXCESS[0])
        for m in range(1, min(5, i + 1)):
            jj = i - m
            w = short[m]
            S[jj] = np.dot(w[:-1], row[jj:i] * L[jj:i, jj])
            last[jj] = w[-1]
        L[i, :i] = -(row[:i] + S) / (1.0 + last * row[i])
        L[i, i] = -Kv[i, i]
    return KernelMatrix(grid, L, "inverse")


def volterra_matrix(kernel: KernelMatrix) -> np.ndarray:
    """Matrix of ``f -> f + int_0^x kernel(x, t) f(t) dt``."""
    return np.eye(kernel.grid.n_x) + kernel.weighted()


def adjoint_matrix(A: np.ndarray, grid: SpaceGrid, weights: np.ndarray | None = None) -> np.ndarray:
    """Adjoint w.r.t. the discrete pairing ``<f, g> = sum w f g`` with Gregory ``w``.

    For the Volterra matrix ``I + K*W`` this gives
    ``f(t) + int_t^x_max K(x, t) f(x) dx`` with Gregory end corrections at
    ``x = t``, and the adjoint identity holds to rounding.
    """
    w = grid.adjoint_weights if weights is None else weights
    return (A.T * w[None, :]) / w[:, None]


def spectral_kernel(eig1: EigenTable, eig2: EigenTable, measure: SpectralMeasure,
                    eps: float) -> KernelMatrix:
    """Regular part of ``beta(y, x) = int psi1(x) psi2(y) dGamma`` at regularization eps.

    The integral is damped by ``exp(-eps s^2)``; the singular identity part
    is removed by subtracting the equally damped ``int psi1(x) psi1(y) dGamma``,
    which is the mollified ``delta(x - y)`` (plus its mirror image at the
    Neumann end).  Row index is ``y``, column index ``x``.
    """
    if not eps > 0:
        raise ValueError("regularization width eps must be positive")
    for e in (eig1, eig2):
        if not e.grid_k.same_nodes(measure.grid):
            raise GridError("eigen tables must share the measure's spectral grid")
    s = measure.grid.nodes
    w = measure.weights * np.exp(-eps * s * s)
    diff = eig2.psi - eig1.psi
    vals = (diff * w[None, :]) @ eig1.psi.T
    kind = "spectral-beta"
    return KernelMatrix(eig1.grid_x, vals, kind, diagonal_policy="symbolic-identity", eps=eps)


def richardson_weights(ratio: float = 2.0, n: int = 3) -> np.ndarray:
    """Weights cancelling the eps, ..., eps^(n-1) terms on the ladder eps*ratio^m."""
    A = np.array([[ratio ** (m * p) for m in range(n)] for p in range(n)])
    rhs = np.zeros(n)
    rhs[0] = 1.0
    return np.linalg.solve(A, rhs)


def spectral_kernel_extrapolated(eig1: EigenTable, eig2: EigenTable,
                                 measure: SpectralMeasure, eps0: float | None = None,
                                 ratio: float = 2.0) -> KernelMatrix:
    """Richardson limit eps -> 0 over the ladder ``eps0 * (1, 2, 4)``.

    Default ``eps0 = 10 / s_max^2`` keeps the damping at the cutoff near e^-10.
    """
    if eps0 is None:
        eps0 = 10.0 / measure.grid.k_max**2
    cw = richardson_weights(ratio, 3)
    vals = sum(c * spectral_kernel(eig1, eig2, measure, eps0 * ratio**m).values
               for m, c in enumerate(cw))
    return KernelMatrix(eig1.grid_x, vals, "spectral-beta",
                        diagonal_policy="symbolic-identity", eps=0.0)


@dataclass(frozen=True)
class IdentityReport:
    worst_rel_err: float
    per_function: dict
    k_max: float

    def as_dict(self) -> dict:
        return {"worst_rel_err": self.worst_rel_err, "per_function": self.per_function,
                "k_max": self.k_max}


def delta_identity_check(eig: EigenTable, measure: SpectralMeasure, corpus) -> IdentityReport:
    """``h = Q^-1 Q h`` on the corpus: the operational content of delta = int psi psi dGamma."""
    errs = {}
    for tf in corpus:
        h = np.asarray(tf.values)
        back = inverse(forward(h, eig), eig, measure)
        scale = np.abs(h).max()
        errs[tf.name] = float(np.abs(back - h).max() / scale) if scale > 0 else float(np.abs(back).max())
    worst = max(errs.values()) if errs else 0.0
    return IdentityReport(worst, errs, measure.grid.k_max)


@dataclass(frozen=True)
class InversionReport:
    left: float
    right: float
    per_function: dict

    @property
    def worst(self) -> float:
        return max(self.left, self.right)

    def as_dict(self) -> dict:
        return {"left": self.left, "right": self.right, "per_function": self.per_function}


def inversion_kernel_check(K: KernelMatrix, L: KernelMatrix, corpus) -> InversionReport:
    """Sup deviation of ``(I+L)(I+K) f`` and ``(I+K)(I+L) f`` from ``f``, relative to ``|f|``."""
    B = volterra_matrix(K)
    Bi = volterra_matrix(L)
    per = {}
    left = right = 0.0
    for tf in corpus:
        f = np.asarray(tf.values)
        n = max(np.abs(f).max(), 1e-300)
        a = float(np.abs(Bi @ (B @ f) - f).max() / n)
        b = float(np.abs(B @ (Bi @ f) - f).max() / n)
        per[tf.name] = (a, b)
        left, right = max(left, a), max(right, b)
    return InversionReport(left, right, per)
