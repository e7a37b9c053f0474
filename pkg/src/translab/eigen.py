"""Generalized eigenfunctions of ``P = -D^2`` and ``Q = -D^2 + q``.

Both are normalized by ``psi(0) = 1`` and ``psi'(0) = 0``.  Tables are indexed
``psi[i, j] = psi(x_i, lam_j)`` with ``lam_j = s_j**2 + shift``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .grids import GridError, PotentialSpec, SpaceGrid, SpectralGrid

#: largest phase advance ``sqrt|lam - q| * substep`` the RK4 march allows
MAX_PHASE_STEP = 0.05


class EigenError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenTable:
    operator: str
    grid_x: SpaceGrid
    grid_k: SpectralGrid
    psi: np.ndarray = field(repr=False)
    psi_x: np.ndarray = field(repr=False)
    valid: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        shape = (self.grid_x.n_x, self.grid_k.n_k)
        if self.psi.shape != shape or self.psi_x.shape != shape:
            raise GridError(f"eigen table must have shape {shape}")
        valid = np.ones(shape[1], bool) if self.valid is None else np.asarray(self.valid, bool)
        object.__setattr__(self, "valid", valid)
        for a in (self.psi, self.psi_x, self.valid):
            a.flags.writeable = False

    @property
    def lam(self) -> np.ndarray:
        return self.grid_k.lam

    def column(self, j: int) -> np.ndarray:
        return self.psi[:, j]


def _check_boundary(h: float):
    if h != 0.0:
        raise NotImplementedError("only the condition psi'(0) = 0 (h = 0) is supported")


def eigen_reference(grid_x: SpaceGrid, grid_k: SpectralGrid) -> EigenTable:
    """``phi(x, lam) = cos(sqrt(lam) x)`` in closed form (cosh for lam < 0)."""
    return eigen_closed_form(PotentialSpec.zero(), grid_x, grid_k, operator="P")


def _effective_wavenumber(lam, c):
    return np.sqrt(np.asarray(lam, dtype=float) - c + 0j)


def eigen_closed_form(q: PotentialSpec, grid_x: SpaceGrid, grid_k: SpectralGrid,
                      operator: str | None = None) -> EigenTable:
    """Exact eigenfunctions for the zero and constant families."""
    if not q.is_closed_form:
        raise EigenError(f"family {q.family!r} has no closed-form eigenfunctions")
    x = grid_x.nodes
    kap = _effective_wavenumber(grid_k.lam, q.level)
    arg = np.outer(x, kap)
    psi = np.cos(arg).real
    psi_x = (-np.sin(arg) * kap[None, :]).real
    psi[0] = 1.0
    psi_x[0] = 0.0
    return EigenTable(operator or f"Q[{q.describe()}]", grid_x, grid_k, psi, psi_x)


def substeps_for(q: PotentialSpec, grid_x: SpaceGrid, grid_k: SpectralGrid) -> int:
    qx = q(np.linspace(0.0, grid_x.x_max, 4 * grid_x.n_x))
    lam = grid_k.lam
    kap = math.sqrt(max(lam.max() - qx.min(), qx.max() - lam.min(), 0.0))
    return max(1, math.ceil(kap * grid_x.h / MAX_PHASE_STEP))


def eigen_solve(q: PotentialSpec, grid_x: SpaceGrid, grid_k: SpectralGrid,
                boundary_h: float = 0.0, n_sub: int | None = None) -> EigenTable:
    """Solve ``-psi'' + q psi = lam psi``, ``psi(0)=1``, ``psi'(0)=0`` per column.

    Fixed-step classical RK4.  Each grid interval is split into ``n_sub``
    equal substeps (chosen so the phase advance per substep stays below
    ``MAX_PHASE_STEP``), so the result is deterministic and O(h^4).
    Columns that overflow are marked invalid and filled with NaN.
    """
    _check_boundary(boundary_h)
    if n_sub is None:
        n_sub = substeps_for(q, grid_x, grid_k)
    n = grid_x.n_x
    fine = np.linspace(0.0, grid_x.x_max, 2 * n_sub * (n - 1) + 1)
    q_fine = np.ascontiguousarray(q(fine), dtype=float)
    lam = np.ascontiguousarray(grid_k.lam, dtype=float)
    psi, dpsi, valid = _backend.rk4_march(q_fine, lam, grid_x.h, int(n_sub))
    return EigenTable(f"Q[{q.describe()}]", grid_x, grid_k, psi, dpsi, valid)


def apply_operator(q: PotentialSpec, f, grid: SpaceGrid):
    """``-f'' + q f`` by centered second differences.

    Endpoints use the one-sided second-order stencil.  Returns the values and a
    boolean mask that is False on the two boundary layers at each end, where
    the result is low-accuracy.
    """
    f = np.asarray(f, dtype=float)
    n = len(f)
    if n < 5:
        raise GridError("apply_operator needs at least 5 nodes")
    if n != grid.n_x:
        raise GridError("sample count does not match the grid")
    h2 = grid.h**2
    d2 = np.empty(n)
    d2[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h2
    d2[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2
    d2[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h2
    mask = np.ones(n, bool)
    mask[:2] = mask[-2:] = False
    return -d2 + q(grid.nodes) * f, mask
