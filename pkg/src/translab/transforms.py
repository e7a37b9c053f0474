"""Forward and inverse spectral transforms and the Parseval check.

All transforms are dense quadratures against eigen tables:

* ``forward``: ``F(lam_j) = int f(x) psi(x, lam_j) dx``
* ``inverse``: ``f(x_i) = int F psi(x_i, .) dGamma``
* ``cross_inverse``: the same synthesis with eigenfunctions of one operator and
  the measure of the other, e.g. ``int F psi dGamma_P``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigen import EigenTable
from .grids import GridError, SpectralGrid, SpectralMeasure

#: |f(x_max)| / max|f| above this is a support violation
SUPPORT_TOL = 1e-8
REL_FLOOR = 1e-12


class SupportError(ValueError):
    pass


@dataclass(frozen=True)
class TransformVector:
    values: np.ndarray = field(repr=False)
    grid: SpectralGrid
    provenance: str
    tau: np.ndarray | None = field(default=None, repr=False)
    ext_log_abs: np.ndarray | None = field(default=None, repr=False)
    ext_sign: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_k,):
            raise GridError("transform length does not match its spectral grid")
        if not np.all(np.isfinite(v)):
            raise GridError("transform values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def has_extension(self) -> bool:
        return self.tau is not None

    def extension_values(self) -> np.ndarray:
        """``F(i tau)``; may overflow to inf for large types, use ``ext_log_abs`` then."""
        with np.errstate(over="ignore"):
            return self.ext_sign * np.exp(self.ext_log_abs)


def _check_support(f, tol=SUPPORT_TOL):
    scale = max(np.abs(f).max(), REL_FLOOR)
    if abs(f[-1]) > tol * scale:
        raise SupportError("function does not vanish at x_max; truncation would corrupt the transform")


def forward_matrix(eig: EigenTable) -> np.ndarray:
    """``(n_k, n_x)`` matrix of ``forward``."""
    return np.ascontiguousarray(eig.psi.T * eig.grid_x.pairing_weights[None, :])


def forward(f, eig: EigenTable, check_support: bool = True) -> TransformVector:
    f = np.asarray(f, dtype=float)
    if f.shape != (eig.grid_x.n_x,):
        raise GridError("function is not sampled on the eigen table's space grid")
    if check_support:
        _check_support(f)
    if not np.all(eig.valid):
        raise GridError("eigen table has invalid (overflowed) columns")
    return TransformVector(forward_matrix(eig) @ f, eig.grid_k, f"forward[{eig.operator}]")


def synthesis_matrix(eig: EigenTable, density) -> np.ndarray:
    """``(n_x, n_k)`` matrix ``psi(x_i, lam_j) w_j density_j``."""
    return np.ascontiguousarray(eig.psi * (eig.grid_k.weights * density)[None, :])


def _values_on(F, grid: SpectralGrid) -> np.ndarray:
    if isinstance(F, TransformVector):
        if not F.grid.same_nodes(grid):
            raise GridError("transform grid does not match the measure grid")
        return F.values
    F = np.asarray(F, dtype=float)
    if F.shape != (grid.n_k,):
        raise GridError("transform length does not match the measure grid")
    return F


def inverse(F, eig: EigenTable, measure: SpectralMeasure) -> np.ndarray:
    """``f(x) = int F(lam) psi(x, lam) dGamma(lam)`` by trapezoid quadrature."""
    if not eig.grid_k.same_nodes(measure.grid):
        raise GridError("eigen table and measure use different spectral grids")
    values = _values_on(F, measure.grid)
    return synthesis_matrix(eig, measure.density) @ values


def cross_inverse(F, eig_other: EigenTable, measure: SpectralMeasure) -> np.ndarray:
    """Mixed synthesis ``int F psi_other dGamma`` (the tilde transforms)."""
    return inverse(F, eig_other, measure)


@dataclass(frozen=True)
class ParsevalReport:
    lhs: float
    rhs: float
    rel_err: float
    k_max: float
    n_x: int

    def as_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "rel_err": self.rel_err,
                "k_max": self.k_max, "n_x": self.n_x}


def parseval_check(f, g, eig: EigenTable, measure: SpectralMeasure) -> ParsevalReport:
    """Compare ``int f g dx`` with ``int (Qf)(Qg) dGamma``."""
    if not eig.grid_k.same_nodes(measure.grid):
        raise GridError("eigen table and measure use different spectral grids")
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    lhs = float(np.dot(eig.grid_x.pairing_weights, f * g))
    Ff = forward(f, eig).values
    Fg = forward(g, eig).values
    rhs = float(np.dot(measure.weights, Ff * Fg))
    rel = abs(lhs - rhs) / max(abs(lhs), REL_FLOOR)
    return ParsevalReport(lhs, rhs, rel, eig.grid_k.k_max, eig.grid_x.n_x)


def tail_bound(F, measure: SpectralMeasure, fraction: float = 0.1) -> float:
    """Size of ``|F|`` over the top ``fraction`` of the spectral range.

    Used as the reported truncation indicator for inversions at ``k_max``.
    """
    values = np.abs(_values_on(F, measure.grid))
    m = max(1, int(round(fraction * len(values))))
    return float(values[-m:].max())
