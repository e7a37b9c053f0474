"""Space and spectral grids, potentials, spectral measures and quadrature.

Everything here is immutable after construction.  The half-line is truncated
at ``x_max``; the spectral variable ``s`` runs over ``[0, k_max]`` and maps to
the spectral parameter through ``lam = s**2 + shift``.  For the free operator
``shift = 0`` and ``s`` is the usual wavenumber ``k``; for a constant
potential ``c`` the natural variable is the shifted wavenumber
``sqrt(lam - c)``, in which the spectral density is again ``2/pi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

TWO_OVER_PI = 2.0 / np.pi


class GridError(ValueError):
    pass


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights; an even node count closes with the 3/8 rule."""
    if n < 4:
        raise GridError("Simpson weights need at least 4 nodes")
    w = np.zeros(n)
    m = n if n % 2 == 1 else n - 3
    w[:m:2] = 2.0
    w[1:m:2] = 4.0
    w[0] = 1.0
    w[m - 1] = 1.0
    w[:m] *= h / 3.0
    if m != n:
        w[m - 1] += 3.0 * h / 8.0
        w[m:] += np.array([9.0, 9.0, 3.0]) * h / 8.0
    return w


def gregory_weights(n_intervals: int, h: float) -> np.ndarray:
    """Fourth-order weights for a uniform panel with ``n_intervals`` steps.

    Gregory end corrections (3/8, 7/6, 23/24) for six or more nodes; the short
    panels fall back to trapezoid, Simpson, Simpson 3/8 and composite Simpson.
    """
    m = n_intervals
    if m == 0:
        return np.zeros(1)
    if m == 1:
        w = np.array([0.5, 0.5])
    elif m == 2:
        w = np.array([1.0, 4.0, 1.0]) / 3.0
    elif m == 3:
        w = np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
    elif m == 4:
        w = np.array([1.0, 4.0, 2.0, 4.0, 1.0]) / 3.0
    else:
        w = np.ones(m + 1)
        end = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0])
        w[:3] = end
        w[-3:] = end[::-1]
    return w * h


@dataclass(frozen=True)
class SpaceGrid:
    """Uniform grid on ``[0, x_max]``."""

    x_max: float
    n_x: int
    rule: str = "trapezoid"

    def __post_init__(self):
        if not (self.x_max > 0 and np.isfinite(self.x_max)):
            raise GridError(f"x_max must be positive, got {self.x_max}")
        if int(self.n_x) != self.n_x or self.n_x < 8:
            raise GridError(f"n_x must be an integer >= 8, got {self.n_x}")
        if self.rule not in ("trapezoid", "simpson"):
            raise GridError(f"unknown quadrature rule {self.rule!r}")

    @property
    def h(self) -> float:
        return self.x_max / (self.n_x - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(0.0, self.x_max, self.n_x)
        x.flags.writeable = False
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        if self.rule == "simpson":
            w = simpson_weights(self.n_x, self.h)
        else:
            w = trapezoid_weights(self.n_x, self.h)
        w.flags.writeable = False
        return w

    @cached_property
    def pairing_weights(self) -> np.ndarray:
        """Trapezoid weights used for L2 pairings and discrete adjoints."""
        w = trapezoid_weights(self.n_x, self.h)
        w.flags.writeable = False
        return w

    @cached_property
    def adjoint_weights(self) -> np.ndarray:
        """Full-grid Gregory weights; the pairing under which ``row_weights`` has
        a column structure that is itself a quadrature (used for ``B*``)."""
        w = gregory_weights(self.n_x - 1, self.h)
        w.flags.writeable = False
        return w

    @cached_property
    def row_weights(self) -> np.ndarray:
        """Lower-triangular ``W`` with ``sum_j W[i, j] g(x_j) ~ int_0^{x_i} g``."""
        n, h = self.n_x, self.h
        W = np.zeros((n, n))
        for i in range(1, n):
            W[i, : i + 1] = gregory_weights(i, h)
        W.flags.writeable = False
        return W

    def with_n(self, n_x: int) -> "SpaceGrid":
        return SpaceGrid(self.x_max, n_x, self.rule)


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform grid in the spectral variable ``s`` on ``[0, k_max]``.

    ``lam = s**2 + shift``.  ``shift = 0`` is the plain wavenumber convention.
    """

    k_max: float
    n_k: int
    shift: float = 0.0

    def __post_init__(self):
        if not (self.k_max > 0 and np.isfinite(self.k_max)):
            raise GridError(f"k_max must be positive, got {self.k_max}")
        if int(self.n_k) != self.n_k or self.n_k < 2:
            raise GridError(f"n_k must be an integer >= 2, got {self.n_k}")
        if not np.isfinite(self.shift):
            raise GridError("shift must be finite")

    @property
    def ds(self) -> float:
        return self.k_max / (self.n_k - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        s = np.linspace(0.0, self.k_max, self.n_k)
        s.flags.writeable = False
        return s

    @cached_property
    def lam(self) -> np.ndarray:
        lam = self.nodes**2 + self.shift
        lam.flags.writeable = False
        return lam

    @cached_property
    def weights(self) -> np.ndarray:
        w = trapezoid_weights(self.n_k, self.ds)
        w.flags.writeable = False
        return w

    def same_nodes(self, other: "SpectralGrid") -> bool:
        return (self.k_max, self.n_k, self.shift) == (other.k_max, other.n_k, other.shift)


@dataclass(frozen=True)
class PotentialSpec:
    """The potential ``q`` of ``Q = -D^2 + q``.

    ``family`` is one of ``zero``, ``constant``, ``sampled`` or
    ``analytic-table``.  Sampled families carry values on a ``SpaceGrid`` and
    are evaluated off-grid through a clamped cubic spline.
    """

    family: str = "zero"
    c: float = 0.0
    values: tuple | None = None
    x_max: float | None = None
    smoothness: int | None = None

    def __post_init__(self):
        if self.family not in ("zero", "constant", "sampled", "analytic-table"):
            raise GridError(f"unsupported potential family {self.family!r}")
        if self.family in ("sampled", "analytic-table"):
            if self.values is None or self.x_max is None:
                raise GridError("sampled potentials need values and x_max")
            v = np.asarray(self.values, dtype=float)
            if v.ndim != 1 or len(v) < 4 or not np.all(np.isfinite(v)):
                raise GridError("sampled potential values must be finite, length >= 4")
        elif not np.isfinite(self.c):
            raise GridError("constant potential must be finite")

    @classmethod
    def zero(cls) -> "PotentialSpec":
        return cls("zero")

    @classmethod
    def constant(cls, c: float) -> "PotentialSpec":
        return cls("constant", c=float(c))

    @classmethod
    def sampled(cls, values: Sequence[float], grid: SpaceGrid,
                smoothness: int | None = None) -> "PotentialSpec":
        fam = "sampled" if smoothness is None else "analytic-table"
        return cls(fam, values=tuple(float(v) for v in values), x_max=grid.x_max,
                   smoothness=smoothness)

    @property
    def is_closed_form(self) -> bool:
        return self.family in ("zero", "constant")

    @property
    def level(self) -> float:
        """Constant value for closed-form families (0 for ``zero``)."""
        if not self.is_closed_form:
            raise GridError(f"family {self.family!r} has no constant level")
        return 0.0 if self.family == "zero" else self.c

    @cached_property
    def _spline(self) -> CubicSpline:
        v = np.asarray(self.values, dtype=float)
        xs = np.linspace(0.0, self.x_max, len(v))
        return CubicSpline(xs, v, bc_type="natural", extrapolate=True)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_closed_form:
            return np.full(x.shape, self.level)
        return self._spline(x)

    def half_integral(self, x) -> np.ndarray:
        """``0.5 * int_0^x q(s) ds``: the diagonal of the Gelfand-Levitan kernel."""
        x = np.asarray(x, dtype=float)
        if self.is_closed_form:
            return 0.5 * self.level * x
        return 0.5 * self._spline.antiderivative()(x)

    def describe(self) -> str:
        if self.family == "zero":
            return "zero"
        if self.family == "constant":
            return f"constant({self.c:g})"
        return f"{self.family}[{len(self.values)}]"


@dataclass(frozen=True)
class SpectralMeasure:
    """Density ``gamma(s_j)`` w.r.t. ``ds`` on a spectral grid.

    ``kind``: ``lebesgue-cosine`` (density 2/pi, shift 0),
    ``shifted-cosine`` (density 2/pi in the variable ``sqrt(lam - c)``)
    or ``custom``.
    """

    grid: SpectralGrid
    density: np.ndarray = field(repr=False)
    kind: str = "custom"
    c: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.density, dtype=float)
        if d.shape != (self.grid.n_k,):
            raise GridError("density length does not match the spectral grid")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise GridError("spectral density must be finite and nonnegative")
        if self.kind == "lebesgue-cosine" and not np.allclose(d, TWO_OVER_PI, rtol=0, atol=1e-15):
            raise GridError("lebesgue-cosine measure must have density 2/pi")
        d = d.copy()
        d.flags.writeable = False
        object.__setattr__(self, "density", d)

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights of ``dGamma`` at the grid nodes."""
        return self.grid.weights * self.density

    def density_lambda(self, lam) -> np.ndarray:
        """``dGamma/dlam`` for the closed-form kinds; zero outside the spectrum."""
        if self.kind not in ("lebesgue-cosine", "shifted-cosine"):
            raise GridError("dGamma/dlam is only available for cosine-type measures")
        lam = np.asarray(lam, dtype=float)
        d = lam - self.c
        out = np.zeros_like(d)
        pos = d > 0
        out[pos] = 1.0 / (np.pi * np.sqrt(d[pos]))
        return out

    def density_on(self, grid: SpectralGrid) -> np.ndarray:
        """Density of this measure expressed in the variable of ``grid``.

        Uses ``dlam/ds = 2 s`` on the target grid.  Raises when the target
        nodes sit on the spectral edge of this measure (non-integrable there).
        """
        if grid.same_nodes(self.grid):
            return np.asarray(self.density)
        if self.kind not in ("lebesgue-cosine", "shifted-cosine"):
            raise GridError("re-gridding needs a cosine-type measure")
        s, lam = grid.nodes, grid.lam
        d = lam - self.c
        out = np.zeros(grid.n_k)
        pos = d > 0
        out[pos] = 2.0 * s[pos] / (np.pi * np.sqrt(d[pos]))
        if grid.shift < self.c and np.any(pos & (d < 1e-12)):
            raise GridError("target grid touches the edge of the spectrum")
        return out

    def scaled(self, factor: float) -> "SpectralMeasure":
        kind = self.kind if factor == 1.0 else "custom"
        return SpectralMeasure(self.grid, self.density * factor, kind, self.c)


def make_cosine_measure(grid: SpectralGrid) -> SpectralMeasure:
    """``dGamma_P = (2/pi) dk`` for ``P = -D^2`` with the Neumann condition."""
    if grid.shift != 0.0:
        raise GridError("the cosine measure lives on an unshifted grid")
    return SpectralMeasure(grid, np.full(grid.n_k, TWO_OVER_PI), "lebesgue-cosine", 0.0)


def make_shifted_measure(c: float, k_max: float, n_k: int) -> SpectralMeasure:
    grid = SpectralGrid(k_max, n_k, shift=float(c))
    return SpectralMeasure(grid, np.full(n_k, TWO_OVER_PI), "shifted-cosine", float(c))


def measure_for(q: PotentialSpec, k_max: float, n_k: int) -> SpectralMeasure:
    """Analytic spectral measure of ``-D^2 + q``; closed-form families only."""
    if q.family == "zero":
        return make_cosine_measure(SpectralGrid(k_max, n_k))
    if q.family == "constant":
        return make_shifted_measure(q.c, k_max, n_k)
    raise GridError(f"no analytic spectral measure for family {q.family!r}")


def quadrature(values, weights) -> float:
    values = np.asarray(values)
    weights = np.asarray(weights)
    if values.shape != weights.shape:
        raise GridError(f"length mismatch: {values.shape} vs {weights.shape}")
    return float(np.dot(values, weights))
