"""Compactly supported test functions with exactly known supports.

Edges are C^2 (quintic smoothstep, ``(1 - s^2)^3`` bumps), so transforms decay
like ``k^-4`` and the Paley-Wiener type equals the right end of the support.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import SpaceGrid


def smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s**3 * (10.0 - 15.0 * s + 6.0 * s * s)


def smoothed_indicator(x, sigma: float, width: float | None = None):
    """1 on ``[0, sigma - width]``, C^2 descent to 0 at ``sigma``."""
    if width is None:
        width = 0.5 * min(sigma, 1.0)
    return 1.0 - smoothstep((np.asarray(x) - (sigma - width)) / width)


def bump(x, center: float, radius: float):
    s = (np.asarray(x) - center) / radius
    return np.where(np.abs(s) < 1.0, (1.0 - s * s) ** 3, 0.0)


def gaussian_bump(x, center: float, radius: float, scale: float | None = None):
    """Gaussian profile cut off by a C^2 bump of the given radius."""
    scale = radius / 3.0 if scale is None else scale
    return np.exp(-0.5 * ((np.asarray(x) - center) / scale) ** 2) * bump(x, center, radius)


def poly_bump(x, center: float, radius: float, coeffs=(1.0, -0.5, 0.25)):
    t = (np.asarray(x) - center) / radius
    return np.polyval(coeffs[::-1], t) * bump(x, center, radius)


@dataclass(frozen=True)
class TestFunction:
    name: str
    values: np.ndarray = field(repr=False)
    support: tuple[float, float]

    @property
    def sigma(self) -> float:
        return self.support[1]


def _tf(name, values, support):
    v = np.asarray(values, dtype=float)
    v.flags.writeable = False
    return TestFunction(name, v, support)


def standard_corpus(grid: SpaceGrid) -> list[TestFunction]:
    """Ten functions with supports inside ``[0, x_max/2]``."""
    x = grid.nodes
    L = grid.x_max
    a = L / 8.0
    return [
        _tf("indicator-1", smoothed_indicator(x, 1.0), (0.0, 1.0)),
        _tf("indicator-2", smoothed_indicator(x, 2.0), (0.0, 2.0)),
        _tf("indicator-half-L", smoothed_indicator(x, L / 2.0), (0.0, L / 2.0)),
        _tf("bump-a", bump(x, a, 0.5 * a), (0.5 * a, 1.5 * a)),
        _tf("bump-2a", bump(x, 2 * a, a), (a, 3 * a)),
        _tf("bump-at-0", bump(x, 0.0, a), (0.0, a)),
        _tf("gauss-1.5a", gaussian_bump(x, 1.5 * a, a), (0.5 * a, 2.5 * a)),
        _tf("gauss-3a", gaussian_bump(x, 3 * a, 0.75 * a, 0.4 * a), (2.25 * a, 3.75 * a)),
        _tf("poly-bump-2a", poly_bump(x, 2 * a, 0.8 * a), (1.2 * a, 2.8 * a)),
        _tf("poly-bump-3a", poly_bump(x, 3 * a, a, (0.5, 1.0, -1.0, 0.3)), (2 * a, 4 * a)),
    ]


def interior_corpus(grid: SpaceGrid) -> list[TestFunction]:
    """Functions vanishing near both ends (for finite-difference residuals)."""
    x = grid.nodes
    a = grid.x_max / 8.0
    return [
        _tf("bump-a", bump(x, 1.2 * a, 0.7 * a), (0.5 * a, 1.9 * a)),
        _tf("bump-2a", bump(x, 2 * a, a), (a, 3 * a)),
        _tf("gauss-1.5a", gaussian_bump(x, 1.5 * a, a), (0.5 * a, 2.5 * a)),
        _tf("poly-bump-2.5a", poly_bump(x, 2.5 * a, a), (1.5 * a, 3.5 * a)),
    ]


def pw_corpus(grid: SpaceGrid, sigmas=(1.0, 2.0, 4.0)) -> list[TestFunction]:
    """Smoothed indicators of ``[0, sigma]`` for Paley-Wiener checks."""
    x = grid.nodes
    return [_tf(f"indicator-{s:g}", smoothed_indicator(x, s), (0.0, float(s))) for s in sigmas]


def probe_bump(grid: SpaceGrid, y0: float, radius: float) -> np.ndarray:
    """Bump of unit mass (pairing weights) centered at ``y0``."""
    b = bump(grid.nodes, y0, radius)
    return b / np.dot(grid.pairing_weights, b)
