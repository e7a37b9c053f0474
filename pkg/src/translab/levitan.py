"""Local infinite-order differential representation of spectral maps.

A continuous operator ``Q`` on analytic functions acts near ``z`` as
``(Q F)(z) = sum_j a_j(z) F^(j)(z)`` with

    a_j(z) = 1/j! * 1/(2 pi i) * oint_C (zeta - z)^j [Q g_zeta](z) dzeta,
    g_zeta(w) = 1 / (zeta - w).

All contour integrals use the trapezoid rule on a circle, which converges
geometrically for integrands analytic in an annulus around it.

Operators are callables ``Qop(F, z)`` taking an analytic callable ``F`` (on
complex arrays) and returning ``(Q F)(z)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grids import SpectralMeasure
from .transforms import forward_matrix
from .transmute import OperatorPair

DEFAULT_J_MAX = 12


class ContourError(ValueError):
    pass


@dataclass(frozen=True)
class ContourSpec:
    center: complex
    radius: float
    n_nodes: int = 64

    def __post_init__(self):
        if not self.radius > 0:
            raise ContourError("contour radius must be positive")
        if self.n_nodes < 16 or self.n_nodes % 2:
            raise ContourError("n_nodes must be an even number >= 16")

    @property
    def nodes(self) -> np.ndarray:
        th = 2.0 * np.pi * np.arange(self.n_nodes) / self.n_nodes
        return self.center + self.radius * np.exp(1j * th)

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius

    def integrate(self, values) -> complex:
        """``1/(2 pi i) oint values dzeta`` given samples at ``nodes`` (last axis)."""
        return np.mean(np.asarray(values) * (self.nodes - self.center), axis=-1)

    def scaled(self, factor: float) -> "ContourSpec":
        return ContourSpec(self.center, self.radius * factor, self.n_nodes)

    def refined(self, factor: int = 2) -> "ContourSpec":
        return ContourSpec(self.center, self.radius, self.n_nodes * factor)


@dataclass(frozen=True)
class ExpansionCoeffs:
    z: np.ndarray = field(repr=False)
    a: np.ndarray = field(repr=False)
    contour: ContourSpec

    def __post_init__(self):
        if self.a.shape[1] < 3:
            raise ContourError("need at least j = 0, 1, 2")
        if not np.all(np.isfinite(self.a)):
            raise ContourError("non-finite expansion coefficient")

    @property
    def j_max(self) -> int:
        return self.a.shape[1] - 1

    def rows(self):
        """``(z_real, z_imag, j, a_real, a_imag)`` tuples in (z, j) order."""
        for i, z in enumerate(self.z):
            for j in range(self.a.shape[1]):
                a = self.a[i, j]
                yield (z.real, z.imag, j, a.real, a.imag)


def _resolvent(zeta):
    return lambda w: 1.0 / (zeta - np.asarray(w))


def levitan_coefficients(Qop, contour: ContourSpec, z, j_max: int = DEFAULT_J_MAX) -> ExpansionCoeffs:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if not np.all(contour.contains(z)):
        raise ContourError("evaluation points must lie strictly inside the contour")
    zeta = contour.nodes
    QG = np.empty((len(z), len(zeta)), dtype=complex)
    for m, zt in enumerate(zeta):
        try:
            QG[:, m] = Qop(_resolvent(zt), z)
        except Exception as exc:  # black box: report which node failed
            raise ContourError(f"operator evaluation failed at zeta={zt:.6g}") from exc
    a = np.empty((len(z), j_max + 1), dtype=complex)
    dz = zeta[None, :] - z[:, None]
    for j in range(j_max + 1):
        a[:, j] = contour.integrate(dz**j * QG) / math.factorial(j)
    return ExpansionCoeffs(z, a, contour)


def cauchy_derivatives(F, z, contour: ContourSpec, n_max: int) -> np.ndarray:
    """``F^(n)(z)`` for n = 0..n_max, shape ``(len(z), n_max + 1)``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if not np.all(contour.contains(z)):
        raise ContourError("evaluation points must lie strictly inside the contour")
    zeta = contour.nodes
    Fz = np.asarray(F(zeta), dtype=complex)
    inv = 1.0 / (zeta[None, :] - z[:, None])
    out = np.empty((len(z), n_max + 1), dtype=complex)
    p = inv * Fz[None, :]
    for n in range(n_max + 1):
        out[:, n] = math.factorial(n) * contour.integrate(p)
        p = p * inv
    return out


@dataclass(frozen=True)
class ExpansionResult:
    values: np.ndarray = field(repr=False)
    residuals: tuple
    stalled: bool
    stall_order: int | None

    def as_dict(self) -> dict:
        return {"residuals": list(self.residuals), "stalled": self.stalled,
                "stall_order": self.stall_order}


def _stall(residuals) -> tuple[bool, int | None]:
    """Flag when the residual fails to decrease over the last three orders."""
    r = list(residuals)
    for n in range(3, len(r)):
        if r[n] >= r[n - 1] >= r[n - 2] >= r[n - 3] and r[n] > 0:
            return True, n - 3
    return False, None


def expansion_apply(coeffs: ExpansionCoeffs, F, j_trunc: int | None = None,
                    direct=None, deriv_contour: ContourSpec | None = None) -> ExpansionResult:
    """Partial sum ``sum_{n <= J} a_n(z) F^(n)(z)``.

    ``direct`` (values of ``Q F`` at ``coeffs.z``) enables the residual table,
    one entry per truncation order, as ``max|partial - direct|``.
    """
    J = coeffs.j_max if j_trunc is None else int(j_trunc)
    if J > coeffs.j_max:
        raise ContourError("truncation order exceeds the computed coefficients")
    dc = deriv_contour or coeffs.contour
    D = cauchy_derivatives(F, coeffs.z, dc, J)
    terms = coeffs.a[:, : J + 1] * D
    partial = np.cumsum(terms, axis=1)
    residuals: tuple = ()
    stalled, order = False, None
    if direct is not None:
        direct = np.asarray(direct, dtype=complex)
        residuals = tuple(float(np.abs(partial[:, n] - direct).max()) for n in range(J + 1))
        stalled, order = _stall(residuals)
    return ExpansionResult(partial[:, J], residuals, stalled, order)


# --- oracle operators -----------------------------------------------------

def multiplication_operator(F, z):
    return np.asarray(z) * F(z)


def derivative_operator(F, z, radius: float = 1e-2, n_nodes: int = 64):
    """``F'(z)`` by a small Cauchy circle around each point."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(len(z), dtype=complex)
    for i, zi in enumerate(z):
        out[i] = cauchy_derivatives(F, [zi], ContourSpec(zi, radius, n_nodes), 1)[0, 1]
    return out


def shift_operator(h0: complex):
    def op(F, z):
        return F(np.asarray(z) + h0)
    return op


def constant_pair_operator(c1: float, c2: float):
    """Spectral map of the pair ``(-D^2 + c1, -D^2 + c2)``.

    Both eigenfunction families are ``cos(sqrt(lam - c) x)``, so the map
    ``T2 T1^-1`` is the translation ``F(lam) -> F(lam - (c2 - c1))``.
    """
    return shift_operator(-(c2 - c1))


def analytic_transform(f, grid, c: float = 0.0):
    """``lam -> int f(x) cos(sqrt(lam - c) x) dx`` for complex ``lam``."""
    x, w = grid.nodes, grid.pairing_weights
    wf = w * np.asarray(f, dtype=float)

    def F(lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        return np.cos(np.outer(np.sqrt(lam - c), x)) @ wf
    return F


# --- eigenfunction expansion ----------------------------------------------

def cos_lambda_derivative(x, lam, n: int, tol: float = 1e-18, max_terms: int = 400):
    """``d^n/dlam^n cos(sqrt(lam) x)`` from the power series in ``lam``.

    ``cos(sqrt(lam) x) = sum_m (-1)^m x^(2m) lam^m / (2m)!``, differentiated
    termwise.  Entire in ``lam``; no singularity at ``lam = 0``.
    """
    x2 = np.asarray(x, dtype=float) ** 2
    lam = complex(lam)
    t = (-1.0) ** n * x2**n * math.factorial(n) / math.factorial(2 * n) + 0j
    total = t.copy() if isinstance(t, np.ndarray) else np.asarray(t)
    m = n
    for _ in range(max_terms):
        t = t * (-x2 * lam) * (m + 1) / ((m + 1 - n) * (2 * m + 1) * (2 * m + 2))
        total = total + t
        m += 1
        if np.all(np.abs(t) <= tol * np.maximum(np.abs(total), 1.0)):
            break
    return total


@dataclass(frozen=True)
class EigenExpansionReport:
    k: float
    residuals: dict
    stalled: bool
    stall_order: int | None

    @property
    def decreasing(self) -> bool:
        r = [self.residuals[j] for j in sorted(self.residuals)]
        return all(b < a for a, b in zip(r, r[1:]))

    def as_dict(self) -> dict:
        return {"k": self.k, "residuals": {str(j): v for j, v in self.residuals.items()},
                "decreasing": self.decreasing, "stalled": self.stalled,
                "stall_order": self.stall_order}


def eigenfunction_expansion_check(pair: OperatorPair, coeffs: ExpansionCoeffs, x, k: float,
                                  orders=(0, 2, 4, 8)) -> EigenExpansionReport:
    """``psi2(x, lam) ~ sum_{n <= J} a_n(lam) d^n_lam psi1(x, lam)`` at ``lam = k^2``.

    ``coeffs`` must have been evaluated at ``z = k^2`` (the first point is used).
    """
    if pair.q1.family != "zero":
        raise ContourError("the lam-derivatives are closed-form only for q1 = 0")
    if k < 0.5:
        raise ContourError("probe wavenumbers below 0.5 are excluded")
    lam = k * k
    if abs(coeffs.z[0] - lam) > 1e-12:
        raise ContourError("coefficients were not evaluated at lam = k^2")
    x = np.asarray(x, dtype=float)
    from .grids import SpectralGrid
    gk = SpectralGrid(float(k), 2)
    xi = np.searchsorted(pair.grid_x.nodes, x - 1e-12)
    psi2 = pair.eig(2, gk).psi[xi, 1]
    J = max(orders)
    derivs = [cos_lambda_derivative(pair.grid_x.nodes[xi], lam, n) for n in range(J + 1)]
    partial = np.zeros(len(xi), dtype=complex)
    res_all = []
    for n in range(J + 1):
        partial = partial + coeffs.a[0, n] * derivs[n]
        res_all.append(float(np.abs(partial - psi2).max()))
    stalled, order = _stall(res_all)
    return EigenExpansionReport(float(k), {j: res_all[j] for j in orders}, stalled, order)


# --- Carleman identity ----------------------------------------------------

@dataclass(frozen=True)
class ResidualTransform:
    """``r1(nu_i, lam_j) = int_0^x_max (psi2 - psi1)(x, lam_j) psi1(x, nu_i) dx``."""

    values: np.ndarray = field(repr=False)
    pair_id: str
    measure: SpectralMeasure

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("residual transform is not finite")


def residual_transform(pair: OperatorPair) -> ResidualTransform:
    g1 = pair.gamma1.grid
    e1, e2 = pair.eig(1, g1), pair.eig(2, g1)
    R = forward_matrix(e1) @ (e2.psi - e1.psi)
    return ResidualTransform(R, f"{pair.q1.describe()}->{pair.q2.describe()}", pair.gamma1)


@dataclass(frozen=True)
class CarlemanReport:
    worst: float
    per_function: dict
    g_norm: float
    k_window: tuple
    hypothesis_b: dict

    def as_dict(self) -> dict:
        return {"worst": self.worst, "per_function": self.per_function, "g_norm": self.g_norm,
                "g_finite": bool(np.isfinite(self.g_norm)), "k_window": list(self.k_window),
                "hypothesis_b": self.hypothesis_b}


def carleman_residual_check(pair: OperatorPair, corpus, k_window=(0.0, 5.0)) -> CarlemanReport:
    """``T2 f = T1 f + int r1(nu, .) T1 f(nu) dGamma1(nu)`` on Gamma1's grid."""
    g1 = pair.gamma1.grid
    e1, e2 = pair.eig(1, g1), pair.eig(2, g1)
    rt = residual_transform(pair)
    F1m, F2m = forward_matrix(e1), forward_matrix(e2)
    w = pair.gamma1.weights
    per = {}
    for tf in corpus:
        f = np.asarray(tf.values)
        f1, f2 = F1m @ f, F2m @ f
        rhs = f1 + rt.values.T @ (w * f1)
        per[tf.name] = float(np.abs(rhs - f2).max() / max(np.abs(f2).max(), 1e-300))
    s = g1.nodes
    inK = (s >= k_window[0]) & (s <= k_window[1])
    g = np.abs(rt.values[:, inK]).max(axis=1)
    g_norm = float(np.sqrt(np.dot(w, g**2)))
    p = 0
    hyp_b = {"p": p, "m": 1, "satisfied": 2 * 1 >= p + 2,
             "constant_density": bool(np.allclose(pair.gamma1.density, pair.gamma1.density[0]))}
    return CarlemanReport(max(per.values()), per, g_norm, tuple(k_window), hyp_b)
