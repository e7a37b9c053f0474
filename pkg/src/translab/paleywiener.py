"""Supports, exponential types, and triangularity of transmutations.

Exponential type is read off the imaginary axis: for even transforms
``F(i tau) = int f(x) cosh(a x) dx`` with ``a = sqrt(tau^2 + c)`` for the
constant family (``c = 0`` is the cosine transform).  ``log|F(i tau)|`` is
fitted by ``s0 + sigma tau - p log tau``; the log term absorbs the algebraic
prefactor set by the edge smoothness, which otherwise biases the slope by
about ``-p / tau``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import probe_bump
from .eigen import EigenTable
from .grids import GridError, PotentialSpec, SpaceGrid, SpectralGrid
from .transforms import TransformVector, forward
from .transmute import DiscreteOperator, OperatorPair, build_Bcal_star, build_V

#: support threshold relative to max|f|; see the notes on spectral leakage
SUPPORT_REL_TOL = 1e-4
TYPE_TOL = 0.1
DEFAULT_TAU = np.linspace(10.0, 100.0, 19)


class ExtensionError(NotImplementedError):
    pass


@dataclass(frozen=True)
class SupportEstimate:
    sigma_supp: float
    tol: float

    def __post_init__(self):
        if self.sigma_supp < 0:
            raise ValueError("support end must be nonnegative")


def estimate_support(f, grid: SpaceGrid, rel_tol: float = SUPPORT_REL_TOL) -> SupportEstimate:
    """Largest node with ``|f| > rel_tol * max|f|``; 0 for the zero function."""
    f = np.abs(np.asarray(f, dtype=float))
    scale = f.max()
    if scale == 0:
        return SupportEstimate(0.0, 0.0)
    tol = rel_tol * scale
    idx = np.nonzero(f > tol)[0]
    return SupportEstimate(float(grid.nodes[idx[-1]]), float(tol))


@dataclass(frozen=True)
class TypeEstimate:
    sigma_type: float
    power: float
    slope: float
    residual: float
    tau_range: tuple[float, float]
    masked: int = 0

    def as_dict(self) -> dict:
        return {"sigma_type": self.sigma_type, "power": self.power, "slope": self.slope,
                "residual": self.residual, "tau_range": list(self.tau_range),
                "masked": self.masked}


def _log_cosh_transform(f, x, w, a):
    """``log|sum w f cosh(a x)|`` and its sign, without overflow."""
    nz = np.nonzero(f)[0]
    if len(nz) == 0:
        return np.full(len(a), -np.inf), np.zeros(len(a))
    m = x[nz[-1]]
    wf = (w * f)[None, :]
    A = np.asarray(a)[:, None]
    terms = 0.5 * (np.exp(A * (x[None, :] - m)) + np.exp(-A * (x[None, :] + m)))
    S = (wf * terms).sum(axis=1)
    with np.errstate(divide="ignore"):
        return a * m + np.log(np.abs(S)), np.sign(S)


def complex_extend(f, q: PotentialSpec, eig: EigenTable, tau=DEFAULT_TAU) -> TransformVector:
    """Transform of ``f`` plus its values on the imaginary axis ``k = i tau``."""
    if not q.is_closed_form:
        raise ExtensionError(f"no closed-form complex eigenfunctions for family {q.family!r}")
    tau = np.asarray(tau, dtype=float)
    a2 = tau**2 + q.level
    if np.any(a2 <= 0):
        raise ValueError("tau^2 + c must be positive on the tau grid")
    f = np.asarray(f, dtype=float)
    grid = eig.grid_x
    la, sg = _log_cosh_transform(f, grid.nodes, grid.pairing_weights, np.sqrt(a2))
    base = forward(f, eig, check_support=False)
    return TransformVector(base.values, base.grid, f"complex-extend[{q.describe()}]",
                           tau=tau, ext_log_abs=la, ext_sign=sg)


def estimate_type(tau, log_abs=None) -> TypeEstimate:
    """Fit ``log|F(i tau)| = s0 + sigma tau - p log tau`` on the upper half of the tau range."""
    if isinstance(tau, TransformVector):
        tau, log_abs = tau.tau, tau.ext_log_abs
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(log_abs, dtype=float)
    if len(tau) < 8 or tau.max() - tau.min() < 10.0:
        raise ValueError("type estimation needs >= 8 tau nodes over a tau range of width >= 10")
    upper = tau >= 0.5 * (tau.min() + tau.max())
    ok = upper & np.isfinite(y)
    masked = int(np.sum(upper & ~np.isfinite(y)))
    t, yy = tau[ok], y[ok]
    if len(t) < 3:
        raise ValueError("too few finite |F(i tau)| values for a fit")
    A = np.column_stack([np.ones_like(t), t, -np.log(t)])
    coef, *_ = np.linalg.lstsq(A, yy, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - yy) ** 2)))
    slope = float(np.polyfit(t, yy, 1)[0])
    sigma = max(float(coef[1]), 0.0)
    return TypeEstimate(sigma, float(coef[2]), slope, resid, (float(t.min()), float(t.max())), masked)


def type_of(f, q: PotentialSpec, grid: SpaceGrid, tau=DEFAULT_TAU) -> TypeEstimate:
    """Exponential type of the transform of ``f`` for a closed-form family."""
    if not q.is_closed_form:
        raise ExtensionError(f"no closed-form complex eigenfunctions for family {q.family!r}")
    tau = np.asarray(tau, dtype=float)
    la, _ = _log_cosh_transform(np.asarray(f, dtype=float), grid.nodes, grid.pairing_weights,
                                np.sqrt(tau**2 + q.level))
    return estimate_type(tau, la)


@dataclass(frozen=True)
class PWPRow:
    name: str
    sigma: float
    sigma_supp_in: float
    sigma_supp_out: float
    sigma_type: float
    forward_ok: bool
    sigma_supp_back: float
    converse_ok: bool

    @property
    def ok(self) -> bool:
        return self.forward_ok and self.converse_ok

    def as_dict(self) -> dict:
        return {"name": self.name, "sigma": self.sigma, "sigma_supp_in": self.sigma_supp_in,
                "sigma_supp_out": self.sigma_supp_out, "sigma_type": self.sigma_type,
                "sigma_supp_back": self.sigma_supp_back, "forward_ok": self.forward_ok,
                "converse_ok": self.converse_ok, "pass": self.ok}


@dataclass(frozen=True)
class PWPReport:
    rows: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def as_dict(self) -> dict:
        return {"pass": self.ok, "rows": [r.as_dict() for r in self.rows]}


def pwp_check(pair: OperatorPair, corpus, V: DiscreteOperator | None = None,
              Vinv: DiscreteOperator | None = None, type_tol: float = TYPE_TOL) -> PWPReport:
    """Both directions of the support/type correspondence on a corpus.

    Forward: ``supp f in [0, s]`` gives ``supp Vf in [0, s + 2h]`` and type of
    ``T2 f`` equal to ``s`` within ``type_tol``.  Converse: the measured type
    bounds the support of ``f``, and ``V^-1 = T2^-1 T1`` maps ``supp g in
    [0, s]`` into ``[0, s + 2h]``.
    """
    if pair.q1.family != "zero":
        raise GridError("pwp_check needs q1 = 0 as the classical reference")
    grid = pair.grid_x
    V = V or build_V(pair)
    Vinv = Vinv or build_Bcal_star(pair)
    h2 = 2.0 * grid.h
    rows = []
    for tf in corpus:
        f = np.asarray(tf.values)
        s = tf.sigma
        s_in = estimate_support(f, grid).sigma_supp
        s_out = estimate_support(V(f), grid).sigma_supp
        t = type_of(f, pair.q2, grid).sigma_type
        fwd = s_out <= s + h2 and abs(t - s) <= type_tol
        s_back = estimate_support(Vinv(f), grid).sigma_supp
        conv = s_in <= t + type_tol + h2 and s_back <= s + h2
        rows.append(PWPRow(tf.name, s, s_in, s_out, t, bool(fwd), s_back, bool(conv)))
    return PWPReport(rows)


@dataclass(frozen=True)
class ProbeReport:
    y0: float
    widths: tuple
    leak_fraction: tuple
    sup_beyond: tuple
    adjoint_leak_fraction: tuple
    column: np.ndarray = field(repr=False)
    extrapolated_sup: float = 0.0

    @property
    def monotone(self) -> bool:
        lf = self.leak_fraction
        return all(b < a for a, b in zip(lf, lf[1:]))

    def as_dict(self) -> dict:
        return {"y0": self.y0, "widths": list(self.widths),
                "leak_fraction": list(self.leak_fraction), "sup_beyond": list(self.sup_beyond),
                "adjoint_leak_fraction": list(self.adjoint_leak_fraction),
                "extrapolated_sup": self.extrapolated_sup, "monotone": self.monotone}


def triangularity_probe(V: DiscreteOperator, y0: float, widths=(16, 8, 4),
                        eps: float = 0.1) -> ProbeReport:
    """Apply ``V`` to unit-mass bumps at ``y0`` of radius ``w*h`` for w in ``widths``.

    Reports, per width, the L1 mass of ``V delta`` on ``x > y0 + eps`` as a
    fraction of the total L1 mass, the sup there, and the mirrored quantity
    (mass on ``x < y0 - eps``) for the pairing adjoint of ``V``.
    """
    grid = V.grid
    x, w = grid.nodes, grid.pairing_weights
    rmax = max(widths) * grid.h
    if y0 - rmax - eps <= 0 or y0 + rmax + eps >= grid.x_max:
        raise GridError("probe point too close to the boundary")
    Vt = V.adjoint_matrix()
    beyond, before = x > y0 + eps, x < y0 - eps
    leak, sups, aleak = [], [], []
    col = None
    for n in widths:
        d = probe_bump(grid, y0, n * grid.h)
        col = V.matrix @ d
        a = np.abs(col) * w
        leak.append(float(a[beyond].sum() / a.sum()))
        sups.append(float(np.abs(col[beyond]).max()))
        b = np.abs(Vt @ d) * w
        aleak.append(float(b[before].sum() / b.sum()))
    # Richardson on the sup assuming first-order dependence on the width
    ext = sups[-1] + (sups[-1] - sups[-2]) * (widths[-1] / (widths[-2] - widths[-1]))
    return ProbeReport(float(y0), tuple(widths), tuple(leak), tuple(sups), tuple(aleak),
                       col, float(max(ext, 0.0)))


@dataclass(frozen=True)
class TransferReport:
    deviations: dict
    structural: float

    @property
    def worst(self) -> float:
        return max(self.deviations.values())

    def as_dict(self) -> dict:
        return {"deviations": {str(k): v for k, v in self.deviations.items()},
                "structural": self.structural, "worst": self.worst}


def eigenfunction_transfer_check(pair: OperatorPair, V: DiscreteOperator,
                                 ks=(1.0, 2.0, 3.0)) -> TransferReport:
    """Compare ``psi2(., k)`` with ``V* psi1(., k)`` on ``[0, x_max/2]``.

    ``structural`` is the largest entry of ``V* - I`` with ``y > x + 0.1``
    (the part that would integrate beyond ``x``) relative to the largest
    entry with ``y < x - 0.1``.
    """
    grid = pair.grid_x
    Vs = V.adjoint_matrix()
    half = grid.nodes <= 0.5 * grid.x_max
    dev = {}
    for k in ks:
        gk = SpectralGrid(float(k), 2)
        p1 = pair.eig(1, gk).psi[:, 1]
        p2 = pair.eig(2, gk).psi[:, 1]
        dev[float(k)] = float(np.abs(Vs @ p1 - p2)[half].max())
    X, Y = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
    R = Vs - np.diag(np.diag(Vs))
    upper, lower = Y > X + 0.1, Y < X - 0.1
    structural = float(np.abs(R[upper]).max() / max(np.abs(R[lower]).max(), 1e-300))
    return TransferReport(dev, structural)
