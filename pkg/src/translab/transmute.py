"""Transmutation operators as dense matrices on the space grid.

Notation: ``Q1 = -D^2 + q1`` with transform ``T1 f = int f psi1 dx`` and
measure ``Gamma1``; likewise for ``Q2``.  The operators built here:

* ``V      = T1^-1 T2``                            (``~ B*``)
* ``B      = synthesis of T1 f with psi2 against Gamma1``
* ``Bcal   = synthesis of T2 f with psi1 against Gamma2``   (``~ B^-1``)
* ``Bcal*  = T2^-1 T1``
* ``Bcal_p = T1^-1 M_p T2`` with ``p = (gamma2/gamma1)^power``

The spectral multiplier is never divided out: the synthesis runs on the
grid of ``Gamma2`` with density ``gamma1^(1-power) gamma2^power``, which is
finite wherever ``gamma1`` is.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigen import EigenTable, eigen_closed_form, eigen_solve
from .grids import (GridError, PotentialSpec, SpaceGrid, SpectralGrid, SpectralMeasure,
                    measure_for)
from .kernels import KernelMatrix, adjoint_matrix, volterra_matrix
from .transforms import (SUPPORT_TOL, SupportError, _check_support, forward_matrix,
                         synthesis_matrix)
from .eigen import apply_operator

RECIPES = {"identity": 0, "V": 1, "B": 2, "B*": 3, "Bcal": 4, "Bcal*": 5, "Bcal_sqrt": 6}
MAGIC = b"TMUT"


class DegenerateMeasure(GridError):
    pass


@dataclass(frozen=True)
class DiscreteOperator:
    matrix: np.ndarray = field(repr=False)
    recipe: str
    grid: SpaceGrid
    #: pairing under which the matrix was assembled; "gregory" for kernel
    #: (Volterra) matrices, "trapezoid" for spectral compositions
    pairing: str = "trapezoid"

    def __post_init__(self):
        if self.pairing not in ("trapezoid", "gregory"):
            raise GridError(f"unknown pairing {self.pairing!r}")
        if self.recipe not in RECIPES:
            raise GridError(f"unknown recipe {self.recipe!r}")
        m = np.array(self.matrix, dtype=float)
        if m.shape != (self.grid.n_x, self.grid.n_x):
            raise GridError("operator shape does not match the grid")
        if not np.all(np.isfinite(m)):
            raise GridError("operator has non-finite entries")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def __call__(self, f) -> np.ndarray:
        return self.matrix @ np.asarray(f, dtype=float)

    @property
    def pairing_weights(self) -> np.ndarray:
        g = self.grid
        return g.adjoint_weights if self.pairing == "gregory" else g.pairing_weights

    def adjoint_matrix(self) -> np.ndarray:
        return adjoint_matrix(self.matrix, self.grid, self.pairing_weights)

    def to_bytes(self) -> bytes:
        n = self.grid.n_x
        header = MAGIC + struct.pack("<II", n, RECIPES[self.recipe]) + b"\0" * 4
        return header + np.ascontiguousarray(self.matrix, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, grid: SpaceGrid) -> "DiscreteOperator":
        if data[:4] != MAGIC:
            raise GridError("not an operator file (bad magic)")
        n, rid = struct.unpack("<II", data[4:12])
        if n != grid.n_x:
            raise GridError("operator size does not match the grid")
        recipe = {v: k for k, v in RECIPES.items()}.get(rid)
        if recipe is None:
            raise GridError(f"unknown recipe id {rid}")
        m = np.frombuffer(data[16:], dtype="<f8")
        if m.size != n * n:
            raise GridError("truncated operator file")
        return cls(m.reshape(n, n), recipe, grid)

    def write_binary(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())


@dataclass(frozen=True)
class OperatorPair:
    """Two operators on one space grid with their transforms and measures."""

    q1: PotentialSpec
    q2: PotentialSpec
    grid_x: SpaceGrid
    gamma1: SpectralMeasure
    gamma2: SpectralMeasure
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        g1, g2 = self.gamma1.grid, self.gamma2.grid
        if (g1.k_max, g1.n_k) != (g2.k_max, g2.n_k):
            raise GridError("the two measures must use the same spectral resolution")

    @classmethod
    def build(cls, q1: PotentialSpec, q2: PotentialSpec, grid_x: SpaceGrid,
              k_max: float, n_k: int, gamma1: SpectralMeasure | None = None,
              gamma2: SpectralMeasure | None = None) -> "OperatorPair":
        gamma1 = gamma1 or measure_for(q1, k_max, n_k)
        gamma2 = gamma2 or measure_for(q2, k_max, n_k)
        return cls(q1, q2, grid_x, gamma1, gamma2)

    def potential(self, which: int) -> PotentialSpec:
        return {1: self.q1, 2: self.q2}[which]

    def eig(self, which: int, grid_k: SpectralGrid) -> EigenTable:
        """Eigen table of operator ``which`` sampled at the nodes of ``grid_k``."""
        key = (which, grid_k.k_max, grid_k.n_k, grid_k.shift)
        if key not in self._cache:
            q = self.potential(which)
            if q.is_closed_form:
                e = eigen_closed_form(q, self.grid_x, grid_k, operator=f"Q{which}")
            else:
                e = eigen_solve(q, self.grid_x, grid_k)
            self._cache[key] = e
        return self._cache[key]

    @property
    def eig1(self) -> EigenTable:
        return self.eig(1, self.gamma1.grid)

    @property
    def eig2(self) -> EigenTable:
        return self.eig(2, self.gamma2.grid)


def hann(grid: SpectralGrid) -> np.ndarray:
    return 0.5 * (1.0 + np.cos(np.pi * grid.nodes / grid.k_max))


def _window(grid: SpectralGrid, window) -> np.ndarray:
    if window is None:
        return np.ones(grid.n_k)
    if window == "hann":
        return hann(grid)
    raise ValueError(f"unknown window {window!r}")


def _require_positive(density: np.ndarray, what: str):
    if np.any(density <= 0):
        raise DegenerateMeasure(f"{what} vanishes on {int(np.sum(density <= 0))} spectral nodes")


# --- kernel route ---------------------------------------------------------

def apply_B(K: KernelMatrix, f) -> np.ndarray:
    """``f(x) + int_0^x K(x, t) f(t) dt``."""
    f = np.asarray(f, dtype=float)
    return f + K.weighted() @ f


def apply_B_star(K: KernelMatrix, f, tol: float = SUPPORT_TOL) -> np.ndarray:
    """``f(t) + int_t^x_max K(x, t) f(x) dx`` (discrete adjoint of ``apply_B``)."""
    f = np.asarray(f, dtype=float)
    _check_support(f, tol)
    return adjoint_matrix(volterra_matrix(K), K.grid) @ f


def apply_Bcal(L: KernelMatrix, f) -> np.ndarray:
    return apply_B(L, f)


def apply_Bcal_star(L: KernelMatrix, f, tol: float = SUPPORT_TOL) -> np.ndarray:
    return apply_B_star(L, f, tol)


def kernel_operator(kernel: KernelMatrix, adjoint: bool = False) -> DiscreteOperator:
    B = volterra_matrix(kernel)
    inv = kernel.kind == "inverse"
    if adjoint:
        return DiscreteOperator(adjoint_matrix(B, kernel.grid), "Bcal*" if inv else "B*",
                                kernel.grid, "gregory")
    return DiscreteOperator(B, "Bcal" if inv else "B", kernel.grid, "gregory")


# --- spectral route -------------------------------------------------------

def _compose(pair: OperatorPair, synth_eig: EigenTable, density, fwd_eig: EigenTable,
             recipe: str) -> DiscreteOperator:
    M = synthesis_matrix(synth_eig, density) @ forward_matrix(fwd_eig)
    return DiscreteOperator(M, recipe, pair.grid_x)


def build_V(pair: OperatorPair, window=None) -> DiscreteOperator:
    """``V = T1^-1 T2``: forward with ``psi2``, synthesis with ``(psi1, Gamma1)``."""
    g1 = pair.gamma1.grid
    _require_positive(pair.gamma1.density, "gamma1")
    return _compose(pair, pair.eig(1, g1), pair.gamma1.density * _window(g1, window),
                    pair.eig(2, g1), "V")


def build_B(pair: OperatorPair) -> DiscreteOperator:
    """``B`` as the mixed synthesis of ``T1 f`` with ``psi2`` against ``Gamma1``."""
    g1 = pair.gamma1.grid
    return _compose(pair, pair.eig(2, g1), pair.gamma1.density, pair.eig(1, g1), "B")


def _gamma1_on_grid2(pair: OperatorPair) -> np.ndarray:
    return pair.gamma1.density_on(pair.gamma2.grid)


def _gamma1_vanishes(pair: OperatorPair) -> bool:
    """True when gamma1 (as a density in lam) is zero at a node where gamma2 is not."""
    g2 = pair.gamma2.grid
    if pair.gamma1.grid.same_nodes(g2):
        d1, d2 = pair.gamma1.density, pair.gamma2.density
    else:
        lam = g2.lam
        d1 = pair.gamma1.density_lambda(lam)
        d2 = pair.gamma2.density_on(g2)
    return bool(np.any((d1 <= 0) & (d2 > 0)))


def build_Bcal(pair: OperatorPair, power: float = 1.0, window=None) -> DiscreteOperator:
    """``T1^-1 M_p T2`` with ``p = (gamma2/gamma1)^power``.

    ``power = 1`` is the mixed synthesis of ``T2 f`` with ``psi1`` against
    ``Gamma2`` (``~ B^-1``); ``power = 1/2`` is the rescaled transmutation.
    """
    g2 = pair.gamma2.grid
    d1 = _gamma1_on_grid2(pair)
    d2 = pair.gamma2.density
    if power > 0 and _gamma1_vanishes(pair):
        raise DegenerateMeasure("gamma2/gamma1 is unbounded: gamma1 vanishes inside the spectrum of Q2")
    density = d1 ** (1.0 - power) * d2**power * _window(g2, window)
    recipe = "Bcal_sqrt" if power == 0.5 else "Bcal"
    return _compose(pair, pair.eig(1, g2), density, pair.eig(2, g2), recipe)


def build_Bcal_sqrt(pair: OperatorPair, window=None) -> DiscreteOperator:
    return build_Bcal(pair, 0.5, window)


def build_Bcal_star(pair: OperatorPair) -> DiscreteOperator:
    """``T2^-1 T1``."""
    g2 = pair.gamma2.grid
    _require_positive(pair.gamma2.density, "gamma2")
    return _compose(pair, pair.eig(2, g2), pair.gamma2.density, pair.eig(1, g2), "Bcal*")


def build_Qmap(pair: OperatorPair) -> np.ndarray:
    """Spectral map ``T2 T1^-1`` from samples on Gamma1's grid to Gamma2's grid."""
    g1, g2 = pair.gamma1.grid, pair.gamma2.grid
    return forward_matrix(pair.eig(2, g2)) @ synthesis_matrix(pair.eig(1, g1), pair.gamma1.density)


# --- checks ---------------------------------------------------------------

def _l2(f, grid: SpaceGrid, mask=None) -> float:
    w = grid.pairing_weights if mask is None else grid.pairing_weights * mask
    return float(np.sqrt(np.dot(w, np.asarray(f) ** 2)))


@dataclass(frozen=True)
class ResidualReport:
    worst: float
    per_function: dict

    def as_dict(self) -> dict:
        return {"worst": self.worst, "per_function": self.per_function}


def intertwining_residual(op: DiscreteOperator, q_out: PotentialSpec, q_in: PotentialSpec,
                          corpus) -> ResidualReport:
    """``||Q_out(op f) - op(Q_in f)||_2 / ||f||_2`` by finite differences.

    Two boundary layers at each end are excluded; corpus functions must vanish
    near both ends so that ``Q_in f`` is exact there.
    """
    grid = op.grid
    per = {}
    for tf in corpus:
        f = np.asarray(tf.values)
        Qf, _ = apply_operator(q_in, f, grid)
        lhs, mask = apply_operator(q_out, op(f), grid)
        r = _l2(lhs - op(Qf), grid, mask) / _l2(f, grid)
        per[tf.name] = r
    return ResidualReport(max(per.values()), per)


def operator_deviation(A, B, corpus, grid: SpaceGrid, norm: str = "sup") -> ResidualReport:
    """Worst relative deviation between two operators (callables) on a corpus."""
    per = {}
    for tf in corpus:
        f = np.asarray(tf.values)
        a, b = A(f), B(f)
        if norm == "sup":
            r = float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))
        else:
            r = _l2(a - b, grid) / max(_l2(b, grid), 1e-300)
        per[tf.name] = r
    return ResidualReport(max(per.values()), per)


def factorization_check(pair: OperatorPair, K: KernelMatrix, L: KernelMatrix, corpus) -> dict:
    """Sup relative deviations of the six factorization identities.

    ``T1 B* = T2``, ``T2 Bcal* = T1`` are compared on Gamma1's grid;
    ``B``, ``Bcal``, ``B*``, ``Bcal*`` compare the kernel route with the
    spectral route.
    """
    g1 = pair.gamma1.grid
    F1 = forward_matrix(pair.eig(1, g1))
    F2 = forward_matrix(pair.eig(2, g1))
    Bs = kernel_operator(K, adjoint=True)
    Bcs = kernel_operator(L, adjoint=True)
    grid = pair.grid_x
    checks = {
        "T1 B* = T2": operator_deviation(lambda f: F1 @ Bs(f), lambda f: F2 @ f, corpus, grid),
        "T2 Bcal* = T1": operator_deviation(lambda f: F2 @ Bcs(f), lambda f: F1 @ f, corpus, grid),
        "B = T2~ T1": operator_deviation(build_B(pair), kernel_operator(K), corpus, grid),
        "Bcal = T1~ T2": operator_deviation(build_Bcal(pair, 1.0), kernel_operator(L), corpus, grid),
        "B* = T1^-1 T2": operator_deviation(build_V(pair), Bs, corpus, grid),
        "Bcal* = T2^-1 T1": operator_deviation(build_Bcal_star(pair), Bcs, corpus, grid),
    }
    return {k: v.worst for k, v in checks.items()}


def spectral_norm_ratio(pair: OperatorPair, corpus) -> float:
    """Largest ``||Qmap F||_Gamma2 / ||F||_Gamma1`` over ``F = T1 f``."""
    Q = build_Qmap(pair)
    g1 = pair.gamma1.grid
    F1 = forward_matrix(pair.eig(1, g1))
    w1, w2 = pair.gamma1.weights, pair.gamma2.weights
    ratios = []
    for tf in corpus:
        F = F1 @ np.asarray(tf.values)
        ratios.append(np.sqrt(np.dot(w2, (Q @ F) ** 2) / np.dot(w1, F**2)))
    return float(max(ratios))


@dataclass(frozen=True)
class MultiplierWitness:
    """Evidence that ``Qmap`` is not a multiplication operator.

    A multiplication operator ``F -> m F`` satisfies ``Q(F G) = Q(F) G``;
    ``defect`` is the relative violation of that identity.  ``homomorphism``
    is the relative size of ``Q(FG) - Q(F) Q(G)``, reported for information.
    """

    defect: float
    homomorphism: float

    def as_dict(self) -> dict:
        return {"defect": self.defect, "homomorphism": self.homomorphism}


def multiplier_witness(pair: OperatorPair, f, g) -> MultiplierWitness:
    g1, g2 = pair.gamma1.grid, pair.gamma2.grid
    Q = build_Qmap(pair)
    F = forward_matrix(pair.eig(1, g1)) @ f
    G = forward_matrix(pair.eig(1, g1)) @ g
    G_on2 = forward_matrix(pair.eig(1, g2)) @ g
    QFG = Q @ (F * G)
    QF = Q @ F
    QG = Q @ G
    w = pair.gamma2.weights
    nrm = np.sqrt(np.dot(w, QFG**2))
    defect = np.sqrt(np.dot(w, (QFG - QF * G_on2) ** 2)) / nrm
    hom = np.sqrt(np.dot(w, (QFG - QF * QG) ** 2)) / nrm
    return MultiplierWitness(float(defect), float(hom))


def measure_ratio_bound(pair: OperatorPair) -> float:
    """``sup gamma1/gamma2`` on Gamma1's grid (inf where gamma2 vanishes)."""
    g1 = pair.gamma1.grid
    d2 = pair.gamma2.density_on(g1) if not pair.gamma2.grid.same_nodes(g1) else pair.gamma2.density
    d1 = pair.gamma1.density
    with np.errstate(divide="ignore"):
        r = np.where(d2 > 0, d1 / np.where(d2 > 0, d2, 1.0), np.where(d1 > 0, np.inf, 0.0))
    return float(r.max())


def operator_norm(op: DiscreteOperator) -> float:
    """L2 operator norm under the trapezoid pairing."""
    s = np.sqrt(op.grid.pairing_weights)
    s[s == 0] = 1.0
    return float(np.linalg.norm((op.matrix * s[:, None]) / s[None, :], 2))
