"""Catalogue of verification checks and the shared run context."""
from __future__ import annotations

import hashlib
import json
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import corpus as corpus_mod
from .config import CHECK_GROUPS, Scenario
from .eigen import eigen_closed_form, eigen_solve
from .grids import SpectralGrid
from .kernels import (goursat_solve, invert_kernel, inversion_kernel_check,
                      delta_identity_check, spectral_kernel_extrapolated, volterra_matrix)
from .levitan import (ContourSpec, carleman_residual_check, constant_pair_operator,
                      derivative_operator, eigenfunction_expansion_check, levitan_coefficients,
                      multiplication_operator, shift_operator)
from .paleywiener import eigenfunction_transfer_check, pwp_check, triangularity_probe
from .transforms import parseval_check
from .transmute import (OperatorPair, build_Bcal, build_Bcal_sqrt, build_V, factorization_check,
                        intertwining_residual, kernel_operator, multiplier_witness,
                        spectral_norm_ratio)

PROBE_KS = (1.0, 2.0, 3.0, 5.0)


class RunContext:
    """Lazily built objects shared by checks; safe to use from worker threads."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.grid = scenario.grid_x
        self.rng = np.random.default_rng(scenario.seed)
        self._lock = threading.RLock()
        self._memo: dict = {}

    def _get(self, key, build):
        with self._lock:
            if key not in self._memo:
                self._memo[key] = build()
            return self._memo[key]

    @property
    def pair(self) -> OperatorPair:
        s = self.scenario
        return self._get("pair", lambda: OperatorPair.build(s.q1, s.q2, self.grid, s.k_max, s.n_k))

    @property
    def K(self):
        return self._get("K", lambda: goursat_solve(self.scenario.q2, self.grid))

    @property
    def L(self):
        return self._get("L", lambda: invert_kernel(self.K))

    @property
    def V(self):
        return self._get("V", lambda: build_V(self.pair))

    @property
    def corpus(self):
        def build():
            if self.scenario.corpus_family == "indicators":
                return corpus_mod.pw_corpus(self.grid, self.scenario.sigmas)
            return corpus_mod.standard_corpus(self.grid)
        return self._get("corpus", build)

    @property
    def interior(self):
        return self._get("interior", lambda: corpus_mod.interior_corpus(self.grid))

    @property
    def pw(self):
        return self._get("pw", lambda: corpus_mod.pw_corpus(self.grid, self.scenario.sigmas))

    @property
    def identical(self) -> bool:
        return self.scenario.q1 == self.scenario.q2

    @property
    def shift(self) -> float:
        return self.scenario.q2.level - self.scenario.q1.level

    def seeded_pairs(self, n: int):
        """``n`` corpus index pairs drawn from the scenario seed (fresh generator per call)."""
        rng = np.random.default_rng(self.scenario.seed)
        m = len(self.corpus)
        return [tuple(int(v) for v in rng.integers(0, m, 2)) for _ in range(n)]


@dataclass(frozen=True)
class Outcome:
    value: float
    passed: bool | None  # None: not applicable to this scenario
    metrics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CheckSpec:
    name: str
    tag: str
    group: str
    tol: float
    identity: str
    func: object = field(repr=False, compare=False)

    def as_dict(self) -> dict:
        return {"name": self.name, "tag": self.tag, "group": self.group,
                "default_tol": self.tol, "identity": self.identity}


CATALOGUE: list[CheckSpec] = []


def check(name, tag, group, tol, identity):
    def deco(fn):
        CATALOGUE.append(CheckSpec(name, tag, group, tol, identity, fn))
        return fn
    return deco


# --- eigen ----------------------------------------------------------------

@check("eigen-accuracy", "eigen-equation", "eigen", 1e-4,
       "RK4 eigenfunctions match closed-form cos(sqrt(lam - c) x) for k <= 5")
def _eigen_accuracy(ctx: RunContext, tol):
    gk = SpectralGrid(5.0, 11)
    errs = {}
    for label, q in (("q1", ctx.scenario.q1), ("q2", ctx.scenario.q2)):
        a = eigen_solve(q, ctx.grid, gk).psi
        b = eigen_closed_form(q, ctx.grid, gk).psi
        errs[label] = float(np.abs(a - b).max())
    v = max(errs.values())
    return Outcome(v, v <= tol, errs)


@check("eigen-normalization", "eigen-boundary", "eigen", 1e-12,
       "psi(0, lam) = 1 and psi'(0, lam) = 0 on the whole spectral grid")
def _eigen_norm(ctx, tol):
    e = ctx.pair.eig2
    v = float(max(np.abs(e.psi[0] - 1).max(), np.abs(e.psi_x[0]).max()))
    return Outcome(v, v <= tol)


# --- transforms -----------------------------------------------------------

@check("parseval", "eq-2.12-parseval", "parseval", 2e-2,
       "int f g dx = int (Q2 f)(Q2 g) dGamma2 for g = f and g = the widest corpus member")
def _parseval(ctx, tol):
    c = ctx.corpus
    pair = ctx.pair
    wide = max(c, key=lambda t: t.sigma - t.support[0])
    per = {}
    for tf in c:
        r1 = parseval_check(tf.values, tf.values, pair.eig2, pair.gamma2).rel_err
        r2 = parseval_check(tf.values, wide.values, pair.eig2, pair.gamma2).rel_err
        per[tf.name] = max(r1, r2)
    v = max(per.values())
    return Outcome(v, v <= tol, per)


@check("delta-completeness", "eq-4.11-completeness", "parseval", 1e-3,
       "h = Q2^-1 Q2 h on the corpus")
def _delta(ctx, tol):
    r = delta_identity_check(ctx.pair.eig2, ctx.pair.gamma2, ctx.corpus)
    return Outcome(r.worst_rel_err, r.worst_rel_err <= tol, r.per_function)


# --- kernels --------------------------------------------------------------

@check("goursat-diagonal", "goursat-diagonal", "kernel", 1e-8,
       "K(x, x) = 1/2 int_0^x q2")
def _diag(ctx, tol):
    K = ctx.K
    v = float(np.abs(K.diagonal - ctx.scenario.q2.half_integral(ctx.grid.nodes)).max())
    return Outcome(v, v <= tol)


@check("transmutation-identity", "eq-2.2-transmutation", "kernel", 1e-3,
       "(I + K) phi(., k) = psi2(., k) for k in {1, 2, 3, 5}")
def _transmutation(ctx, tol):
    B = volterra_matrix(ctx.K)
    per = {}
    for k in PROBE_KS:
        gk = SpectralGrid(k, 2)
        phi = ctx.pair.eig(1, gk).psi[:, 1] if ctx.scenario.q1.family == "zero" else \
            eigen_closed_form(type(ctx.scenario.q1).zero(), ctx.grid, gk).psi[:, 1]
        psi2 = ctx.pair.eig(2, gk).psi[:, 1]
        per[k] = float(np.abs(B @ phi - psi2).max())
    v = max(per.values())
    return Outcome(v, v <= tol, per)


@check("kernel-cross-method", "eq-4.12-kernel-cross", "kernel", 5e-2,
       "Goursat K agrees with the extrapolated spectral kernel off the diagonal")
def _cross(ctx, tol):
    pair = ctx.pair
    g1 = pair.gamma1.grid
    S = spectral_kernel_extrapolated(pair.eig(1, g1), pair.eig(2, g1), pair.gamma1)
    x = ctx.grid.nodes
    X, T = np.meshgrid(x, x, indexing="ij")
    mask = np.abs(X - T) > 0.2
    v = float(np.abs(S.values - ctx.K.values)[mask].max())
    return Outcome(v, v <= tol, {"eps": "richardson(10/k_max^2 * [1, 2, 4])"})


@check("kernel-inversion", "eq-4.17-inversion", "kernel", 1e-6,
       "(I + L)(I + K) = I = (I + K)(I + L) on the corpus")
def _inversion(ctx, tol):
    r = inversion_kernel_check(ctx.K, ctx.L, ctx.corpus)
    return Outcome(r.worst, r.worst <= tol, {"left": r.left, "right": r.right})


# --- transmute ------------------------------------------------------------

@check("adjoint-identity", "eq-2.3-adjoint", "transmute", 1e-8,
       "<B f, g> = <f, B* g> on seeded corpus pairs")
def _adjoint(ctx, tol):
    B = kernel_operator(ctx.K)
    Bs = kernel_operator(ctx.K, adjoint=True)
    w = ctx.grid.adjoint_weights
    c = ctx.corpus
    worst = 0.0
    for i, j in ctx.seeded_pairs(8):
        f, g = c[i].values, c[j].values
        lhs, rhs = np.dot(w, B(f) * g), np.dot(w, f * Bs(g))
        scale = math.sqrt(np.dot(w, B(f) ** 2) * np.dot(w, g**2))
        worst = max(worst, abs(lhs - rhs) / scale)
    return Outcome(worst, worst <= tol)


@check("factorizations", "eq-2.8-factorization", "transmute", 1e-2,
       "T1 B* = T2, T2 Bcal* = T1, B = T2~ T1, Bcal = T1~ T2, B* = T1^-1 T2, Bcal* = T2^-1 T1")
def _factor(ctx, tol):
    r = factorization_check(ctx.pair, ctx.K, ctx.L, ctx.corpus)
    v = max(r.values())
    return Outcome(v, v <= tol, r)


@check("v-equals-bstar", "sec-3-v-bstar", "transmute", 1e-2,
       "V = T1^-1 T2 agrees with the kernel-route B*")
def _vbstar(ctx, tol):
    Bs = kernel_operator(ctx.K, adjoint=True)
    w = ctx.grid.pairing_weights
    per = {}
    for tf in ctx.corpus:
        f = tf.values
        d = ctx.V(f) - Bs(f)
        per[tf.name] = float(math.sqrt(np.dot(w, d * d) / np.dot(w, f * f)))
    v = max(per.values())
    return Outcome(v, v <= tol, per)


@check("intertwining", "thm-3.1-intertwining", "transmute", 1e-2,
       "V Q2 f = Q1 V f (finite differences, interior)")
def _intertwining(ctx, tol):
    r = intertwining_residual(ctx.V, ctx.scenario.q1, ctx.scenario.q2, ctx.interior)
    return Outcome(r.worst, r.worst <= tol, r.per_function)


@check("rescaled-intertwining", "thm-4.11-rescaled", "transmute", 1e-2,
       "Q1 Bcal f = Bcal Q2 f with multiplier sqrt(gamma2/gamma1)")
def _rescaled(ctx, tol):
    op = build_Bcal_sqrt(ctx.pair)
    r = intertwining_residual(op, ctx.scenario.q1, ctx.scenario.q2, ctx.interior)
    return Outcome(r.worst, r.worst <= tol, r.per_function)


@check("rescaled-inverse", "thm-4.11-inverse", "transmute", 1e-2,
       "Bcal(B f) = f with multiplier gamma2/gamma1, f = (I + L) h")
def _rescaled_inverse(ctx, tol):
    Bc = build_Bcal(ctx.pair, 1.0)
    B = kernel_operator(ctx.K)
    IL = volterra_matrix(ctx.L)
    per = {}
    for tf in ctx.corpus:
        f = IL @ tf.values
        per[tf.name] = float(np.abs(Bc(B(f)) - f).max() / np.abs(f).max())
    v = max(per.values())
    return Outcome(v, v <= tol, per)


@check("spectral-isometry", "rem-3.3-isometry", "transmute", 1e-2,
       "||T2 T1^-1 F||_Gamma2 <= (1 + tol) ||F||_Gamma1 for F = T1 f")
def _isometry(ctx, tol):
    v = spectral_norm_ratio(ctx.pair, ctx.corpus)
    return Outcome(v, v <= 1.0 + tol)


@check("not-a-multiplier", "sec-3-not-multiplier", "transmute", 1e-2,
       "T2 T1^-1 is not a multiplication operator: Q(F G) != Q(F) G")
def _multiplier(ctx, tol):
    if ctx.identical:
        return Outcome(0.0, None, {"reason": "identical pair: the map is the identity"})
    c = ctx.corpus
    w = multiplier_witness(ctx.pair, c[3].values, c[4].values)
    return Outcome(w.defect, w.defect > 10 * tol, w.as_dict())


# --- Paley-Wiener ---------------------------------------------------------

@check("pwp-transfer", "thm-4.5-pwp", "pw", 0.1,
       "supp f in [0, s] <=> supp V f in [0, s + 2h] and type(T2 f) = s")
def _pwp(ctx, tol):
    if ctx.scenario.q1.family != "zero" or not ctx.scenario.q2.is_closed_form:
        return Outcome(0.0, None, {"reason": "needs q1 = 0 and a closed-form q2"})
    r = pwp_check(ctx.pair, ctx.pw, V=ctx.V, type_tol=tol)
    v = max(abs(row.sigma_type - row.sigma) for row in r.rows)
    return Outcome(v, r.ok, r.as_dict())


@check("triangularity", "prop-4.4-triangularity", "pw", 2e-2,
       "delta-probe mass of V beyond y0 + 0.1 shrinks with the bump width")
def _tri(ctx, tol):
    Vh = build_V(ctx.pair, window="hann")
    r = triangularity_probe(Vh, y0=2.0)
    v = r.leak_fraction[-1]
    return Outcome(v, r.monotone and v <= tol, r.as_dict())


@check("eigen-transfer", "eq-4.9-transfer", "pw", 5e-2,
       "psi2 = V* psi1 on [0, x_max/2] for k in {1, 2, 3}")
def _transfer(ctx, tol):
    r = eigenfunction_transfer_check(ctx.pair, ctx.V)
    return Outcome(r.worst, r.worst <= tol, r.as_dict())


# --- Levitan / Carleman ---------------------------------------------------

@check("levitan-oracles", "levitan-oracle-coeffs", "levitan", 1e-8,
       "contour coefficients of z*, d/dz and the shift; radius independence")
def _oracles(ctx, tol):
    z = np.array([0.05, 0.1 + 0.05j, -0.1])
    C = ContourSpec(0.0, 0.5, 64)
    h0 = 0.1
    j = np.arange(9)
    fact = np.array([math.factorial(int(n)) for n in j])
    want = {
        "multiplication": np.column_stack([z] + [np.zeros_like(z)] * 8),
        "derivative": np.tile((j == 1).astype(complex), (len(z), 1)),
        "shift": np.tile(h0**j / fact, (len(z), 1)),
    }
    ops = {"multiplication": multiplication_operator, "derivative": derivative_operator,
           "shift": shift_operator(h0)}
    errs = {}
    for name, op in ops.items():
        a = levitan_coefficients(op, C, z, 8).a
        errs[name] = float(np.abs(a - want[name]).max())
    small = levitan_coefficients(ops["shift"], C.scaled(0.5), z[:1] * 0.5, 8).a
    big = levitan_coefficients(ops["shift"], C, z[:1] * 0.5, 8).a
    errs["radius-independence"] = float(np.abs(small - big).max())
    v = max(errs.values())
    return Outcome(v, v <= tol, errs)


def pair_coefficients(ctx: RunContext, lam, j_max: int = 12):
    c = ctx.shift
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    center = complex(np.mean(lam.real))
    radius = float(np.abs(lam - center).max() + abs(c) + 1.0)
    op = constant_pair_operator(ctx.scenario.q1.level, ctx.scenario.q2.level)
    return levitan_coefficients(op, ContourSpec(center, radius, 64), lam, j_max)


@check("eigen-expansion", "eq-4.2-expansion", "levitan", 1e-6,
       "psi2 = sum a_n d^n_lam psi1 at k = 2, x <= 2; residual decreasing in J")
def _expansion(ctx, tol):
    s = ctx.scenario
    if s.q1.family != "zero" or not s.q2.is_closed_form:
        return Outcome(0.0, None, {"reason": "needs q1 = 0 and a closed-form q2"})
    co = pair_coefficients(ctx, [4.0])
    x = ctx.grid.nodes[ctx.grid.nodes <= 2.0]
    r = eigenfunction_expansion_check(ctx.pair, co, x, 2.0)
    res = [r.residuals[j] for j in sorted(r.residuals)]
    v = res[-1]
    ok = v <= tol and (r.decreasing or max(res) <= tol)
    return Outcome(v, ok, r.as_dict())


@check("carleman", "thm-4.7-carleman", "carleman", 1e-2,
       "T2 f = T1 f + int r1(nu, .) T1 f(nu) dGamma1(nu); g profile finite")
def _carleman(ctx, tol):
    r = carleman_residual_check(ctx.pair, ctx.corpus)
    return Outcome(r.worst, r.worst <= tol and math.isfinite(r.g_norm), r.as_dict())


# --- running --------------------------------------------------------------

@dataclass(frozen=True)
class CheckRecord:
    name: str
    tag: str
    group: str
    digest: str
    value: float
    tol: float
    status: str
    metrics: dict
    runtime: float = field(default=0.0, compare=False)

    def as_dict(self) -> dict:
        """Serializable form; runtime is left out so reports are reproducible."""
        return {"name": self.name, "tag": self.tag, "group": self.group, "digest": self.digest,
                "value": self.value, "tol": self.tol, "status": self.status,
                "metrics": self.metrics}


def scenario_digest(s: Scenario) -> str:
    payload = {
        "q1": repr(s.q1), "q2": repr(s.q2), "grid": [s.x_max, s.n_x, s.k_max, s.n_k],
        "corpus": [s.corpus_family, list(s.sigmas)], "seed": s.seed,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def tolerance_for(spec: CheckSpec, overrides: dict) -> float:
    for key in (spec.tag, spec.name):
        if key in overrides:
            return overrides[key]
    return spec.tol


def run_one(spec: CheckSpec, ctx: RunContext, tol: float, base_digest: str) -> CheckRecord:
    t0 = time.perf_counter()
    out = spec.func(ctx, tol)
    dt = time.perf_counter() - t0
    status = "skip" if out.passed is None else ("pass" if out.passed else "fail")
    digest = hashlib.sha256(f"{base_digest}:{spec.name}:{tol!r}".encode()).hexdigest()[:16]
    return CheckRecord(spec.name, spec.tag, spec.group, digest, float(out.value), tol, status,
                       out.metrics, dt)


def selected(groups) -> list[CheckSpec]:
    order = {g: i for i, g in enumerate(CHECK_GROUPS)}
    chosen = [c for c in CATALOGUE if c.group in groups]
    return sorted(chosen, key=lambda c: order[c.group])


def run_checks(ctx: RunContext, threads: int = 1) -> list[CheckRecord]:
    """Run the scenario's checks group by group (eigen first, Levitan last)."""
    s = ctx.scenario
    base = scenario_digest(s)
    specs = selected(s.checks)
    records: dict[str, CheckRecord] = {}
    for g in CHECK_GROUPS:
        batch = [c for c in specs if c.group == g]
        if not batch:
            continue
        if threads > 1 and len(batch) > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                futs = {c.name: ex.submit(run_one, c, ctx, tolerance_for(c, s.tolerances), base)
                        for c in batch}
                for name, fut in futs.items():
                    records[name] = fut.result()
        else:
            for c in batch:
                records[c.name] = run_one(c, ctx, tolerance_for(c, s.tolerances), base)
    return [records[c.name] for c in specs]
