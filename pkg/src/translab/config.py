"""Scenario files (TOML) and their validation."""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .grids import GridError, PotentialSpec, SpaceGrid

CHECK_GROUPS = ("eigen", "parseval", "kernel", "transmute", "pw", "levitan", "carleman")
CORPUS_FAMILIES = ("standard", "indicators")
BUNDLED = ("identity", "const-shift")


class ConfigError(ValueError):
    """Invalid or unreadable scenario; the message names the offending field."""


@dataclass(frozen=True)
class Scenario:
    name: str
    q1: PotentialSpec
    q2: PotentialSpec
    x_max: float
    n_x: int
    k_max: float
    n_k: int
    corpus_family: str = "standard"
    sigmas: tuple = (1.0, 2.0, 4.0)
    checks: tuple = CHECK_GROUPS
    tolerances: dict = field(default_factory=dict)
    out_dir: str | None = None
    seed: int = 0
    source: str = ""

    @property
    def grid_x(self) -> SpaceGrid:
        return SpaceGrid(self.x_max, self.n_x)


def _get(table: dict, dotted: str, kind, default=...):
    node = table
    parts = dotted.split(".")
    for p in parts:
        if not isinstance(node, dict) or p not in node:
            if default is ...:
                raise ConfigError(f"missing field '{dotted}'")
            return default
        node = node[p]
    if kind is float and isinstance(node, int) and not isinstance(node, bool):
        node = float(node)
    if not isinstance(node, kind) or isinstance(node, bool) and kind is not bool:
        raise ConfigError(f"field '{dotted}' must be {kind.__name__}, got {type(node).__name__}")
    return node


def _potential(table: dict, key: str) -> PotentialSpec:
    fam = _get(table, f"{key}.family", str)
    try:
        if fam == "zero":
            return PotentialSpec.zero()
        if fam == "constant":
            return PotentialSpec.constant(_get(table, f"{key}.c", float))
        if fam in ("sampled", "analytic-table"):
            vals = _get(table, f"{key}.values", list)
            xm = _get(table, f"{key}.x_max", float)
            sm = _get(table, f"{key}.smoothness", int, None)
            return PotentialSpec(fam, values=tuple(float(v) for v in vals), x_max=xm, smoothness=sm)
    except GridError as exc:
        raise ConfigError(f"field '{key}': {exc}") from exc
    raise ConfigError(f"field '{key}.family': unsupported family {fam!r}")


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    name = _get(data, "name", str)
    q1 = _potential(data, "potential.q1")
    q2 = _potential(data, "potential.q2")
    x_max = _get(data, "grid.x_max", float)
    n_x = _get(data, "grid.n_x", int)
    k_max = _get(data, "grid.k_max", float)
    n_k = _get(data, "grid.n_k", int)
    checks = tuple(_get(data, "checks", list, list(CHECK_GROUPS)))
    for c in checks:
        if c not in CHECK_GROUPS:
            raise ConfigError(f"field 'checks': unknown check group {c!r}")
    fam = _get(data, "corpus.family", str, "standard")
    if fam not in CORPUS_FAMILIES:
        raise ConfigError(f"field 'corpus.family': unsupported corpus {fam!r}")
    sigmas = tuple(float(s) for s in _get(data, "corpus.sigmas", list, [1.0, 2.0, 4.0]))
    tols = _get(data, "tolerances", dict, {})
    for k, v in tols.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            raise ConfigError(f"field 'tolerances.{k}' must be a positive number")
    scen = Scenario(name, q1, q2, x_max, n_x, k_max, n_k, fam, sigmas, checks,
                    {k: float(v) for k, v in tols.items()},
                    _get(data, "output.dir", str, None), _get(data, "seed", int, 0), source)
    try:
        scen.grid_x
    except GridError as exc:
        raise ConfigError(f"field 'grid': {exc}") from exc
    if not (k_max > 0 and n_k >= 8):
        raise ConfigError("field 'grid': k_max must be positive and n_k >= 8")
    if max(sigmas) > 0.5 * x_max:
        raise ConfigError("field 'corpus.sigmas': supports must fit in [0, x_max/2]")
    return scen


def load_scenario(ref: str) -> Scenario:
    """Load a scenario from a path, or a bundled one by name."""
    path = Path(ref)
    if path.is_file():
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {ref}: {exc}") from exc
        return parse_scenario(text, str(path))
    if ref in BUNDLED:
        text = resources.files("translab").joinpath("scenarios", f"{ref}.toml").read_text("utf-8")
        return parse_scenario(text, f"bundled:{ref}")
    raise ConfigError(f"no such scenario file or bundled scenario: {ref}")
