"""Command-line scenario runner.

    translab run <scenario>      run a scenario file (or bundled name)
    translab checks              list the check catalogue
    translab export <artifact>   write one artifact for a scenario

Exit status: 0 all checks pass, 1 some check failed, 2 configuration or I/O error.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import _backend
from . import io as tio
from .checks import CATALOGUE, RunContext, pair_coefficients, run_checks, scenario_digest
from .config import ConfigError, Scenario, load_scenario
from .eigen import EigenError
from .grids import GridError
from .kernels import KernelInstability, invert_kernel
from .paleywiener import DEFAULT_TAU, complex_extend
from .transforms import forward
from .transmute import (build_B, build_Bcal, build_Bcal_sqrt, build_Bcal_star, build_V,
                        DiscreteOperator, kernel_operator)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
ARTIFACTS = ("grid", "spectral-grid", "eigen", "transform", "kernel", "inverse-kernel",
             "coefficients", "operator")
RECIPES = ("identity", "V", "B", "B*", "Bcal", "Bcal*", "Bcal_sqrt")
EIGEN_K_LIMIT = 10.0


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", help="artifact directory (default: runs/<scenario>)")
    common.add_argument("--seed", type=int, help="override the scenario seed")
    common.add_argument("--threads", type=int, default=1, help="worker threads for checks")
    common.add_argument("--format", choices=("csv", "json"), default=None,
                        help="table format (csv default; json for listings and reports)")
    p = argparse.ArgumentParser(prog="translab", description=__doc__.splitlines()[0],
                                parents=[common])
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", parents=[common], help="run a scenario")
    r.add_argument("scenario", help="scenario TOML file or bundled name (identity, const-shift)")
    sub.add_parser("checks", parents=[common], help="list the check catalogue")
    e = sub.add_parser("export", parents=[common], help="export one artifact")
    e.add_argument("artifact", choices=ARTIFACTS)
    e.add_argument("--scenario", default="const-shift", help="scenario file or bundled name")
    e.add_argument("--recipe", choices=RECIPES, default="V", help="operator recipe")
    e.add_argument("--operator", type=int, choices=(1, 2), default=2,
                   help="which operator of the pair for eigen/transform/spectral-grid")
    return p


def _scenario(ref: str, seed) -> Scenario:
    s = load_scenario(ref)
    return dataclasses.replace(s, seed=seed) if seed is not None else s


def _out_dir(args, s: Scenario) -> Path:
    return Path(args.out_dir or s.out_dir or Path("runs") / s.name)


def _closed_pair(s: Scenario) -> bool:
    return s.q1.family == "zero" and s.q2.is_closed_form


def _run_artifacts(ctx: RunContext, fmt: str) -> dict:
    """Data tables written by ``run``; every value is derived deterministically."""
    s, pair = ctx.scenario, ctx.pair
    ext = "json" if fmt == "json" else "csv"
    f0 = ctx.corpus[0].values
    out = {
        f"grid_x.{ext}": tio.space_grid_table(ctx.grid),
        f"grid_k1.{ext}": tio.spectral_grid_table(pair.gamma1),
        f"grid_k2.{ext}": tio.spectral_grid_table(pair.gamma2),
        f"eigen_q2.{ext}": tio.eigen_table(pair.eig2, EIGEN_K_LIMIT),
        f"transform_q2.{ext}": tio.transform_table(forward(f0, pair.eig2)),
        f"kernel_K.{ext}": tio.kernel_table(ctx.K),
        f"kernel_L.{ext}": tio.kernel_table(invert_kernel(ctx.K, method="pointwise")),
    }
    if s.q2.is_closed_form:
        pw0 = ctx.pw[0].values
        F = complex_extend(pw0, s.q2, pair.eig2, DEFAULT_TAU)
        out[f"pw_extension.{ext}"] = tio.extension_table(F.tau, F.ext_log_abs)
    if _closed_pair(s):
        out[f"levitan_coeffs.{ext}"] = tio.coefficients_table(pair_coefficients(ctx, [1.0, 4.0, 9.0]))
    return {name: t.render(fmt) for name, t in out.items()}


def _require_measures(s: Scenario):
    for key, q in (("q1", s.q1), ("q2", s.q2)):
        if not q.is_closed_form:
            raise ConfigError(f"field 'potential.{key}.family': family {q.family!r} has no "
                              "spectral measure here; run supports 'zero' and 'constant'")


def cmd_run(args) -> int:
    s = _scenario(args.scenario, args.seed)
    _require_measures(s)
    ctx = RunContext(s)
    records = run_checks(ctx, max(1, args.threads))
    failed = [r for r in records if r.status == "fail"]
    verdict = "FAIL" if failed else "PASS"
    out = _out_dir(args, s)
    fmt = args.format or "csv"
    files = _run_artifacts(ctx, fmt)
    rows = [(r.name, r.tag, r.group, r.status, r.value, r.tol, r.digest) for r in records]
    files["checks.csv"] = tio.csv_text(("name", "tag", "group", "status", "value", "tol", "digest"), rows)
    files["report.json"] = tio.json_text({
        "scenario": s.name, "source": s.source, "digest": scenario_digest(s), "seed": s.seed,
        "q1": s.q1.describe(), "q2": s.q2.describe(),
        "grid": {"x_max": s.x_max, "n_x": s.n_x, "k_max": s.k_max, "n_k": s.n_k},
        "checks": [r.as_dict() for r in records], "verdict": verdict,
    })
    for name in sorted(files):
        tio.atomic_write(out / name, files[name])
    for r in records:
        print(f"{r.status.upper():4s}  {r.name:24s} {r.tag:28s} value={r.value:.3e} tol={r.tol:.1e}"
              f"  ({r.runtime:.2f}s)")
    skipped = sum(r.status == "skip" for r in records)
    print(f"{verdict}: {len(failed)} failed, {skipped} skipped, {len(records)} run "
          f"[backend={_backend.NAME}] -> {out}")
    return EXIT_FAIL if failed else EXIT_PASS


def cmd_checks(args) -> int:
    if args.format == "json":
        sys.stdout.write(tio.json_text([c.as_dict() for c in CATALOGUE]))
    elif args.format == "csv":
        sys.stdout.write(tio.csv_text(("name", "tag", "group", "default_tol", "identity"),
                                      ((c.name, c.tag, c.group, c.tol, c.identity) for c in CATALOGUE)))
    else:
        for c in CATALOGUE:
            print(f"{c.name:24s} {c.tag:28s} tol={c.tol:.0e}  {c.identity}")
    return EXIT_PASS


def _operator(ctx: RunContext, recipe: str) -> DiscreteOperator:
    import numpy as np
    if recipe == "identity":
        return DiscreteOperator(np.eye(ctx.grid.n_x), "identity", ctx.grid)
    if recipe == "V":
        return build_V(ctx.pair)
    if recipe == "B":
        return kernel_operator(ctx.K)
    if recipe == "B*":
        return kernel_operator(ctx.K, adjoint=True)
    if recipe == "Bcal":
        return build_Bcal(ctx.pair, 1.0)
    if recipe == "Bcal*":
        return build_Bcal_star(ctx.pair)
    return build_Bcal_sqrt(ctx.pair)


def cmd_export(args) -> int:
    s = _scenario(args.scenario, args.seed)
    ctx = RunContext(s)
    fmt = args.format or "csv"
    out = _out_dir(args, s)
    pair = ctx.pair
    eig = pair.eig1 if args.operator == 1 else pair.eig2
    gamma = pair.gamma1 if args.operator == 1 else pair.gamma2
    a = args.artifact
    if a == "grid":
        table = tio.space_grid_table(ctx.grid)
    elif a == "spectral-grid":
        table = tio.spectral_grid_table(gamma)
    elif a == "eigen":
        table = tio.eigen_table(eig)
    elif a == "transform":
        table = tio.transform_table(forward(ctx.corpus[0].values, eig))
    elif a == "kernel":
        table = tio.kernel_table(ctx.K)
    elif a == "inverse-kernel":
        table = tio.kernel_table(invert_kernel(ctx.K, method="pointwise"))
    elif a == "coefficients":
        if not _closed_pair(s):
            raise ConfigError("coefficients need q1 = 0 and a closed-form q2")
        table = tio.coefficients_table(pair_coefficients(ctx, [1.0, 4.0, 9.0]))
    else:
        op = _operator(ctx, args.recipe)
        stem = "operator_" + args.recipe.replace("*", "_star")
        tio.atomic_write(out / f"{stem}.tmut", op.to_bytes())
        text = tio.operator_json(op) if fmt == "json" else tio.operator_table(op).render("csv")
        path = tio.atomic_write(out / f"{stem}.{fmt}", text)
        print(path)
        return EXIT_PASS
    path = tio.atomic_write(out / f"{a}.{fmt}", table.render(fmt))
    print(path)
    return EXIT_PASS


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handlers = {"run": cmd_run, "checks": cmd_checks, "export": cmd_export}
    try:
        return handlers[args.cmd](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GridError, KernelInstability, EigenError) as exc:
        print(f"unsupported scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
