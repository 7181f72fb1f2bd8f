"""Command-line entry point, flat key=value configuration and file formats."""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    PROBLEMS,
    ExperimentPlan,
    get_problem,
    initialize,
    run_convergence_table,
    run_timing,
    run_violation_table,
)
from .diagnostics import RunReport
from .mesh import CellField
from .solver import SchemeConfig, Snapshot, advance, assemble
from .stencil import dump_stencils
from .timestepping import TABLEAUS, modified_wavenumber, stability_function

OUT_ENV = "FVLIM_OUT_DIR"
REQUIRED = ("scheme", "p", "problem", "N")
LIST_KEYS = {"scheme": str, "p": int, "integrator": str, "N": int, "flux_reconstruction": str}
PLAN_KEYS = {"problem": str, "dims": int, "t_end": float, "repetitions": int}
ALIASES = {"fallback": "fallback_limiter", "name": "scheme"}
_SCHEME_TYPES = {
    "theta_node_set": str,
    "C": float,
    "adaptive_dt": bool,
    "fallback_limiter": str,
    "blending": bool,
    "sed": bool,
    "sed_bounds_check": bool,
    "nad_eps": float,
    "eps_m": float,
    "alpha_mode": str,
    "stage_candidate": str,
}
RENDER_ORDER = ("scheme", "p", "problem", "N", "t_end", "integrator", "flux_reconstruction",
                "repetitions")


class ConfigError(ValueError):
    pass


def _convert(key: str, raw: str, kind, where: str):
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            val = float(raw)
            if not math.isfinite(val):
                raise ValueError(raw)
            return val
        return raw
    except ValueError:
        raise ConfigError(f"{where}: key {key!r} expects {kind.__name__}, got {raw!r}") from None


def _tokens(text: str):
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].split(";", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        for tok in line.split():
            yield lineno, tok


def parse_config(text: str) -> ExperimentPlan:
    """Parse whitespace/newline separated ``key=value`` pairs into a validated plan."""
    raw: dict[str, tuple[int, str]] = {}
    for lineno, tok in _tokens(text):
        where = f"line {lineno}"
        if "=" not in tok:
            raise ConfigError(f"{where}: expected key=value, got {tok!r}")
        key, value = tok.split("=", 1)
        key = ALIASES.get(key.strip(), key.strip())
        if key not in LIST_KEYS and key not in PLAN_KEYS and key not in _SCHEME_TYPES:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        raw[key] = (lineno, value.strip())
    _early_scheme_check(raw)
    missing = [k for k in REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")

    def get(key, kind):
        lineno, value = raw[key]
        return _convert(key, value, kind, f"line {lineno}")

    def get_list(key):
        lineno, value = raw[key]
        items = [v for v in value.split(",") if v]
        if not items:
            raise ConfigError(f"line {lineno}: key {key!r} is empty")
        return tuple(_convert(key, v, LIST_KEYS[key], f"line {lineno}") for v in items)

    try:
        problem = get_problem(get("problem", str))
    except ValueError as exc:
        raise ConfigError(f"line {raw['problem'][0]}: {exc}") from None
    if "dims" in raw and get("dims", int) != problem.dims:
        raise ConfigError(f"line {raw['dims'][0]}: dims does not match problem {problem.name}")
    overrides = {k: get(k, t) for k, t in _SCHEME_TYPES.items() if k in raw}
    plan = ExperimentPlan(
        problem=problem.name,
        schemes=get_list("scheme"),
        ps=get_list("p"),
        integrators=get_list("integrator") if "integrator" in raw else None,
        Ns=get_list("N"),
        t_end=get("t_end", float) if "t_end" in raw else problem.period,
        repetitions=get("repetitions", int) if "repetitions" in raw else 1,
        flux_reconstructions=get_list("flux_reconstruction") if "flux_reconstruction" in raw
        else ("gauss_legendre",),
        overrides=overrides,
    )
    validate_plan(plan)
    return plan


def _early_scheme_check(raw: dict):
    """Report scheme-level conflicts before complaining about absent keys."""
    if "scheme" not in raw:
        return
    if "dims" in raw:
        dims = _convert("dims", raw["dims"][1], int, f"line {raw['dims'][0]}")
    elif "problem" in raw and raw["problem"][1] in PROBLEMS:
        dims = PROBLEMS[raw["problem"][1]].dims
    else:
        return
    overrides = {k: _convert(k, v, _SCHEME_TYPES[k], f"line {ln}")
                 for k, (ln, v) in raw.items() if k in _SCHEME_TYPES}
    p_raw = raw["p"][1].split(",") if "p" in raw else ["1"]
    for scheme in raw["scheme"][1].split(","):
        for p in p_raw:
            try:
                SchemeConfig(scheme, _convert("p", p, int, "p"), dims, **overrides)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"invalid combination (scheme={scheme}, p={p}): {exc}") from None


def validate_plan(plan: ExperimentPlan):
    problem = get_problem(plan.problem)
    if plan.t_end <= 0:
        raise ConfigError("t_end must be positive")
    if any(n <= 0 for n in plan.Ns):
        raise ConfigError("N must be positive")
    for scheme, p, integ, _ in plan.tuples():
        try:
            SchemeConfig(scheme, p, problem.dims, integrator=integ, **plan.overrides)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid combination (scheme={scheme}, p={p}, integrator={integ}): {exc}") from None


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def render_config(plan: ExperimentPlan) -> str:
    values = {
        "scheme": plan.schemes,
        "p": plan.ps,
        "problem": plan.problem,
        "N": plan.Ns,
        "t_end": float(plan.t_end),
        "integrator": plan.integrators,
        "flux_reconstruction": plan.flux_reconstructions,
        "repetitions": plan.repetitions,
    }
    lines = [f"{k}={_fmt(values[k])}" for k in RENDER_ORDER if values[k] is not None]
    lines += [f"{k}={_fmt(v)}" for k, v in sorted(plan.overrides.items())]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# file formats


def _g17(x) -> str:
    return format(float(x), ".17g")


def write_snapshot_csv(snapshot, path) -> Path:
    """Cell averages as CSV, i-major then j, 17 significant digits."""
    fld: CellField = snapshot.field if isinstance(snapshot, Snapshot) else snapshot
    grid = fld.grid
    u = fld.interior
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if grid.dims == 1:
            w.writerow(["i", "x_center", "u"])
            for i, (x, val) in enumerate(zip(grid.centers(0), u)):
                w.writerow([i, _g17(x), _g17(val)])
        else:
            w.writerow(["i", "j", "x_center", "y_center", "u"])
            xc, yc = grid.centers(0), grid.centers(1)
            for i in range(grid.n):
                for j in range(grid.n):
                    w.writerow([i, j, _g17(xc[i]), _g17(yc[j]), _g17(u[i, j])])
    return path


def read_snapshot_csv(path) -> np.ndarray:
    """Interior cell averages back from :func:`write_snapshot_csv`."""
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[:2] == ["i", "x_center"]:
        out = np.empty(len(body))
        for r in body:
            out[int(r[0])] = float(r[2])
        return out
    n = int(round(math.sqrt(len(body))))
    out = np.empty((n, n))
    for r in body:
        out[int(r[0]), int(r[1])] = float(r[4])
    return out


REPORT_FIELDS = ("scheme", "p", "N", "integrator", "t_end", "delta_minus", "delta_plus", "delta",
                 "e1", "mass_initial", "mass_final", "steps", "retries", "cells_per_stage_per_second")


def write_report_json(report: RunReport, path) -> Path:
    data = {k: getattr(report, k) for k in REPORT_FIELDS}
    path = Path(path)
    path.write_text(json.dumps(data, indent=2) + "\n")
    return path


def write_rows_csv(rows, path) -> Path:
    rows = [r if isinstance(r, dict) else {f.name: getattr(r, f.name) for f in fields(r)} for r in rows]
    path = Path(path)
    with path.open("w", newline="") as fh:
        if not rows:
            return path
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (_g17(v) if isinstance(v, float) else v) for k, v in r.items()})
    return path


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(out: Path, command: str, config_text: str | None, started: str,
                   reports: list, outputs: list) -> Path:
    manifest = dict(
        command=command,
        version=__version__,
        config=config_text,
        started=started,
        finished=_now(),
        reports=[str(p) for p in reports],
        outputs=[str(p) for p in outputs],
    )
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


# ---------------------------------------------------------------------------
# subcommands


def _load_plan(args) -> tuple[ExperimentPlan, str]:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    text = Path(args.config).read_text()
    return parse_config(text), text


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "fvlim_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _map(fn, items, threads: int):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def cmd_run(args) -> int:
    started = _now()
    plan, text = _load_plan(args)
    out = _out_dir(args)
    problem = get_problem(plan.problem)
    times = [float(t) for t in args.snapshot_times.split(",") if t] if args.snapshot_times else []

    def one(tup):
        scheme_name, p, integ, n = tup
        cfg = SchemeConfig(scheme_name, p, problem.dims, integrator=integ, **plan.overrides)
        grid = problem.grid(n)
        ic = initialize(problem, grid)
        scheme = assemble(cfg, grid, problem.bc, problem.flux())
        periods = plan.t_end / problem.period
        ref = ic if abs(periods - round(periods)) < 1e-12 and round(periods) > 0 else None
        final, report, snaps = advance(scheme, ic, plan.t_end, times, reference=ref)
        stem = f"{scheme_name}_p{p}_{integ}_N{n}"
        files = [write_report_json(report, out / f"{stem}.json")]
        for s in snaps:
            files.append(write_snapshot_csv(s, out / f"{stem}_t{s.time:.6g}.csv"))
        files.append(write_snapshot_csv(final, out / f"{stem}_final.csv"))
        return report, files

    results = _map(one, list(plan.tuples()), args.threads)
    reports = [f[0] for _, f in results]
    outputs = [p for _, f in results for p in f[1:]]
    for report, _ in results:
        print(f"{report.scheme} p={report.p} {report.integrator} N={report.N}: "
              f"delta={report.delta:.3e} e1={report.e1} steps={report.steps}")
    write_manifest(out, "run", text, started, reports, outputs)
    return 0


def cmd_violations(args) -> int:
    started = _now()
    plan, text = _load_plan(args)
    out = _out_dir(args)
    tuples = list(plan.tuples())

    def one(t):
        sub = ExperimentPlan(plan.problem, (t[0],), (t[1],), (t[2],), (t[3],), plan.t_end,
                             overrides=plan.overrides)
        return run_violation_table(sub)[0]

    rows = _map(one, tuples, args.threads)
    path = write_rows_csv(rows, out / "violations.csv")
    for r in rows:
        flag = "MPP" if r["approximately_mpp"] else "violates"
        print(f"{r['scheme']:13s} p={r['p']} {r['integrator']:7s} N={r['N']} delta={r['delta']:.3e} {flag}")
    write_manifest(out, "violations", text, started, [], [path])
    return 0


def cmd_convergence(args) -> int:
    started = _now()
    plan, text = _load_plan(args)
    out = _out_dir(args)
    records = run_convergence_table(plan)
    path = write_rows_csv(records, out / "convergence.csv")
    for r in records:
        eoc = "---" if r.EOC is None else f"{r.EOC:.3f}"
        print(f"{r.flux_reconstruction:14s} p={r.p} {r.integrator:6s} N={r.N:4d} C={r.C:.2f} E1={r.E1:.3e} EOC={eoc}")
    write_manifest(out, "convergence", text, started, [], [path])
    return 0


def cmd_timing(args) -> int:
    started = _now()
    plan, text = _load_plan(args)
    out = _out_dir(args)
    rows = run_timing(plan)
    path = write_rows_csv(rows, out / "timing.csv")
    for r in rows:
        print(f"{r['scheme']:13s} p={r['p']} N={r['N']} {r['flux_reconstruction']}: "
              f"{r['cells_per_stage_per_second']:.4g} cells/stage/s")
    write_manifest(out, "timing", text, started, [], [path])
    return 0


def cmd_stability(args) -> int:
    started = _now()
    out = _out_dir(args)
    k = np.linspace(-np.pi, np.pi, args.samples)
    rows, summary = [], []
    for p in range(8):
        z = modified_wavenumber(p, k, args.C)
        for name, tab in TABLEAUS.items():
            R = np.abs(stability_function(tab, z))
            summary.append(dict(integrator=name, p=p, C=args.C, max_abs_R=float(R.max())))
            rows += [dict(integrator=name, p=p, k=float(a), re_z=float(b.real), im_z=float(b.imag), abs_R=float(c))
                     for a, b, c in zip(k, z, R)]
    tracks = write_rows_csv(rows, out / "stability_tracks.csv")
    summ = write_rows_csv(summary, out / "stability_summary.csv")
    for s in summary:
        print(f"{s['integrator']:7s} p={s['p']} max|R|={s['max_abs_R']:.15f}")
    write_manifest(out, "stability", None, started, [], [tracks, summ])
    return 0


def cmd_dump_stencils(args) -> int:
    text = dump_stencils(args.p_max)
    if args.out:
        out = _out_dir(args)
        (out / "stencils.txt").write_text(text)
    print(text, end="" if text.endswith("\n") else "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fvlim", description="Limited finite-volume advection experiments.")
    parser.add_argument("--version", action="version", version=f"fvlim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="flat key=value configuration file")
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./fvlim_out)")
        sp.add_argument("--threads", type=int, default=1, help="independent runs executed concurrently")
        return sp

    sp = common(sub.add_parser("run", help="advance one or more configured runs"))
    sp.add_argument("--snapshot-times", default="", help="comma-separated output times")
    sp.set_defaults(func=cmd_run)
    common(sub.add_parser("convergence", help="L1 errors and orders")).set_defaults(func=cmd_convergence)
    common(sub.add_parser("violations", help="maximum-principle violation table")).set_defaults(func=cmd_violations)
    common(sub.add_parser("timing", help="cells per stage per second")).set_defaults(func=cmd_timing)
    sp = common(sub.add_parser("stability", help="eigenvalue tracks and amplification factors"), config=False)
    sp.add_argument("--C", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=2001)
    sp.set_defaults(func=cmd_stability)
    sp = common(sub.add_parser("dump-stencils", help="print stencils as exact fractions"), config=False)
    sp.add_argument("--p-max", type=int, default=7)
    sp.set_defaults(func=cmd_dump_stencils)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"fvlim: configuration error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FloatingPointError, OSError) as exc:
        print(f"fvlim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
