"""Command-line orchestration: verification suites, refinement studies,
Wente batches, Lorentz-norm queries, and flow runs.

Reports are JSON (schema version 1) with CSV companions; identical
invocations with the same seed produce byte-identical output apart from
the timestamp field.  Independent (surface, grid) items are dispatched
in parallel, capped by the WILLMORE_LAB_THREADS environment variable;
report assembly stays single-threaded and ordered.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import lorentz as lo
from . import reports as rp
from .diskgrid import Grid, read_field
from .flow import ps_norm, run as flow_run
from .immersion import CATALOG, make_bundle, make_surface, perturb_normal
from .reports import DEFAULT_THRESHOLDS, FLOOR, REPORT_KEYS

__all__ = ["main"]

SCHEMA_VERSION = 1


def _max_workers() -> int:
    env = os.environ.get("WILLMORE_LAB_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _parse_surface(arg: str) -> tuple[str, dict]:
    """Parse 'name' or 'name:key=value,key=value' surface arguments."""
    name, _, tail = arg.partition(":")
    params: dict = {}
    if tail:
        for item in tail.split(","):
            key, _, value = item.partition("=")
            params[key.strip()] = json.loads(value)
    return name.replace("-", "_"), params


def _patched(name: str, params: dict, s: float, n: int, m: int, seed: int):
    if name in ("perturbed_catenoid", "perturbed_sphere", "perturbed_cylinder"):
        base = make_surface(name.removeprefix("perturbed_"), Grid(s, n), m=m,
                            **{k: v for k, v in params.items() if k not in ("seed", "amplitude")})
        return perturb_normal(base, seed=int(params.get("seed", seed)),
                              amplitude=float(params.get("amplitude", 0.05)))
    return make_surface(name, Grid(s, n), m=m, **params)


def _write_json(path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _write_rows_csv(path, rows: list[dict]) -> None:
    if path is None:
        return
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["surface", "m", "n", "key", "value"])
        for row in rows:
            writer.writerow([row["surface"], row["m"], row["n"], row["key"], row["value"]])


def _report_items(args) -> list[dict]:
    name, params = _parse_surface(args.surface)
    jobs = [(name, params, args.s, n, args.m) for n in args.n]

    def work(job):
        jname, jparams, s, n, m = job
        patch = _patched(jname, jparams, s, n, m, args.seed)
        report = rp.residual_report(patch)
        return {
            "surface": patch.label,
            "kind": jname,
            "params": jparams,
            "m": m,
            "n": n,
            "s": s,
            "keys": {k: float(v) for k, v in sorted(report.items())},
        }

    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        return list(pool.map(work, jobs))


def cmd_verify(args) -> int:
    thresholds = dict(DEFAULT_THRESHOLDS)
    if args.threshold_file:
        with open(args.threshold_file) as fh:
            thresholds.update(json.load(fh))
    items = _report_items(args)
    name, _ = _parse_surface(args.surface)
    ok = True
    rows = []
    for item in items:
        failures = rp.check_report(item["keys"], name, thresholds)
        item["failures"] = {k: {"value": v, "threshold": t} for k, (v, t) in sorted(failures.items())}
        ok = ok and not failures
        rows.extend(
            {"surface": item["surface"], "m": item["m"], "n": item["n"], "key": k, "value": f"{v:.17g}"}
            for k, v in item["keys"].items()
        )
    payload = {
        "schema": SCHEMA_VERSION,
        "command": "verify",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "thresholds": thresholds,
        "items": items,
        "pass": ok,
    }
    _write_json(args.out, payload)
    if args.csv:
        _write_rows_csv(args.csv, rows)
    if not ok:
        for item in items:
            for key, info in item["failures"].items():
                print(
                    f"FAIL {item['surface']} n={item['n']}: {key} = {info['value']:.3e} "
                    f"> {info['threshold']:.3e}",
                    file=sys.stderr,
                )
    return 0 if ok else 1


def cmd_refine(args) -> int:
    if len(args.n) < 2:
        print("refine needs at least two --n grid sizes", file=sys.stderr)
        return 2
    items = _report_items(args)
    ratios = rp.refinement_ratios([item["keys"] for item in items])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["surface", "m", "n_coarse", "n_fine", "key", "ratio"])
            for (coarse, fine), row in zip(zip(items, items[1:]), ratios):
                for key in REPORT_KEYS:
                    if key in row:
                        val = row[key] if row[key] == FLOOR else f"{row[key]:.17g}"
                        writer.writerow([coarse["surface"], coarse["m"], coarse["n"], fine["n"], key, val])
    payload = {
        "schema": SCHEMA_VERSION,
        "command": "refine",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "items": items,
        "ratios": [{k: (v if v == FLOOR else float(v)) for k, v in row.items()} for row in ratios],
    }
    if not args.out:
        _write_json("-", payload)
    return 0


def cmd_wente(args) -> int:
    grid = Grid(args.s, args.n[0])

    def work(seed):
        a = lo.random_band_limited(grid, 2 * seed + args.seed)
        b = lo.random_band_limited(grid, 2 * seed + 1 + args.seed)
        res = lo.wente_solve(grid, a, b)
        return seed, res.ratio_L2, res.ratio_L21

    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        rows = list(pool.map(work, range(args.samples)))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["seed", "ratio_L2", "ratio_L21", "n"])
            for seed, r2, r21 in rows:
                writer.writerow([seed, f"{r2:.17g}", f"{r21:.17g}", grid.n])
    r2s = [r[1] for r in rows]
    r21s = [r[2] for r in rows]
    payload = {
        "schema": SCHEMA_VERSION,
        "command": "wente",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "n": grid.n,
        "s": args.s,
        "samples": args.samples,
        "max_ratio_L2": max(r2s),
        "mean_ratio_L2": float(np.mean(r2s)),
        "max_ratio_L21": max(r21s),
        "mean_ratio_L21": float(np.mean(r21s)),
    }
    _write_json("-" if not args.out else args.out + ".json", payload)
    return 0


def cmd_lorentz(args) -> int:
    grid, values = read_field(args.field)
    f = values[..., 0] if values.ndim == 3 else values
    q = np.inf if str(args.q).lower() in ("inf", "infinity") else float(args.q)
    norm = lo.lorentz_norm(lo.rearrange(grid, f), float(args.p), q)
    print(f"{norm:.12g}")
    return 0


def cmd_flow(args) -> int:
    name, params = _parse_surface(args.surface)
    patch = _patched(name, params, args.s, args.n[0], args.m, args.seed)
    stop = 0.0
    if args.stop_ratio > 0.0:
        stop = args.stop_ratio * ps_norm(make_bundle(patch))
    trace = flow_run(patch, max_iters=args.max_iters, stop=stop)
    if args.out:
        trace.write_csv(args.out)
        if args.checkpoint:
            from .diskgrid import write_field

            write_field(args.checkpoint, patch.grid, trace.final.patch.phi)
    payload = {
        "schema": SCHEMA_VERSION,
        "command": "flow",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "surface": patch.label,
        "iterations": len(trace.states) - 1,
        "stopped_by": trace.stopped_by,
        "initial_energy": trace.initial.energy,
        "final_energy": trace.final.energy,
        "initial_ps_norm": trace.initial.ps,
        "final_ps_norm": trace.final.ps,
        "final_conformal_defect": trace.final.conformal_defect,
    }
    _write_json("-" if not args.out else args.out + ".json", payload)
    return 0


def _add_common(parser: argparse.ArgumentParser, surface: bool = True) -> None:
    if surface:
        parser.add_argument("--surface", required=True,
                            help="catalog name, optionally name:key=value,... "
                                 f"(catalog: {', '.join(sorted(CATALOG))})")
        parser.add_argument("--m", type=int, default=3, help="ambient dimension (3..6)")
    parser.add_argument("--n", type=int, action="append", default=None,
                        help="points per side (repeatable, odd)")
    parser.add_argument("--s", type=float, default=0.5, help="half-width of the grid square")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None, help="output path (JSON report / CSV table)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="willmore-lab",
        description="Verification suites for divergence-form Willmore conservation laws",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run all residual checks against thresholds")
    _add_common(p)
    p.add_argument("--threshold-file", default=None, help="JSON {key: threshold} overrides")
    p.add_argument("--csv", default=None, help="also write {surface,m,n,key,value} rows")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("refine", help="per-key Richardson ratio table")
    _add_common(p)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("wente", help="seeded random Wente-constant batch")
    _add_common(p, surface=False)
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_wente)

    p = sub.add_parser("lorentz", help="Lorentz norm of a binary field file")
    p.add_argument("--field", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.set_defaults(func=cmd_lorentz)

    p = sub.add_parser("flow", help="Willmore descent run with trace output")
    _add_common(p)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--stop-ratio", type=float, default=0.0,
                   help="stop once ps_norm falls below this fraction of its start")
    p.add_argument("--checkpoint", default=None, help="write final patch as binary field")
    p.set_defaults(func=cmd_flow)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", None) is None:
        args.n = [65]
    for n in args.n:
        if n % 2 == 0:
            parser.error(f"--n must be odd, got {n}")
    if sorted(args.n) != args.n:
        parser.error("--n values must be increasing")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
