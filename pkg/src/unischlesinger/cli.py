"""Command-line experiment runner.

``unischlesinger run CONFIG`` executes the selected suites at one cutoff;
``unischlesinger sweep CONFIG`` runs the cross product over the ``M`` and
``h`` lists and adds convergence diagnostics.  Exit status is 0 when every
gated check passes, 1 on a numerical failure (the report is still written)
and 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from . import families
from .config import ConfigError, ExperimentConfig, load_config
from .errors import LoopError
from .suites import RECORD_KEYS, build_gammas, run_suites

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def environment() -> dict:
    return {"package": _version(), "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def spectral_records(by_M: dict) -> list:
    """Local decay rates of factorization residuals across cutoffs.

    ``by_M`` maps ``M`` to that cutoff's records.  For each check the local
    algebraic order ``log(r_i / r_j) / log(M_j / M_i)`` is reported; growing
    values indicate faster-than-algebraic (spectral) decay until the floor.
    """
    Ms = sorted(by_M)
    series = {}
    for M in Ms:
        for r in by_M[M]:
            if r["suite"] == "factorization" and r["residual"] is not None:
                series.setdefault(r["check"], []).append((M, r["residual"]))
    out = []
    for check, pts in sorted(series.items()):
        if len(pts) < 2:
            continue
        rates = []
        for (M0, r0), (M1, r1) in zip(pts, pts[1:]):
            if r0 > 0 and r1 > 0:
                rates.append(float(np.log(r0 / r1) / np.log(M1 / M0)))
            else:
                rates.append(None)
        out.append(dict(suite="factorization", check=f"M_decay:{check}", gamma=None, m=None, n=None,
                        h=None, M=None, residual=pts[-1][1], tolerance=None, status="info",
                        detail="residuals " + ", ".join(f"M={M}: {r:.3e}" for M, r in pts)
                        + "; local orders " + ", ".join("-" if q is None else f"{q:.2f}" for q in rates)))
    return out


def build_report(command: str, cfg: ExperimentConfig, scale: float, recorders: list,
                 extra: list | None = None) -> dict:
    records = [r for rec in recorders for r in rec.records] + list(extra or [])
    counts = {s: sum(r["status"] == s for r in records) for s in ("pass", "fail", "info")}
    timing = {}
    for rec in recorders:
        timing.update({k: round(v, 6) for k, v in rec.timing.items()})
    return {
        "command": command,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "tol_scale": scale,
        "tolerances": cfg.resolved_tolerances(scale),
        "environment": environment(),
        "records": records,
        "summary": counts,
        "status": "fail" if counts["fail"] else "pass",
        "timing": timing,
    }


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def dumps_structured(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def dumps_table(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=RECORD_KEYS, lineterminator="\n")
    writer.writeheader()
    for r in report["records"]:
        writer.writerow({k: ("" if r[k] is None else r[k]) for k in RECORD_KEYS})
    return buf.getvalue()


def summarize(report: dict) -> str:
    lines = []
    suites = sorted({r["suite"] for r in report["records"]})
    for s in suites:
        rs = [r for r in report["records"] if r["suite"] == s]
        n_pass = sum(r["status"] == "pass" for r in rs)
        n_fail = sum(r["status"] == "fail" for r in rs)
        lines.append(f"{s:14s} pass={n_pass:4d} fail={n_fail:4d} info={len(rs) - n_pass - n_fail:4d}")
        for r in rs:
            if r["status"] == "fail":
                idx = " ".join(f"{k}={r[k]}" for k in ("gamma", "m", "n", "h", "M") if r[k] is not None)
                lines.append(f"  FAIL {r['check']} {idx} residual={r['residual']} {r['detail']}".rstrip())
    lines.append(f"overall: {report['status'].upper()}")
    return "\n".join(lines)


def _check_buildable(cfg: ExperimentConfig) -> None:
    """Reject configs whose family or diffeomorphism cannot be constructed."""
    try:
        for M in cfg.M:
            families.build_family(cfg.family, cfg.family_params, cfg.N, M)
        build_gammas(cfg)
    except (ValueError, LoopError) as exc:
        raise ConfigError(f"{type(exc).__name__}: {exc}") from exc


def _execute(command: str, cfg: ExperimentConfig, scale: float, jobs: int) -> dict:
    if command == "run" and len(cfg.M) != 1:
        raise ConfigError("run takes a single M; use sweep for a list")
    if command == "sweep" and len(cfg.M) < 2 and len(cfg.h) < 2:
        raise ConfigError("sweep needs at least two values of h or M")
    _check_buildable(cfg)
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        map_fn = pool.map if pool else map
        recorders = {M: run_suites(cfg, M, scale, map_fn) for M in cfg.M}
    finally:
        if pool:
            pool.shutdown()
    # coarser cutoffs of a sweep are diagnostic; only the finest one is gated
    finest = max(cfg.M)
    for M, rec in recorders.items():
        if M != finest:
            for r in rec.records:
                if r["status"] in ("pass", "fail") and r["residual"] is not None:
                    r["status"] = "info"
    extra = spectral_records({M: r.records for M, r in recorders.items()}) if len(cfg.M) > 1 else []
    return build_report(command, cfg, scale, list(recorders.values()), extra)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="unischlesinger", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=("run", "sweep"))
    parser.add_argument("config", type=Path)
    parser.add_argument("--out", type=Path, default=None, help="report path (default: stdout only)")
    parser.add_argument("--format", choices=("structured", "table"), default="structured")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    parser.add_argument("--tol-scale", type=float, default=1.0)
    args = parser.parse_args(argv)

    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        if not args.tol_scale > 0:
            raise ConfigError("--tol-scale must be positive")
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    t0 = time.perf_counter()
    try:
        report = _execute(args.command, cfg, args.tol_scale, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report["timing"]["total"] = round(time.perf_counter() - t0, 6)

    if args.out is not None:
        text = dumps_table(report) if args.format == "table" else dumps_structured(report)
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    print(summarize(report))
    return EXIT_OK if report["status"] == "pass" else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
