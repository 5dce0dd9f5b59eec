"""Command-line entry point: rotorflow {solve-linear,solve-nonlinear,decompose,sweep,verify} CONFIG."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import threading
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .errors import BallExit, ConfigError, NoContraction, RotorflowError
from .fields import FlowSolution
from .forcing import build_forcing
from .grid import make_grid
from .linear import LinearSettings, decompose, solve_constructive, solve_linear
from .nonlinear import BallSpec, PicardSettings, axisym_gap, check_ball, linear_mode0, picard_solve
from .radial import norms
from .verify import (CHECKS, SCALING_EXPECTATIONS, SweepReport, cell_forcing, fit_loglog,
                     scaling_sweep, vorticity_thickness)

log = logging.getLogger("rotorflow")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONLINEAR = 3
EXIT_ACCEPTANCE = 4
EXIT_INTERNAL = 5


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, (complex, np.complexfloating)):
        return {"re": float(o.real), "im": float(o.imag)}
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (tuple, set)):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


class Output:
    """Artifact directory; writes are serialized and recorded for the manifest."""

    def __init__(self, directory: Path, cfg: RunConfig, command: str):
        self.dir = Path(directory)
        self.cfg = cfg
        self.command = command
        self.lock = threading.Lock()
        self.artifacts: list[str] = []
        self.csv = "csv" in cfg.output.formats
        self.json = "json" in cfg.output.formats

    def write(self, name: str, text: str) -> None:
        path = self.dir / name
        with self.lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
            if name not in self.artifacts:
                self.artifacts.append(name)

    def write_csv(self, name: str, text: str) -> None:
        if self.csv:
            self.write(name, text)

    def write_json(self, name: str, obj) -> None:
        if self.json:
            self.write(name, dumps(obj))

    def manifest_path(self) -> Path:
        return self.dir / "manifest.json"

    def previous(self) -> dict | None:
        try:
            return json.loads(self.manifest_path().read_text())
        except (OSError, json.JSONDecodeError):
            return None

    def finish(self, status: int, extra: dict | None = None) -> None:
        manifest = {"command": self.command, "version": __version__, "config": self.cfg.to_dict(),
                    "artifacts": sorted(self.artifacts), "exit_status": status, "complete": True}
        manifest.update(extra or {})
        self.write("manifest.json", dumps(manifest))


def _grid(cfg: RunConfig):
    g = cfg.grid
    return make_grid(g.R_max, g.M, g.sigma, bl_min_points=g.bl_min_points)


def _linear_settings(cfg: RunConfig, threads: int) -> LinearSettings:
    s = cfg.solver
    return LinearSettings(kappa=s.kappa, threads=threads, route=s.route, bl_min_points=cfg.grid.bl_min_points)


def _write_modes(out: Output, sol: FlowSolution) -> None:
    for n in sol.mode_indices:
        out.write_csv(f"modes/mode_{n:+d}.csv", sol.mode(n).to_csv())


def norms_document(sol: FlowSolution) -> dict:
    return {"total": norms(sol).as_dict(),
            "modes": {str(n): norms(sol.mode(n)).as_dict() for n in sol.mode_indices}}


# -- commands -------------------------------------------------------------------------------

def cmd_solve_linear(cfg: RunConfig, out: Output, threads: int, resume: bool) -> int:
    grid = _grid(cfg)
    f = build_forcing(cfg.forcing, grid)
    sol = solve_linear(cfg.solver.alpha, f, cfg.solver.N, _linear_settings(cfg, threads))
    _write_modes(out, sol)
    doc = norms_document(sol)
    doc["routes"] = {str(n): i.get("route") for n, i in sol.info["modes"].items()}
    doc["coefficients"] = {str(n): {"a": i["a"], "b": i["b"]} for n, i in sol.info["modes"].items() if "a" in i}
    out.write_json("norms.json", doc)
    out.finish(EXIT_OK, {"grid": sol.grid.manifest()})
    return EXIT_OK


def cmd_solve_nonlinear(cfg: RunConfig, out: Output, threads: int, resume: bool) -> int:
    s = cfg.solver
    grid = _grid(cfg)
    f = build_forcing(cfg.forcing, grid)
    ball = BallSpec(s.alpha, s.ball_eps, None if s.ball_delta is None else tuple(s.ball_delta))
    settings = PicardSettings(tol_fp=s.tol_fp, tol_res=s.tol_res, max_iter=s.max_iter, damping=s.damping)
    N = 16 if s.N is None else s.N
    try:
        sol, trace = picard_solve(s.alpha, f, ball, N=N, settings=settings,
                                  linear=_linear_settings(cfg, threads), start=s.start)
    except (NoContraction, BallExit) as exc:
        if exc.trace is not None:
            out.write_csv("trace.csv", exc.trace.to_csv())
            out.write_json("picard.json", {"summary": exc.trace.summary(), "error": type(exc).__name__,
                                           "message": str(exc), "ball": ball.manifest()})
        out.finish(exc.code, {"grid": grid.manifest(), "error": type(exc).__name__})
        raise
    _write_modes(out, sol)
    out.write_csv("trace.csv", trace.to_csv())
    rep = check_ball(sol, ball)
    v0 = linear_mode0(f)
    out.write_json("picard.json", {"summary": trace.summary(), "ball": ball.manifest(),
                                   "ball_values": list(rep.values), "ball_slack": list(rep.slack),
                                   "axisym_gap": axisym_gap(sol, v0)})
    out.write_json("norms.json", norms_document(sol))
    out.finish(EXIT_OK, {"grid": grid.manifest()})
    return EXIT_OK


def _load_rows(path: Path) -> dict:
    done = {}
    try:
        for line in path.read_text().splitlines():
            if line.strip():
                row = json.loads(line)
                done[(float(row["alpha"]), int(row["n"]))] = row
    except (OSError, json.JSONDecodeError, KeyError):
        return {}
    return done


def _resumable(out: Output, resume: bool, name: str) -> dict:
    if not resume:
        return {}
    prev = out.previous()
    if prev is not None and prev.get("config") != out.cfg.to_dict():
        log.warning("existing output was produced by a different config; not resuming")
        return {}
    return _load_rows(out.dir / name)


def _row_appender(out: Output, name: str):
    path = out.dir / name
    path.parent.mkdir(parents=True, exist_ok=True)

    def append(row):
        with out.lock:
            with path.open("a") as fh:
                fh.write(json.dumps(row, default=_jsonable) + "\n")

    return append


def _start_partial(out: Output, name: str, keep: bool) -> None:
    path = out.dir / name
    if not keep and path.exists():
        path.unlink()
    # a manifest without "complete" marks an interrupted run that --resume may continue
    out.dir.mkdir(parents=True, exist_ok=True)
    out.manifest_path().write_text(dumps({"command": out.command, "config": out.cfg.to_dict(), "complete": False}))


def cmd_sweep(cfg: RunConfig, out: Output, threads: int, resume: bool) -> int:
    w = cfg.sweep
    grid = _grid(cfg)
    done = _resumable(out, resume, "cells.jsonl")
    _start_partial(out, "cells.jsonl", keep=bool(done))
    if w.expect is not None:
        expectations = {k: tuple(v) for k, v in w.expect.items()}
    else:
        expectations = SCALING_EXPECTATIONS if w.against == "alpha" else {}
    rep = scaling_sweep(w.alphas, w.ns, cfg.forcing, w.quantities, grid=grid, against=w.against,
                        expectations=expectations, threads=threads, kappa=cfg.solver.kappa, done=done,
                        on_row=_row_appender(out, "cells.jsonl"))
    out.artifacts.append("cells.jsonl")
    out.write_csv("sweep.csv", rep.to_csv())
    out.write_json("sweep.json", rep.summary())
    status = EXIT_ACCEPTANCE if (w.acceptance and not rep.passed) else EXIT_OK
    out.finish(status, {"grid": grid.manifest(), "resumed_cells": len(done)})
    return status


def cmd_decompose(cfg: RunConfig, out: Output, threads: int, resume: bool) -> int:
    w = cfg.sweep
    grid = _grid(cfg)
    done = _resumable(out, resume, "cells.jsonl")
    _start_partial(out, "cells.jsonl", keep=bool(done))
    append = _row_appender(out, "cells.jsonl")
    rows = []
    for alpha in w.alphas:
        for n in w.ns:
            key = (float(alpha), int(n))
            if key in done:
                rows.append(done[key])
                continue
            f = cell_forcing(cfg.forcing, alpha, n, grid)
            cs = solve_constructive(n, alpha, *f.mode(n), grid)
            dec = decompose(cs)
            row = dec.row()
            row["thickness"] = vorticity_thickness(cs.noslip.omega - cs.slip.omega, grid)
            for part, prof in dec.parts().items():
                out.write_csv(f"parts/alpha_{alpha:g}_n_{n:+d}_{part}.csv", prof.to_csv())
            append(row)
            rows.append(row)
    rep = SweepReport(rows, manifest={"alphas": w.alphas, "ns": w.ns, "recipe": cfg.forcing, "grid": grid.manifest()})
    xs = [abs(r["alpha"] * r["n"]) for r in rows]
    if len(set(xs)) >= 3:
        rep.fits["thickness"] = fit_loglog(xs, [r["thickness"] for r in rows], "thickness", -1.0 / 3.0, 0.05)
    out.artifacts.append("cells.jsonl")
    out.write_csv("decomposition.csv", rep.to_csv())
    out.write_json("decomposition.json", rep.summary())
    status = EXIT_ACCEPTANCE if (w.acceptance and not rep.passed) else EXIT_OK
    out.finish(status, {"grid": grid.manifest(), "resumed_cells": len(done)})
    return status


def cmd_verify(cfg: RunConfig, out: Output, threads: int, resume: bool) -> int:
    names = cfg.sweep.checks or list(CHECKS)
    unknown = [c for c in names if c not in CHECKS]
    if unknown:
        raise ConfigError(f"sweep.checks: unknown {unknown} (known: {', '.join(CHECKS)})")
    grid = _grid(cfg)
    done = {}
    if resume:
        prev = out.previous()
        if prev is not None and prev.get("config") == cfg.to_dict():
            for line in _read_lines(out.dir / "checks.jsonl"):
                row = json.loads(line)
                done.setdefault(row["check"], []).append(row)
    _start_partial(out, "checks.jsonl", keep=bool(done))
    append = _row_appender(out, "checks.jsonl")
    rows = []
    for name in names:
        if name in done:
            rows.extend(done[name])
            continue
        log.info("verify: running %s", name)
        got = CHECKS[name](grid)
        for row in got:
            append(row)
        rows.extend(got)
    rep = SweepReport(rows, manifest={"checks": names, "grid": grid.manifest()},
                      checks={f"{r['check']}: {r['quantity']}": r["passed"] for r in rows})
    out.artifacts.append("checks.jsonl")
    out.write_csv("verify.csv", rep.to_csv())
    out.write_json("verify.json", rep.summary())
    for r in rows:
        print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['check']:<15} {r['quantity']}: {r['value']:.4g} ({r['bound']})")
    status = EXIT_ACCEPTANCE if (cfg.sweep.acceptance and not rep.passed) else EXIT_OK
    out.finish(status, {"grid": grid.manifest(), "resumed_checks": sorted(done)})
    return status


def _read_lines(path: Path) -> list[str]:
    try:
        return [ln for ln in path.read_text().splitlines() if ln.strip()]
    except OSError:
        return []


COMMANDS = {
    "solve-linear": cmd_solve_linear,
    "solve-nonlinear": cmd_solve_nonlinear,
    "decompose": cmd_decompose,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}
CELL_COMMANDS = ("sweep", "decompose", "verify")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rotorflow", description=__doc__.split(":")[0])
    parser.add_argument("--version", action="version", version=f"rotorflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides output.directory)")
        p.add_argument("--resume", action="store_true", help="reuse completed work in an existing output directory")
        p.add_argument("--threads", type=int, help="worker threads (default: $ROTORFLOW_THREADS or 1)")
        p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        value = flag
    else:
        env = os.environ.get("ROTORFLOW_THREADS", "").strip()
        try:
            value = int(env) if env else 1
        except ValueError as exc:
            raise ConfigError(f"ROTORFLOW_THREADS must be an integer, got {env!r}") from exc
    if value < 1:
        raise ConfigError(f"thread count must be positive, got {value}")
    return value


def _report_error(exc: BaseException, code: int) -> None:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        threads = resolve_threads(args.threads)
        cfg = load_config(args.config)
        out = Output(Path(args.out or cfg.output.directory), cfg, args.command)
        if args.resume and args.command not in CELL_COMMANDS:
            prev = out.previous()
            if prev and prev.get("complete") and prev.get("config") == cfg.to_dict() \
                    and prev.get("command") == args.command:
                log.info("output already complete; nothing to do")
                return int(prev.get("exit_status", EXIT_OK))
        return COMMANDS[args.command](cfg, out, threads, args.resume)
    except RotorflowError as exc:
        _report_error(exc, exc.code)
        return exc.code
    except OSError as exc:
        _report_error(exc, EXIT_INTERNAL)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - map anything unexpected to the internal-error status
        if args.verbose:
            traceback.print_exc()
        _report_error(exc, EXIT_INTERNAL)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
