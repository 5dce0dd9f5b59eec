"""Quadratic nonlinearity, the Picard map and the admissible ball.

The steady problem for the perturbation v of the rotating flow is
solved as a fixed point of Phi(v) = linear noslip solve with force
f + G(v), where

    G(v) = -Q0((P0 v)^perp rot Q0 v + (Q0 v)^perp rot P0 v) - (Q0 v)^perp rot Q0 v

in terms of the projections P0 (mode 0) and Q0 (all nonzero modes).
With v^perp = (-v_theta, v_r) in polar components the mode-n product is a
discrete convolution over k of v_k^perp omega_{n-k}.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BallExit, ModeOverflow, NoContraction, RotorflowError
from .fields import FlowSolution, ModeProfile
from .forcing import ForcingSpec, gaussian_ring
from .linear import LinearSettings, momentum_residual_parts, solve_linear, solve_mode0
from .radial import TWO_PI, norms, rot_mode

log = logging.getLogger(__name__)

LARGE_ALPHA_DELTA = (1.0 / 3.0, 0.0, 0.0, 1.0 / 3.0)
SMALL_ALPHA_DELTA = (1.0, 1.0, 1.0, 1.0)
BALL_LABELS = ("P0 sup + grad sup", "Q0 L2", "Q0 grad L2", "sum of mode sups")


# -- admissible ball -------------------------------------------------------------

@dataclass(frozen=True)
class BallSpec:
    """Ball of radius eps |alpha|^delta_j in each of the four X0 quantities."""

    alpha: float
    eps: float = 1.0
    delta: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.delta is None:
            object.__setattr__(self, "delta", default_delta(self.alpha))
        if len(self.delta) != 4:
            raise ValueError("delta needs four exponents")
        t = self.thresholds
        if not all(math.isfinite(x) and x > 0 for x in t):
            raise ValueError(f"ball thresholds must be finite and positive, got {t}")

    @property
    def thresholds(self) -> tuple[float, ...]:
        a = abs(self.alpha)
        return tuple(self.eps * a**d for d in self.delta)

    def manifest(self) -> dict:
        return {"alpha": self.alpha, "eps": self.eps, "delta": list(self.delta),
                "thresholds": list(self.thresholds)}


def default_delta(alpha: float) -> tuple[float, ...]:
    return LARGE_ALPHA_DELTA if abs(alpha) >= 1.0 else SMALL_ALPHA_DELTA


@dataclass(frozen=True)
class BallReport:
    values: tuple[float, ...]
    thresholds: tuple[float, ...]

    @property
    def slack(self) -> tuple[float, ...]:
        return tuple(t - v for v, t in zip(self.values, self.thresholds))

    @property
    def violated(self) -> list[int]:
        return [j for j, s in enumerate(self.slack) if s < 0]

    @property
    def member(self) -> bool:
        return not self.violated

    def describe(self) -> str:
        return "; ".join(f"{BALL_LABELS[j]}: {self.values[j]:.3e} > {self.thresholds[j]:.3e}"
                         for j in self.violated) or "inside"


def ball_quantities(v: FlowSolution) -> tuple[float, float, float, float]:
    p = norms(v).x0_parts
    return (p[0] + p[1], p[2], p[3], p[4])


def check_ball(v: FlowSolution, ball: BallSpec) -> BallReport:
    return BallReport(values=ball_quantities(v), thresholds=ball.thresholds)


# -- nonlinearity ------------------------------------------------------------------

def _stack(v: FlowSolution, N: int):
    M1 = len(v.grid.r)
    shape = (2 * N + 1, M1)
    vr = np.zeros(shape, dtype=complex)
    vt = np.zeros(shape, dtype=complex)
    w = np.zeros(shape, dtype=complex)
    for n, p in v.modes.items():
        if abs(n) > N:
            raise ValueError(f"input mode {n} beyond cutoff N={N}")
        vr[n + N] = p.v_r
        vt[n + N] = p.v_t
        w[n + N] = p.omega if p.omega is not None else rot_mode(p)
    return vr, vt, w


def _product(vr, vt, w, N: int, n: int):
    """sum_k (v_theta,k omega_{n-k}, -v_r,k omega_{n-k}) over admissible k."""
    lo = max(-N, n - N)
    hi = min(N, n + N)
    k = np.arange(lo, hi + 1)
    if n == 0:
        k = k[k != 0]
    a = k + N
    b = n - k + N
    g_r = np.sum(vt[a] * w[b], axis=0)
    g_t = -np.sum(vr[a] * w[b], axis=0)
    return g_r, g_t


@dataclass(frozen=True, eq=False)
class NonlinearTerm:
    forcing: ForcingSpec
    dropped_l2: float
    radial_mode0: np.ndarray  # gradient part absorbed into the mode-0 pressure


def nonlinear_term(v: FlowSolution, N: int | None = None, *, threads: int = 1) -> NonlinearTerm:
    """G(v) for |n| <= N, the discarded mode-0 radial part and the dropped spill mass."""
    N = v.N if N is None else int(N)
    grid = v.grid
    vr, vt, w = _stack(v, max(N, v.N))
    Nin = max(N, v.N)
    z = np.zeros(len(grid.r), dtype=complex)
    out_modes = list(range(-2 * Nin, 2 * Nin + 1))

    def job(n):
        return n, _product(vr, vt, w, Nin, n)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            prods = dict(pool.map(job, out_modes))
    else:
        prods = dict(job(n) for n in out_modes)
    modes = {}
    dropped = 0.0
    for n, (g_r, g_t) in prods.items():
        if abs(n) > N:
            dropped += float(TWO_PI * grid.integrate_r(np.abs(g_r) ** 2 + np.abs(g_t) ** 2))
            continue
        if n == 0:
            modes[0] = (z, g_t)
        else:
            modes[n] = (g_r, g_t)
    radial0 = prods[0][0]
    dropped = math.sqrt(dropped)
    if dropped > 0:
        total = math.sqrt(sum(float(TWO_PI * grid.integrate_r(np.abs(a) ** 2 + np.abs(b) ** 2))
                              for a, b in modes.values()))
        if dropped > 1e-14 * max(total, 1e-300):
            warnings.warn(f"products beyond N={N} dropped (L2 mass {dropped:.3e}, kept {total:.3e})",
                          ModeOverflow, stacklevel=2)
    return NonlinearTerm(ForcingSpec(grid, modes, {"family": "nonlinear"}), dropped, radial0)


def nonlinear_G(v: FlowSolution, N: int | None = None, *, threads: int = 1) -> ForcingSpec:
    return nonlinear_term(v, N, threads=threads).forcing


def mixed_mode0_residual(v: FlowSolution, n_theta: int | None = None) -> float:
    """Mode-0 part of (P0 v)^perp rot Q0 v + (Q0 v)^perp rot P0 v, computed in physical space.

    Synthesizes both factors on an angular grid and averages over theta, which
    is independent of the convolution bookkeeping. Relative to the product scale.
    """
    N = v.N
    n_theta = n_theta or max(8, 4 * N + 4)
    theta = TWO_PI * np.arange(n_theta) / n_theta
    r = v.grid.r

    def synth(select):
        vr = np.zeros((len(r), n_theta), dtype=complex)
        vt = np.zeros_like(vr)
        w = np.zeros_like(vr)
        for n, p in v.modes.items():
            if not select(n):
                continue
            e = np.exp(1j * n * theta)[None, :]
            vr += p.v_r[:, None] * e
            vt += p.v_t[:, None] * e
            om = p.omega if p.omega is not None else rot_mode(p)
            w += om[:, None] * e
        return vr, vt, w

    r0, t0, w0 = synth(lambda n: n == 0)
    rq, tq, wq = synth(lambda n: n != 0)
    # v^perp omega with v^perp = (-v_theta, v_r)
    pr = -t0 * wq - tq * w0
    pt = r0 * wq + rq * w0
    mean = np.abs(pr.mean(axis=1)).max() + np.abs(pt.mean(axis=1)).max()
    scale = (np.abs(t0).max() * np.abs(wq).max() + np.abs(np.hstack([tq, rq])).max() * np.abs(w0).max())
    return float(mean / scale) if scale > 0 else 0.0


# -- residual of the full steady problem ------------------------------------------------

def full_residual(alpha: float, v: FlowSolution, f: ForcingSpec, G: ForcingSpec | None = None) -> float:
    """Largest per-mode momentum imbalance with force f + G(v), over the largest term of any mode.

    A common scale keeps modes that are negligible against the field from
    dominating through their own relative error.
    """
    G = G if G is not None else nonlinear_G(v)
    worst = 0.0
    scale = 0.0
    for n in v.mode_indices:
        if n < 0 and -n in v.modes:
            continue  # conjugate partner has the same residual
        fr, ft = f.mode(n)
        gr, gt = G.mode(n)
        res, sc = momentum_residual_parts(n, alpha, v.mode(n), fr + gr, ft + gt)
        worst = max(worst, res)
        scale = max(scale, sc)
    return worst / scale if scale > 0 else 0.0


# -- Picard iteration ------------------------------------------------------------------

@dataclass
class IterationTrace:
    update_norm: list[float] = field(default_factory=list)
    relative_update: list[float] = field(default_factory=list)
    ratio: list[float] = field(default_factory=list)
    residual: list[float] = field(default_factory=list)
    damping: list[float] = field(default_factory=list)
    ball_slack: list[tuple[float, ...]] = field(default_factory=list)
    mixed_mode0: list[float] = field(default_factory=list)
    converged: bool = False
    dropped_l2: float = 0.0
    start: str = "zero"

    @property
    def iterations(self) -> int:
        return len(self.update_norm)

    @property
    def final_ratio(self) -> float:
        finite = [x for x in self.ratio if math.isfinite(x)]
        return finite[-1] if finite else float("nan")

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["iter", "update_norm", "ratio", "residual"])
        for i, (u, q, res) in enumerate(zip(self.update_norm, self.ratio, self.residual), start=1):
            out.writerow([i, repr(u), repr(q), repr(res)])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"iterations": self.iterations, "converged": self.converged,
                "final_update": self.relative_update[-1] if self.relative_update else None,
                "final_residual": self.residual[-1] if self.residual else None,
                "final_ratio": self.final_ratio, "damping": self.damping[-1] if self.damping else None,
                "dropped_l2": self.dropped_l2, "start": self.start,
                "max_mixed_mode0": max(self.mixed_mode0, default=0.0)}


@dataclass
class PicardSettings:
    tol_fp: float = 1e-10
    tol_res: float = 1e-7
    max_iter: int = 60
    damping: float = 1.0
    min_damping: float = 1.0 / 64
    stall_steps: int = 3
    check_mixed: bool = True


def _x0_diff(a: FlowSolution, b: FlowSolution) -> float:
    return norms(a.combine(b, 1.0, -1.0)).x0_norm


def _pad(v: FlowSolution, N: int) -> FlowSolution:
    modes = {n: v.mode(n) for n in range(-N, N + 1)}
    return FlowSolution(v.grid, v.alpha, modes, v.info)


def picard_solve(alpha: float, f: ForcingSpec, ball: BallSpec | None = None, *,
                 N: int = 16, settings: PicardSettings | None = None,
                 linear: LinearSettings | None = None, start: FlowSolution | str = "zero",
                 ) -> tuple[FlowSolution, IterationTrace]:
    """Fixed point of v = (1 - theta) v + theta Phi(v), Phi(v) = noslip solve with f + G(v)."""
    settings = settings or PicardSettings()
    linear = linear or LinearSettings()
    ball = ball or BallSpec(alpha)
    top = max((abs(n) for n in f.modes), default=0)
    if top > N:
        raise ValueError(f"forcing carries mode {top} beyond N={N}")
    trace = IterationTrace()
    if isinstance(start, str):
        trace.start = start
        if start == "zero":
            v = FlowSolution.zeros(f.grid, alpha, N)
        elif start == "linear":
            v = _pad(solve_linear(alpha, f, N, linear), N)
        else:
            raise ValueError(f"unknown start {start!r}")
    else:
        trace.start = "given"
        v = _pad(start, N)
    theta = settings.damping
    term = nonlinear_term(v, N)
    streak = 0
    prev = None
    for it in range(settings.max_iter):
        w = _pad(solve_linear(alpha, f.combine(term.forcing), N, linear), N)
        upd = _x0_diff(w, v)
        size = norms(w).x0_norm
        rel = upd / size if size > 0 else (0.0 if upd == 0 else float("inf"))
        v = v.combine(w, 1.0 - theta, theta) if theta != 1.0 else w
        ratio = upd / prev if prev else float("nan")
        prev = upd
        term = nonlinear_term(v, N)
        res = full_residual(alpha, v, f, term.forcing)
        rep = check_ball(v, ball)
        trace.update_norm.append(upd)
        trace.relative_update.append(rel)
        trace.ratio.append(ratio)
        trace.residual.append(res)
        trace.damping.append(theta)
        trace.ball_slack.append(rep.slack)
        trace.dropped_l2 = max(trace.dropped_l2, term.dropped_l2)
        if settings.check_mixed:
            trace.mixed_mode0.append(mixed_mode0_residual(v))
        log.debug("picard %d: update %.3e (rel %.3e) ratio %.3f residual %.3e", it + 1, upd, rel, ratio, res)
        if not rep.member:
            raise BallExit(f"iterate {it + 1} left the ball ({rep.describe()})", trace)
        if rel < settings.tol_fp and res < settings.tol_res:
            trace.converged = True
            break
        if rel < settings.tol_fp and len(trace.residual) > 1 and res >= 0.5 * trace.residual[-2]:
            # the iteration has stopped moving; the residual floor is set by the grid
            raise NoContraction(f"fixed point reached but residual {res:.3e} stays above tol_res "
                                f"{settings.tol_res:g}; refine the grid", trace)
        streak = streak + 1 if (math.isfinite(ratio) and ratio > 1.0) else 0
        if streak >= settings.stall_steps:
            if theta / 2 < settings.min_damping:
                raise NoContraction(f"update grew for {streak} consecutive steps at damping {theta:g}", trace)
            theta /= 2
            streak = 0
            prev = None
            log.info("picard: no contraction, damping halved to %g", theta)
    if not trace.converged:
        raise NoContraction(f"no convergence in {settings.max_iter} iterations "
                            f"(relative update {trace.relative_update[-1]:.3e})", trace)
    sol = FlowSolution(v.grid, alpha, v.modes, info={"picard": trace.summary(), "ball": ball.manifest()})
    return sol, trace


@dataclass
class MultiStart:
    runs: dict[str, tuple[FlowSolution, IterationTrace]]
    gaps: dict[str, float]  # relative X0 distance of each run's limit from the zero-start limit

    @property
    def max_gap(self) -> float:
        return max(self.gaps.values(), default=0.0)


def perturbed_start(alpha: float, f: ForcingSpec, N: int, linear: LinearSettings | None = None,
                    scale: float = 1.5) -> FlowSolution:
    """scale times the linear solution plus the linear response to a displaced ring on modes 0..2.

    From the zero field the first Picard step is exactly the linear solution,
    so the zero and linear starts share one trajectory; this start does not.
    """
    size = max((f.mode_l2(n) for n in f.modes), default=0.0) or 1.0
    extra = gaussian_ring(f.grid, modes=(0, 1, 2), amplitude=0.5 * size, center=3.0)
    lin = solve_linear(alpha, f, N, linear)
    bump = solve_linear(alpha, extra, N, linear)
    return _pad(lin, N).combine(_pad(bump, N), scale, 1.0)


def multi_start(alpha: float, f: ForcingSpec, ball: BallSpec | None = None, *, N: int = 16,
                settings: PicardSettings | None = None, linear: LinearSettings | None = None) -> MultiStart:
    """Uniqueness probe: run from the zero field, the linear solution and a perturbed field."""
    starts = {"zero": "zero", "linear": "linear", "perturbed": perturbed_start(alpha, f, N, linear)}
    runs = {name: picard_solve(alpha, f, ball, N=N, settings=settings, linear=linear, start=s)
            for name, s in starts.items()}
    ref = runs["zero"][0]
    scale = max(norms(ref).x0_norm, 1e-300)
    gaps = {name: _x0_diff(sol, ref) / scale for name, (sol, _) in runs.items() if name != "zero"}
    return MultiStart(runs, gaps)


def axisym_gap(v: FlowSolution, v0_linear: ModeProfile) -> float:
    """sum_{|n|>=1} sup|P_n v| + sup|P_0 v - v0_linear|."""
    gap = (v.mode(0) - v0_linear.with_kind(v.mode(0).kind)).magnitude
    return float(gap + sum(p.magnitude for n, p in v.modes.items() if n != 0))


def linear_mode0(f: ForcingSpec) -> ModeProfile:
    return solve_mode0(np.real_if_close(f.mode(0)[1]), f.grid)


__all__ = ["BallSpec", "BallReport", "IterationTrace", "PicardSettings", "NonlinearTerm", "axisym_gap",
           "ball_quantities", "check_ball", "default_delta", "full_residual", "linear_mode0",
           "mixed_mode0_residual", "MultiStart", "multi_start", "perturbed_start", "nonlinear_G", "nonlinear_term", "picard_solve",
           "RotorflowError"]
