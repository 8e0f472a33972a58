"""Fixed-step RKN integration: implicit stage solving by fixed-point
iteration, trajectory recording, reversibility and convergence studies.

Stage equations are solved either sequentially (exactly lower-triangular
a_bar: each stage is a scalar fixed point, solved once in index order) or by
Jacobi sweeps over all stages.  Summation order over stages is fixed
ascending, so repeated runs are bit-identical.  Scalar problems (dim 1)
bypass numpy in the hot loop; the two paths implement the same arithmetic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .cscoeff import build_order6
from .errors import DegenerateFitError, InvalidGridError, StageDivergenceError
from .problems import OdeProblem
from .quadrature import gauss_rule
from .tableau import RknTableau, discretize

#: Relative slack when checking that h divides the integration span.
GRID_RTOL = 1e-9


class StageStructure(enum.Enum):
    AUTO = "auto"
    FULL_IMPLICIT = "full-implicit"
    SEQUENTIAL_LOWER_TRIANGULAR = "sequential"


@dataclass(frozen=True)
class StepConfig:
    """Solver controls for one integration run; h is the step size."""

    h: float
    stage_tol: float = 1e-14
    max_iters: int = 100
    structure: StageStructure = StageStructure.AUTO

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0.0):
            raise ValueError("h must be positive and finite")
        if not (math.isfinite(self.stage_tol) and self.stage_tol > 0.0):
            raise ValueError("stage_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class Trajectory:
    """Sampled states of one integration run.

    times has shape (n,), q and p have shape (n, dim).  energy_error is
    H(p_k, q_k) - H(p_0, q_0) per sample when the problem has an energy
    function, else None.  diverged marks a run cut short by stage-solver
    failure at step index failure_step (1-based); the recorded samples end at
    the last completed step.
    """

    times: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    energy_error: Optional[np.ndarray] = field(repr=False, default=None)
    diverged: bool = False
    failure_step: Optional[int] = None

    def __post_init__(self):
        n = len(self.times)
        if self.q.shape[0] != n or self.p.shape[0] != n:
            raise ValueError("times, q, p must have equal lengths")
        if self.energy_error is not None and len(self.energy_error) != n:
            raise ValueError("energy_error length mismatch")
        if n > 1 and not np.all(np.diff(self.times) > 0.0):
            raise ValueError("times must be strictly increasing")


def _use_sequential(t: RknTableau, structure: StageStructure) -> bool:
    if structure is StageStructure.SEQUENTIAL_LOWER_TRIANGULAR:
        if not t.lower_triangular:
            raise ValueError(
                "sequential structure requested but a_bar is not lower triangular"
            )
        return True
    if structure is StageStructure.AUTO:
        return t.lower_triangular
    return False


def _stages_scalar(c, a, s, f, t0, q0, p0, h, conv, iters, sequential):
    """Scalar stage solve; returns (Q, F) as lists of floats."""
    h2 = h * h
    Q = [0.0] * s
    F = [0.0] * s
    if sequential:
        for i in range(s):
            ti = t0 + c[i] * h
            ai = a[i]
            base = q0 + h * c[i] * p0
            acc = 0.0
            for j in range(i):
                acc += ai[j] * F[j]
            base += h2 * acc
            w = h2 * ai[i]
            if w == 0.0:
                qi = base
            else:
                qi = q0 + h * c[i] * p0
                diff = math.inf
                for _ in range(iters):
                    qn = base + w * f(ti, qi)
                    diff = abs(qn - qi)
                    qi = qn
                    if diff < conv:
                        break
                else:
                    raise StageDivergenceError(
                        f"stage {i} did not contract (last increment {diff:.3e})",
                        residual=diff,
                    )
            Q[i] = qi
            F[i] = f(ti, qi)
        return Q, F
    times = [t0 + c[i] * h for i in range(s)]
    base = [q0 + h * c[i] * p0 for i in range(s)]
    Q = base[:]
    F = [f(times[i], Q[i]) for i in range(s)]
    diff = math.inf
    for _ in range(iters):
        diff = 0.0
        Qn = [0.0] * s
        for i in range(s):
            ai = a[i]
            acc = 0.0
            for j in range(s):
                acc += ai[j] * F[j]
            qn = base[i] + h2 * acc
            d = abs(qn - Q[i])
            if d > diff:
                diff = d
            Qn[i] = qn
        Q = Qn
        for i in range(s):
            F[i] = f(times[i], Q[i])
        if diff < conv:
            return Q, F
    raise StageDivergenceError(
        f"stages did not contract in {iters} sweeps (last increment {diff:.3e})",
        residual=diff,
    )


def _stages_array(t, f, t0, q0, p0, h, conv, iters, sequential):
    """Vector stage solve; returns (Q, F) as (s, d) arrays."""
    s = t.s
    c = t.c
    a = t.a_bar
    h2 = h * h
    times = t0 + c * h
    base = q0[None, :] + (h * c)[:, None] * p0[None, :]
    if sequential:
        Q = np.zeros_like(base)
        F = np.zeros_like(base)
        for i in range(s):
            bi = base[i] + h2 * (a[i, :i] @ F[:i])
            w = h2 * a[i, i]
            if w == 0.0:
                qi = bi
            else:
                qi = base[i].copy()
                diff = math.inf
                for _ in range(iters):
                    qn = bi + w * f(times[i], qi)
                    diff = float(np.abs(qn - qi).max())
                    qi = qn
                    if diff < conv:
                        break
                else:
                    raise StageDivergenceError(
                        f"stage {i} did not contract (last increment {diff:.3e})",
                        residual=diff,
                    )
            Q[i] = qi
            F[i] = f(times[i], qi)
        return Q, F
    Q = base.copy()
    F = np.array([f(times[i], Q[i]) for i in range(s)])
    diff = math.inf
    for _ in range(iters):
        Qn = base + h2 * (a @ F)
        diff = float(np.abs(Qn - Q).max())
        Q = Qn
        F = np.array([f(times[i], Q[i]) for i in range(s)])
        if diff < conv:
            return Q, F
    raise StageDivergenceError(
        f"stages did not contract in {iters} sweeps (last increment {diff:.3e})",
        residual=diff,
    )


def _advance(t, f, t0, q0, p0, h, stage_tol, max_iters, sequential):
    """One step of signed size h; scalar or vector depending on q0."""
    if np.ndim(q0) == 0:
        conv = stage_tol * (1.0 + abs(q0))
        c = t.c.tolist()
        a = t.a_bar.tolist()
        Q, F = _stages_scalar(
            c, a, t.s, f, t0, float(q0), float(p0), h, conv, max_iters, sequential
        )
        h2 = h * h
        accq = 0.0
        accp = 0.0
        b_bar = t.b_bar
        b = t.b
        for i in range(t.s):
            accq += b_bar[i] * F[i]
            accp += b[i] * F[i]
        return q0 + h * p0 + h2 * accq, p0 + h * accp
    q0 = np.asarray(q0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    conv = stage_tol * (1.0 + float(np.abs(q0).max()))
    Q, F = _stages_array(t, f, t0, q0, p0, h, conv, max_iters, sequential)
    q1 = q0 + h * p0 + h * h * (t.b_bar @ F)
    p1 = p0 + h * (t.b @ F)
    return q1, p1


def solve_stages(t: RknTableau, f, t0, q0, p0, cfg: StepConfig):
    """Stage values Q_i = q0 + h c_i p0 + h^2 sum_j a_bar[i,j] f(t_j, Q_j).

    Returns an (s,) array for scalar state, else an (s, dim) array.  Solved
    by fixed-point iteration from the free-motion guess Q_i = q0 + h c_i p0;
    non-contraction raises a stage-divergence error carrying the last
    increment.
    """
    sequential = _use_sequential(t, cfg.structure)
    h = cfg.h
    if np.ndim(q0) == 0:
        conv = cfg.stage_tol * (1.0 + abs(q0))
        Q, _ = _stages_scalar(
            t.c.tolist(),
            t.a_bar.tolist(),
            t.s,
            f,
            t0,
            float(q0),
            float(p0),
            h,
            conv,
            cfg.max_iters,
            sequential,
        )
        return np.array(Q)
    q0 = np.asarray(q0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    conv = cfg.stage_tol * (1.0 + float(np.abs(q0).max()))
    Q, _ = _stages_array(t, f, t0, q0, p0, h, conv, cfg.max_iters, sequential)
    return Q


def step(t: RknTableau, f, t0, q0, p0, cfg: StepConfig):
    """One step of size cfg.h from (q0, p0); returns (q1, p1)."""
    sequential = _use_sequential(t, cfg.structure)
    return _advance(
        t, f, t0, q0, p0, cfg.h, cfg.stage_tol, cfg.max_iters, sequential
    )


def _step_count(span: float, h: float) -> int:
    if span < 0.0:
        raise InvalidGridError("t_end must not precede t0")
    if span == 0.0:
        return 0
    n = int(round(span / h))
    if n < 1 or abs(n * h - span) > GRID_RTOL * max(1.0, abs(span)):
        raise InvalidGridError(
            f"step size {h!r} does not divide the span {span!r} "
            "into an integer number of steps"
        )
    return n


def integrate(
    t: RknTableau,
    prob: OdeProblem,
    t_end: float,
    cfg: StepConfig,
    sample_every: int = 1,
) -> Trajectory:
    """March from prob.t0 to t_end in steps of cfg.h, sampling states.

    Records the initial state, every sample_every-th step, and the final
    step.  (t_end - t0)/h must be a nonnegative integer to grid tolerance.
    On stage divergence mid-run the trajectory collected so far is returned
    with diverged=True and the 1-based index of the failed step.
    """
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    n = _step_count(t_end - prob.t0, cfg.h)
    sequential = _use_sequential(t, cfg.structure)
    scalar = np.ndim(prob.q0) == 0
    f = prob.force
    h = cfg.h
    t0 = prob.t0
    q, p = (float(prob.q0), float(prob.p0)) if scalar else (
        np.asarray(prob.q0, dtype=float),
        np.asarray(prob.p0, dtype=float),
    )
    times = [t0]
    qs = [q]
    ps = [p]
    diverged = False
    failure_step = None
    for k in range(1, n + 1):
        try:
            q, p = _advance(
                t, f, t0 + (k - 1) * h, q, p, h, cfg.stage_tol,
                cfg.max_iters, sequential,
            )
        except StageDivergenceError:
            diverged = True
            failure_step = k
            break
        if k % sample_every == 0 or k == n:
            times.append(t0 + k * h)
            qs.append(q)
            ps.append(p)
    dim = prob.dim
    q_arr = np.array(qs, dtype=float).reshape(len(qs), dim)
    p_arr = np.array(ps, dtype=float).reshape(len(ps), dim)
    energy_error = None
    if prob.energy is not None:
        H = prob.energy
        if scalar:
            e0 = H(float(prob.p0), float(prob.q0))
            energy_error = np.array(
                [H(ps[k], qs[k]) - e0 for k in range(len(qs))]
            )
        else:
            e0 = H(np.asarray(prob.p0, float), np.asarray(prob.q0, float))
            energy_error = np.array(
                [H(p_arr[k], q_arr[k]) - e0 for k in range(len(qs))]
            )
    return Trajectory(
        np.array(times), q_arr, p_arr, energy_error, diverged, failure_step
    )


def reversibility_test(
    t: RknTableau, prob: OdeProblem, h: float, cfg: Optional[StepConfig] = None
) -> float:
    """Deviation of the map from rho-reversibility, rho: (p, q) -> (-p, q).

    Computes z1 = Phi_h(q0, p0), z2 = Phi_h(rho z1) and returns
    max-norm(rho z2 - (q0, p0)); zero exactly for reversible maps applied to
    a reversible problem.
    """
    base = cfg or StepConfig(h=h)
    run = replace(base, h=h)
    f = prob.force
    q0, p0 = prob.q0, prob.p0
    q1, p1 = step(t, f, prob.t0, q0, p0, run)
    q2, p2 = step(t, f, prob.t0, q1, -p1, run)
    if np.ndim(q0) == 0:
        return max(abs(q2 - q0), abs(-p2 - p0))
    return float(
        max(np.abs(q2 - np.asarray(q0)).max(), np.abs(-p2 - np.asarray(p0)).max())
    )


def reference_tableau() -> RknTableau:
    """The order-6 Gauss-3 method used as the default study reference."""
    return discretize(build_order6(0.0), gauss_rule(3), label="order6-gauss3")


def reference_state(
    prob: OdeProblem,
    t_end: float,
    h_ref: float,
    cfg: Optional[StepConfig] = None,
):
    """High-accuracy state at t_end: exact when available, else order-6 run.

    The nominal h_ref is shrunk to the nearest exact divisor of the span, so
    callers may pass min(h)/20 without worrying about grid alignment.
    """
    if prob.exact is not None:
        return prob.exact(t_end)
    span = t_end - prob.t0
    if span == 0.0:
        return prob.q0, prob.p0
    if span < 0.0:
        raise InvalidGridError("t_end must not precede t0")
    n = max(1, int(math.ceil(span / h_ref - GRID_RTOL)))
    base = cfg or StepConfig(h=span / n)
    run = replace(base, h=span / n)
    traj = integrate(reference_tableau(), prob, t_end, run)
    if traj.diverged:
        raise StageDivergenceError(
            "reference integration diverged", step_index=traj.failure_step
        )
    if prob.dim == 1 and np.ndim(prob.q0) == 0:
        return float(traj.q[-1, 0]), float(traj.p[-1, 0])
    return traj.q[-1], traj.p[-1]


@dataclass(frozen=True)
class ErrorStudy:
    """Global errors against a fixed reference, with log-log slope."""

    h: np.ndarray
    error: np.ndarray
    slope: float
    reference: str

    def rows(self):
        return list(zip(self.h.tolist(), self.error.tolist()))


def fit_loglog_slope(h_values, errors) -> float:
    """Least-squares slope of log(error) against log(h).

    Zero errors cannot be log-fitted and are dropped; fewer than two distinct
    usable step sizes is a degenerate fit.
    """
    pts = [
        (float(h), float(e))
        for h, e in zip(h_values, errors)
        if e > 0.0 and math.isfinite(e)
    ]
    if len({h for h, _ in pts}) < 2:
        raise DegenerateFitError("slope fit needs at least 2 distinct step sizes")
    lh = np.log([h for h, _ in pts])
    le = np.log([e for _, e in pts])
    return float(np.polyfit(lh, le, 1)[0])


def linear_drift_slope(times, values) -> float:
    """Ordinary least-squares slope of values against times."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(np.unique(t)) < 2:
        raise DegenerateFitError("drift fit needs at least 2 distinct times")
    return float(np.polyfit(t, v, 1)[0])


def global_error_study(
    t: RknTableau,
    prob: OdeProblem,
    t_end: float,
    h_list,
    cfg: Optional[StepConfig] = None,
    reference=None,
) -> ErrorStudy:
    """Global error at t_end per step size, with fitted convergence slope.

    reference overrides the (q_ref, p_ref) state; otherwise the problem's
    exact solution is used when present, else an order-6 Gauss-3 run at
    min(h)/20.  Errors are max-norm over the concatenated (q, p) deviation.
    Results are sorted by decreasing h.
    """
    hs = sorted({float(h) for h in h_list}, reverse=True)
    if len(hs) < 2:
        raise DegenerateFitError("study needs at least 2 distinct step sizes")
    if reference is None:
        label = "exact" if prob.exact is not None else "order6-gauss3"
        q_ref, p_ref = reference_state(prob, t_end, min(hs) / 20.0, cfg)
    else:
        label = "supplied"
        q_ref, p_ref = reference
    q_ref = np.atleast_1d(np.asarray(q_ref, dtype=float))
    p_ref = np.atleast_1d(np.asarray(p_ref, dtype=float))
    errors = []
    for h in hs:
        base = cfg or StepConfig(h=h)
        traj = integrate(t, prob, t_end, replace(base, h=h))
        if traj.diverged:
            raise StageDivergenceError(
                f"integration at h={h!r} diverged",
                step_index=traj.failure_step,
            )
        dq = np.abs(traj.q[-1] - q_ref).max()
        dp = np.abs(traj.p[-1] - p_ref).max()
        errors.append(float(max(dq, dp)))
    slope = fit_loglog_slope(hs, errors)
    return ErrorStudy(np.array(hs), np.array(errors), slope, label)
