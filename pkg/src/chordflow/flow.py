"""Explicit time stepping of the nonlocal Gauss curvature flow

    dh/dt = -f kappa / V_{q-1}(body, F(x)) + h

on the circle, with I_q renormalisation, trace monitors and the growth-law
fit used when renormalisation is off.
"""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .body import ConvexBody, body_from_support, rescale, symmetry_defect
from .chord import cone_chord_densities, target_chord_integral
from .errors import (DegenerateConvexityError, DomainError, FitError, ParameterError, StallError,
                     UnsupportedError)
from .riesz import vtilde_nodes
from .sphere import integrate

log = logging.getLogger(__name__)

DT_FLOOR = 1e-12
EVEN_TOL = 1e-10
TRACE_FIELDS = ("t", "Iq", "J", "hmin", "hmax", "bmin", "bmax", "residual")


@dataclass
class FlowConfig:
    """Flow parameters.  ``dt=None`` selects the adaptive policy with safety ``safety``."""

    q: float
    f: np.ndarray
    dt: float | None = None
    safety: float = 0.4
    dt_max: float = 1e-2
    t_max: float | None = None
    max_steps: int = 100_000
    tol: float = 1e-6
    renormalize: bool = True
    stride: int = 10
    directions: int | None = None
    even_f: bool = field(init=False)

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        if not self.q > 1.0:
            raise ParameterError(f"the flow needs q > 1, got {self.q}")
        if self.q <= 3.0:
            warnings.warn(f"q = {self.q} <= 3: convergence is only guaranteed for q > 3", stacklevel=2)
        if self.f.ndim != 1 or not np.all(np.isfinite(self.f)) or not np.all(self.f > 0.0):
            raise DomainError("f must be a positive field on the circle grid")
        if not 0.0 < self.safety <= 1.0:
            raise ParameterError("safety factor must lie in (0, 1]")
        if self.dt is not None and self.dt < 0.0:
            raise ParameterError("time step must be nonnegative")
        if self.max_steps < 0 or self.stride < 1:
            raise ParameterError("max_steps must be >= 0 and stride >= 1")
        n = self.f.size
        self.even_f = bool(n % 2 == 0 and np.max(np.abs(self.f - np.roll(self.f, -n // 2)))
                           <= EVEN_TOL * max(1.0, np.max(self.f)))
        if not self.even_f:
            warnings.warn("f is not even: the symmetric solver path and symmetry monitor are disabled",
                          stacklevel=2)


@dataclass(frozen=True)
class FlowState:
    body: ConvexBody
    t: float = 0.0
    step: int = 0


@dataclass
class FlowTrace:
    rows: list = field(default_factory=list)
    steps: int = 0

    def append(self, t, iq, j, body, residual):
        h, b = body.h, body.support.b
        if self.rows and not t > self.rows[-1][0]:
            raise ParameterError("trace timestamps must be strictly increasing")
        self.rows.append((float(t), float(iq), float(j), float(h.min()), float(h.max()),
                          float(b.min()), float(b.max()), float(residual)))

    def column(self, name: str) -> np.ndarray:
        k = TRACE_FIELDS.index(name)
        return np.array([r[k] for r in self.rows])

    def __len__(self):
        return len(self.rows)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_FIELDS)
            for r in self.rows:
                w.writerow([repr(v) for v in r])


def _require_planar(body: ConvexBody):
    if body.dim != 2:
        raise UnsupportedError("the flow stepper is implemented on the circle only")


def _check_f(body, config):
    if config.f.shape != (body.grid.size,):
        raise ParameterError("f must be sampled on the body grid")


def functional_J(body, f, grid=None) -> float:
    """Integral of f log h over the sphere."""
    if isinstance(body, ConvexBody):
        h, grid = body.h, body.grid
    else:
        h = np.asarray(body, dtype=float)
        if grid is None:
            raise ParameterError("a grid is needed with raw support values")
    if np.any(h <= 0.0):
        raise DomainError("log h needs a positive support function")
    return float(integrate(grid, np.asarray(f, dtype=float) * np.log(h)))


def chord_integral_for(body, q, vt):
    return float(integrate(body.grid, cone_chord_densities(body, q, vtilde=vt)))


def normalize_initial(body: ConvexBody, q: float, f) -> ConvexBody:
    """Dilate the body so that I_q equals 2q int f / ((q+n-1) omega_n)."""
    if not q > 1.0:
        raise ParameterError(f"normalisation needs q > 1, got {q}")
    f = np.asarray(f, dtype=float)
    if not np.all(f > 0.0):
        raise DomainError("f must be positive")
    target = target_chord_integral(q, f, body.grid)
    current = chord_integral_for(body, q, vtilde_nodes(body, q - 1.0))
    return rescale(body, (target / current) ** (1.0 / (body.dim + q - 1.0)))


def _velocity(body, config, vt):
    return body.h - config.f / (body.support.b * vt)


def velocity(body: ConvexBody, config: FlowConfig) -> np.ndarray:
    """dh/dt at every node."""
    _require_planar(body)
    _check_f(body, config)
    body.require_convex()
    return _velocity(body, config, vtilde_nodes(body, config.q - 1.0, directions=config.directions))


def adaptive_dt(body, config, v, vt) -> float:
    """Safety factor times the smaller of the curvature bound and the
    explicit-Euler limit for the linearised diffusion.

    The curvature bound alone, min b V/(f (1+|v|)), is far above the
    stability limit 2 / (D k_max^2) with D = f/(b^2 V) on fine grids.  Both
    grow without bound on an expanding body, hence the ``dt_max`` cap.
    """
    b = body.support.b
    curvature = np.min(b * vt / (config.f * (1.0 + np.abs(v))))
    kmax = body.grid.size // 2
    diffusion = 2.0 / (np.max(config.f / (b * b * vt)) * kmax**2)
    return float(min(config.safety * min(curvature, diffusion), config.dt_max))


def _symmetrize(h):
    return 0.5 * (h + np.roll(h, -h.size // 2))


def _advance(body, config, target, symmetric):
    """One Euler step.  Returns the new body, dt, and the monitors of the
    (renormalised) state the step started from."""
    q = config.q
    body.require_convex()
    vt = vtilde_nodes(body, q - 1.0, directions=config.directions)
    iq = chord_integral_for(body, q, vt)
    if config.renormalize:
        lam = (target / iq) ** (1.0 / (body.dim + q - 1.0))
        body = rescale(body, lam)
        vt = vt * lam ** (q - 1.0)
        iq = target
    v = _velocity(body, config, vt)
    dt = adaptive_dt(body, config, v, vt) if config.dt is None else float(config.dt)
    while True:
        h = body.h + dt * v
        if symmetric:
            h = _symmetrize(h)
        try:
            new = body_from_support(body.grid, h, symmetric=symmetric)
            new.require_convex()
            break
        except (DomainError, DegenerateConvexityError):
            dt *= 0.5
            if dt < DT_FLOOR:
                raise StallError("time step fell below 1e-12 keeping the body convex", None)
    monitors = {"body": body, "v": v, "vt": vt, "Iq": iq}
    return new, dt, monitors


def step(state: FlowState, config: FlowConfig, target: float | None = None) -> FlowState:
    """Advance the flow by one accepted explicit step."""
    _require_planar(state.body)
    _check_f(state.body, config)
    if config.dt == 0.0:
        return FlowState(state.body, state.t, state.step + 1)
    if target is None:
        target = target_chord_integral(config.q, config.f, state.body.grid)
    symmetric = config.even_f and state.body.support.symmetric
    new, dt, _ = _advance(state.body, config, target, symmetric)
    return FlowState(new, state.t + dt, state.step + 1)


def run(config: FlowConfig, initial: ConvexBody, trace_every_step: bool = False):
    """Iterate until max|dh/dt| / max h <= tol over three consecutive monitor
    samples, or until ``max_steps`` or time ``t_max`` is reached.

    Returns ``(final body, FlowTrace, status)`` with status one of
    ``converged``, ``max-steps``, ``stalled`` or ``convexity-lost``.
    """
    _require_planar(initial)
    _check_f(initial, config)
    target = target_chord_integral(config.q, config.f, initial.grid)
    symmetric = config.even_f and symmetry_defect(initial.grid, initial.h) <= EVEN_TOL * initial.max_h
    body = initial
    if symmetric:
        body = body_from_support(body.grid, _symmetrize(body.h), symmetric=True)
    trace = FlowTrace()
    t = 0.0
    quiet = 0
    stride = 1 if trace_every_step else config.stride
    status = "max-steps"
    for k in range(config.max_steps + 1):
        try:
            if k == config.max_steps or (config.t_max is not None and t >= config.t_max):
                # monitors of the final state only
                body.require_convex()
                vt = vtilde_nodes(body, config.q - 1.0, directions=config.directions)
                iq = chord_integral_for(body, config.q, vt)
                if config.renormalize:
                    lam = (target / iq) ** (1.0 / (body.dim + config.q - 1.0))
                    body, vt, iq = rescale(body, lam), vt * lam ** (config.q - 1.0), target
                mon = {"body": body, "v": _velocity(body, config, vt), "vt": vt, "Iq": iq}
                new = None
            else:
                new, dt, mon = _advance(body, config, target, symmetric)
        except StallError as exc:
            status = "stalled"
            log.warning("flow stalled at step %d: %s", k, exc)
            break
        except (DegenerateConvexityError, DomainError) as exc:
            status = "convexity-lost"
            log.warning("flow lost convexity at step %d: %s", k, exc)
            break
        cur = mon["body"]
        v = mon["v"]
        if k % stride == 0 or new is None:
            residual = np.max(np.abs(cur.support.b * mon["vt"] * v))
            trace.append(t, mon["Iq"], functional_J(cur, config.f), cur, residual)
            if k % config.stride == 0:
                quiet = quiet + 1 if np.max(np.abs(v)) / cur.max_h <= config.tol else 0
                log.debug("step %d t=%.6g max|v|=%.3e", k, t, np.max(np.abs(v)))
                if quiet >= 3:
                    body = cur
                    status = "converged"
                    break
        if new is None:
            body = cur
            break
        body = new
        t += dt
        trace.steps = k + 1
    return body, trace, status


def run_summary(trace: FlowTrace, status: str, steps: int) -> dict:
    """Run summary; the monitor entries are None when nothing was traced."""
    out = {"status": status, "steps": int(steps), "final_residual": None, "Iq_drift": None, "J_drop": None}
    if len(trace):
        iq = trace.column("Iq")
        j = trace.column("J")
        out["final_residual"] = float(trace.column("residual")[-1])
        out["Iq_drift"] = float(np.max(np.abs(iq - iq[0])) / abs(iq[0]))
        out["J_drop"] = float(j[0] - j[-1])
    return out


def chord_law_check(trace: FlowTrace, q: float, dim: int, target: float) -> float:
    """Slope of log|I_q - target| against t over the first decade of growth."""
    t = trace.column("t")
    gap = trace.column("Iq") - target
    if t.size < 3:
        raise FitError("trace is too short for a growth fit")
    if not np.all(np.isfinite(gap)) or np.any(np.abs(gap) <= np.finfo(float).tiny):
        raise FitError("chord-integral gap underflowed or is not finite")
    if np.any(np.sign(gap) != np.sign(gap[0])):
        raise FitError("chord-integral gap changes sign")
    g = np.abs(gap)
    grown = np.flatnonzero(g >= 10.0 * g[0])
    if grown.size == 0:
        raise FitError("gap never grows by a decade")
    end = int(grown[0]) + 1
    if end < 3:
        raise FitError("too few samples inside the first decade")
    slope, _ = np.polyfit(t[:end], np.log(g[:end]), 1)
    return float(slope)
