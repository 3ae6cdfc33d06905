"""Numerical-evidence harness for the whole-space problem.

A radial shooting classifier integrates the first-order system equivalent to
the layer stack

    -Lap u_i = u_{i+1} (i < m-1),   -Lap u_{m-1} = u^p / r^a,

outward from origin data and classifies each trajectory: BlowUp, SignLoss of
some required-positive layer, or Survived to r_max. Scans over origin data
provide the empirical dichotomy (no all-positive survivors at critical or
super-critical order; the sub-critical bubble survives). The explicit bubble
profile and the kernel representation identity give independent validation
oracles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import IntegratorError
from .kernels import riesz_constant
from .numerics import surface_area
from .radial import (HardyHenonParams, PolyharmonicState, RadialField,
                     RadialGrid, weighted_cumulative)
from .rk import AdaptiveRK, StepRecord, hermite_crossing

DEFAULT_BLOW_THRESHOLD = 1e8
DEFAULT_SIGN_TOL = 1e-10
# below this amplitude a step-size underflow is an integrator fault, not a
# finite-radius blow-up
BLOWUP_AMPLITUDE_FLOOR = 1e6


class OutcomeKind(enum.Enum):
    BLOW_UP = "BlowUp"
    SIGN_LOSS = "SignLoss"
    SURVIVED = "Survived"


@dataclass(frozen=True)
class ShootingOutcome:
    """Classification of one outward radial trajectory.

    layer_index is 0 for u itself and i for the i-th iterated Laplacian.
    The optional trace holds the downsampled trajectory (radii and the full
    2m-dimensional state at accepted steps).
    """

    kind: OutcomeKind
    r_star: float
    layer_index: Optional[int] = None
    trace_r: Optional[np.ndarray] = None
    trace_y: Optional[np.ndarray] = None

    @property
    def trace(self) -> Optional[PolyharmonicState]:
        """Layer history as a PolyharmonicState, when enough samples exist."""
        if self.trace_r is None or self.trace_r.size < 32:
            return None
        grid = RadialGrid(self.trace_r, "trajectory")
        layers = tuple(RadialField(grid, self.trace_y[:, 2 * i])
                       for i in range(self.trace_y.shape[1] // 2))
        return PolyharmonicState(layers)

    def growth_fit(self) -> Optional[float]:
        """Quadratic-growth coefficient u(r)/r^2 at the trajectory end
        (reported for survivors in place of an o(r^2) test)."""
        if self.trace_r is None or self.trace_r.size == 0:
            return None
        r, u = self.trace_r[-1], self.trace_y[-1, 0]
        return u / r ** 2 if r > 0 else None


def _radial_rhs(params: HardyHenonParams):
    n, m, p, a = params.n, params.m, params.p, params.a
    nm1 = n - 1.0

    def rhs(r, y):
        dy = np.empty_like(y)
        dy[0::2] = y[1::2]
        src = np.empty(m)
        if m > 1:
            src[:m - 1] = y[0::2][1:]
        u = y[0]
        top = max(u, 0.0) ** p
        if a != 0.0:
            top *= r ** (-a)
        src[m - 1] = top
        dy[1::2] = -src - (nm1 / r) * y[1::2]
        return dy

    return rhs


def taylor_start(init: Sequence[float], params: HardyHenonParams,
                 r0: float) -> np.ndarray:
    """Second-order Taylor state at r0 from origin values of the layers.

    Uses u_i''(0) = -u_{i+1}(0)/n from the regularized Laplacian; the top
    layer integrates its source r^(-a) u(0)^p explicitly, which requires
    a < 2 (for a >= 2 the source is not integrable at the origin).
    """
    n, m, p, a = params.n, params.m, params.p, params.a
    if a >= 2.0:
        raise ValueError("origin data requires a < 2; start from r0 > 0 "
                         "with an explicit state instead")
    init = np.asarray(init, dtype=float)
    if init.shape != (m,):
        raise ValueError(f"need {m} origin values, got shape {init.shape}")
    y = np.empty(2 * m)
    for i in range(m - 1):
        y[2 * i] = init[i] - init[i + 1] * r0 ** 2 / (2.0 * n)
        y[2 * i + 1] = -init[i + 1] * r0 / n
    f0 = max(init[0], 0.0) ** p
    y[2 * m - 2] = init[m - 1] - f0 * r0 ** (2.0 - a) / ((2.0 - a) * (n - a))
    y[2 * m - 1] = -f0 * r0 ** (1.0 - a) / (n - a)
    return y


def _classify(params: HardyHenonParams, r0: float, y0: np.ndarray,
              r_max: float, rtol: float, atol: float, blow_threshold: float,
              sign_tol: float, keep_trace: bool,
              classify: bool = True) -> ShootingOutcome:
    m = params.m
    trace_r, trace_y = [r0], [y0.copy()]

    if classify:
        for i in range(m):
            if y0[2 * i] < -sign_tol:
                return ShootingOutcome(OutcomeKind.SIGN_LOSS, r0, i,
                                       np.array(trace_r), np.array(trace_y))
        if abs(y0[0]) >= blow_threshold:
            return ShootingOutcome(OutcomeKind.BLOW_UP, r0, None,
                                   np.array(trace_r), np.array(trace_y))

    result: dict = {}

    def callback(rec: StepRecord):
        trace_r.append(rec.t1)
        trace_y.append(rec.y1.copy())
        events = []
        if classify:
            for i in range(m):
                if rec.y1[2 * i] < -sign_tol:
                    t_star = hermite_crossing(
                        rec, lambda y, i=i: y[2 * i], -sign_tol)
                    events.append((t_star, OutcomeKind.SIGN_LOSS, i))
        # amplitude blow-up terminates even in pure tracking mode
        if rec.y1[0] > blow_threshold:
            t_star = hermite_crossing(rec, lambda y: y[0], blow_threshold)
            events.append((t_star, OutcomeKind.BLOW_UP, None))
        if events:
            events.sort(key=lambda e: e[0])
            result["event"] = events[0]
            return True
        return None

    integ = AdaptiveRK(_radial_rhs(params), rtol=rtol, atol=atol)
    try:
        integ.integrate(r0, y0, r_max, step_callback=callback)
    except IntegratorError as exc:
        r_fail, y_fail = exc.state
        if abs(y_fail[0]) > BLOWUP_AMPLITUDE_FLOOR:
            result["event"] = (r_fail, OutcomeKind.BLOW_UP, None)
        else:
            raise

    tr = np.asarray(trace_r)
    ty = np.asarray(trace_y)
    if tr.size > 600:
        keep = np.unique(np.linspace(0, tr.size - 1, 600).astype(int))
        tr, ty = tr[keep], ty[keep]
    if not keep_trace:
        tr = ty = None

    if "event" in result:
        t_star, kind, layer = result["event"]
        return ShootingOutcome(kind, t_star, layer, tr, ty)
    return ShootingOutcome(OutcomeKind.SURVIVED, r_max, None, tr, ty)


def shoot(init: Sequence[float], params: HardyHenonParams, r_max: float,
          r0: float = 1e-6, rtol: float = 1e-10, atol: float = 1e-12,
          blow_threshold: float = DEFAULT_BLOW_THRESHOLD,
          sign_tol: float = DEFAULT_SIGN_TOL,
          keep_trace: bool = True) -> ShootingOutcome:
    """Integrate outward from origin layer values and classify the fate."""
    if r_max <= r0:
        raise ValueError("r_max must exceed the starting radius")
    init = np.asarray(init, dtype=float)
    if init[0] <= 0.0:
        raise ValueError("origin value u(0) must be positive")
    y0 = taylor_start(init, params, r0)
    return _classify(params, r0, y0, r_max, rtol, atol, blow_threshold,
                     sign_tol, keep_trace)


def shoot_from(state: Sequence[float], r0: float, params: HardyHenonParams,
               r_max: float, rtol: float = 1e-10, atol: float = 1e-12,
               blow_threshold: float = DEFAULT_BLOW_THRESHOLD,
               sign_tol: float = DEFAULT_SIGN_TOL, keep_trace: bool = True,
               classify: bool = True) -> ShootingOutcome:
    """Integrate from an explicit full state (u_i, u_i') at r0 > 0.

    With classify=False the trajectory runs to r_max regardless of sign
    changes (used to track reference profiles such as the singular
    power-law solution, which has sign-changing layers).
    """
    if r0 <= 0.0:
        raise ValueError("shoot_from requires r0 > 0")
    y0 = np.asarray(state, dtype=float)
    if y0.shape != (2 * params.m,):
        raise ValueError(f"state must have length {2 * params.m}")
    return _classify(params, r0, y0, r_max, rtol, atol, blow_threshold,
                     sign_tol, keep_trace, classify=classify)


# ---------------------------------------------------------------------------
# Scanning
# ---------------------------------------------------------------------------

class ScanRecord(NamedTuple):
    init: tuple
    kind: str
    layer: Optional[int]
    r_star: float
    growth_fit: Optional[float]
    error: Optional[str]


@dataclass(frozen=True)
class ScanResult:
    params: HardyHenonParams
    r_max: float
    records: tuple

    @property
    def tally(self) -> dict:
        counts: dict = {k.value: 0 for k in OutcomeKind}
        counts["IntegratorFailure"] = 0
        for rec in self.records:
            if rec.error is not None:
                counts["IntegratorFailure"] += 1
            else:
                counts[rec.kind] += 1
        counts["cells"] = len(self.records)
        counts["all_positive_survivors"] = self.survivor_count
        return counts

    @property
    def survivor_count(self) -> int:
        return sum(1 for rec in self.records
                   if rec.kind == OutcomeKind.SURVIVED.value
                   and rec.error is None)

    def to_csv(self, fh) -> None:
        m = self.params.m
        cols = ",".join(f"init{i}" for i in range(m))
        fh.write(f"{cols},kind,layer,r_star,growth_fit\n")
        for rec in self.records:
            vals = ",".join(f"{v:.17g}" for v in rec.init)
            layer = "" if rec.layer is None else str(rec.layer)
            growth = "" if rec.growth_fit is None \
                else f"{rec.growth_fit:.17g}"
            kind = rec.kind if rec.error is None else "IntegratorFailure"
            fh.write(f"{vals},{kind},{layer},{rec.r_star:.17g},{growth}\n")


def _scan_cell(args):
    init, params, r_max, rtol, atol = args
    try:
        out = shoot(init, params, r_max, rtol=rtol, atol=atol,
                    keep_trace=True)
        growth = out.growth_fit() if out.kind is OutcomeKind.SURVIVED \
            else None
        return ScanRecord(tuple(init), out.kind.value, out.layer_index,
                          out.r_star, growth, None)
    except IntegratorError as exc:
        return ScanRecord(tuple(init), "IntegratorFailure", None,
                          math.nan, None, str(exc))


def scan(init_axes: Sequence[Sequence[float]], params: HardyHenonParams,
         r_max: float, rtol: float = 1e-10, atol: float = 1e-12,
         workers: int = 1) -> ScanResult:
    """Classify every cell of the Cartesian grid of origin data.

    `init_axes` gives one array of origin values per layer; cells with
    u(0) <= 0 are rejected up front. Individual integrator failures are
    recorded per cell, not raised.
    """
    axes = [np.asarray(ax, dtype=float) for ax in init_axes]
    if len(axes) != params.m:
        raise ValueError(f"need {params.m} axes, got {len(axes)}")
    if any(ax.size == 0 for ax in axes):
        return ScanResult(params, r_max, ())
    mesh = np.meshgrid(*axes, indexing="ij")
    cells = np.stack([g.ravel() for g in mesh], axis=1)
    if np.any(cells[:, 0] <= 0.0):
        raise ValueError("u(0) axis must be strictly positive")
    jobs = [(cells[i], params, r_max, rtol, atol)
            for i in range(cells.shape[0])]
    if workers > 1:
        import multiprocessing as mp
        with mp.Pool(workers) as pool:
            records = pool.map(_scan_cell, jobs, chunksize=16)
    else:
        records = [_scan_cell(job) for job in jobs]
    return ScanResult(params, r_max, tuple(records))


def reference_axes(params: HardyHenonParams,
                   n_u: int = 21, n_u1: int = 21) -> list:
    """The reference scan grid: u(0) in [0.1, 10], u1(0) in [-10, 10],
    higher layers pinned at 1."""
    axes = [np.linspace(0.1, 10.0, n_u)]
    if params.m > 1:
        axes.append(np.linspace(-10.0, 10.0, n_u1))
    for _ in range(2, params.m):
        axes.append(np.array([1.0]))
    return axes


# ---------------------------------------------------------------------------
# Validation oracles
# ---------------------------------------------------------------------------

def bubble_amplitude(n: int) -> float:
    return (n * (n - 2.0)) ** ((n - 2.0) / 4.0)


def bubble_oracle(n: int, grid: Optional[RadialGrid] = None) -> RadialField:
    """The explicit entire profile (n(n-2))^((n-2)/4) (1+r^2)^(-(n-2)/2),
    solving -Lap u = u^((n+2)/(n-2)) in R^n."""
    if n < 3:
        raise ValueError("bubble profile requires n >= 3")
    if grid is None:
        grid = RadialGrid.uniform(0.0, 10.0, 10001)
    amp = bubble_amplitude(n)
    return RadialField(grid, amp * (1.0 + grid.nodes ** 2)
                       ** (-(n - 2.0) / 2.0))


class RepresentationCheck(NamedTuple):
    potential_at_0: float
    direct: float
    tail_fraction: float
    truncated: bool


def _tail_power_fit(r, f):
    """Power-law fit f ~ c r^(-q) over the outer 20% of the grid; returns
    (c, q) or None when the tail is zero or not decaying."""
    mask = r >= 0.8 * r[-1]
    rw, fw = r[mask], f[mask]
    fmax = np.max(np.abs(f))
    if fmax == 0.0 or np.max(np.abs(fw)) <= 1e-13 * fmax:
        return None
    if np.any(fw <= 0.0):
        return None
    slope, intercept = np.polyfit(np.log(rw), np.log(fw), 1)
    q = -slope
    c = math.exp(intercept)
    return c, q


def representation_check(f: RadialField, n: int) -> RepresentationCheck:
    """Two routes to the potential of a radial source at the origin.

    potential_at_0 integrates the kernel directly:
        R_{2,n} |S^(n-1)| * int r f(r) dr.
    direct solves -Lap u = f by whole-line radial integration normalized to
    decay at infinity and reads u(0). Truncation beyond the grid is handled
    by a power-law tail fit and reported as a fraction of the value.
    """
    if n < 3:
        raise ValueError("representation check requires n >= 3")
    r = f.grid.nodes
    vals = f.values
    if r[0] > 0.0:
        raise ValueError("source grid must start at the origin")

    const = riesz_constant(2.0, n) * surface_area(n)

    # the first-moment integral is the n = 2 case of the weighted cumulative
    potential = const * float(weighted_cumulative(r, vals, 2)[-1])

    F = weighted_cumulative(r, vals, n)
    integrand = np.empty_like(F)
    integrand[0] = 0.0
    integrand[1:] = F[1:] * r[1:] ** (1 - n)
    outer = CubicSpline(r, integrand).antiderivative()
    R_g = r[-1]
    direct = float(outer(R_g) - outer(r[0]))
    # exact remainder for a source supported inside the grid
    direct += float(F[-1]) * R_g ** (2 - n) / (n - 2)

    tail_pot = 0.0
    truncated = False
    fit = _tail_power_fit(r, vals)
    if fit is not None:
        c, q = fit
        if q <= 2.05 or abs(q - n) < 1e-6:
            truncated = True
        else:
            tail_pot = const * c * R_g ** (2.0 - q) / (q - 2.0)
            potential += tail_pot
            direct += c * R_g ** (2.0 - q) / (n - q) \
                * (1.0 / (q - 2.0) - 1.0 / (n - 2.0))

    scale = max(abs(potential), abs(direct))
    tail_fraction = abs(tail_pot) / scale if scale > 0.0 else 0.0
    if tail_fraction > 0.01:
        truncated = True
    return RepresentationCheck(potential, direct, tail_fraction, truncated)
