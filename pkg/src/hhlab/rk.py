"""Embedded adaptive Runge-Kutta 5(4) stepper (Dormand-Prince pair).

Fifth-order propagation with fourth-order error estimate, PI-free step
control with rejection, and cubic Hermite dense output for event
localization. Self-contained so the shooting classifier does not share an
integration path with the solver-side oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import IntegratorError

# Dormand-Prince coefficients
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176,
              -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784,
                11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                -92097 / 339200, 187 / 2100, 1 / 40])
_ERR = _B5 - _B4


@dataclass
class StepRecord:
    """One accepted step with endpoint slopes for dense evaluation."""

    t0: float
    t1: float
    y0: np.ndarray
    y1: np.ndarray
    f0: np.ndarray
    f1: np.ndarray

    def eval(self, t):
        """Cubic Hermite interpolant on [t0, t1]."""
        h = self.t1 - self.t0
        s = (t - self.t0) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (h00 * self.y0 + h01 * self.y1
                + h * (h10 * self.f0 + h11 * self.f1))


def hermite_crossing(rec: StepRecord, component: Callable, level: float,
                     tol: float = 1e-13) -> float:
    """Locate where component(y(t)) crosses `level` inside a step, by
    bisection on the Hermite interpolant."""
    lo, hi = rec.t0, rec.t1
    glo = component(rec.y0) - level
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(mid)):
            return mid
        gm = component(rec.eval(mid)) - level
        if (glo <= 0.0) == (gm <= 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


class AdaptiveRK:
    """Adaptive Dormand-Prince 5(4) integrator with step rejection."""

    def __init__(self, rhs: Callable, rtol: float = 1e-8, atol: float = 1e-10,
                 max_steps: int = 500_000, h_min_factor: float = 1e-14):
        self.rhs = rhs
        self.rtol = rtol
        self.atol = atol
        self.max_steps = max_steps
        self.h_min_factor = h_min_factor

    def _step(self, t, y, h, f0):
        k = np.empty((7, y.size))
        k[0] = f0
        for i in range(1, 7):
            k[i] = self.rhs(t + _C[i] * h,
                            y + h * (_A[i] @ k[:i]))
        y1 = y + h * (_B5 @ k)
        err = h * (_ERR @ k)
        scale = self.atol + self.rtol * np.maximum(np.abs(y), np.abs(y1))
        err_norm = float(np.max(np.abs(err) / scale))
        return y1, k[6], err_norm

    def integrate(self, t0: float, y0, t_end: float,
                  step_callback: Optional[Callable] = None):
        """Integrate from t0 to t_end.

        `step_callback(rec)` is invoked after every accepted step; returning
        a non-None value stops integration and that value is returned.
        Raises IntegratorError on step-size underflow or step budget
        exhaustion; the current state is attached to the exception.
        """
        t = float(t0)
        y = np.asarray(y0, dtype=float).copy()
        f = self.rhs(t, y)
        h = min(1e-4 * max(abs(t), 1e-3), t_end - t)
        steps = 0
        while t < t_end:
            h = min(h, t_end - t)
            if h < self.h_min_factor * max(abs(t), 1e-30):
                exc = IntegratorError(f"step size underflow at r={t:.6g}")
                exc.state = (t, y.copy())
                raise exc
            y1, f1, err = self._step(t, y, h, f)
            steps += 1
            if steps > self.max_steps:
                exc = IntegratorError("step budget exhausted")
                exc.state = (t, y.copy())
                raise exc
            if not np.all(np.isfinite(y1)):
                h *= 0.25
                continue
            if err <= 1.0:
                rec = StepRecord(t, t + h, y, y1, f, f1)
                t, y, f = t + h, y1, f1
                if step_callback is not None:
                    out = step_callback(rec)
                    if out is not None:
                        return out
                h *= min(5.0, max(0.2, 0.9 * err ** -0.2 if err > 0 else 5.0))
            else:
                h *= max(0.2, 0.9 * err ** -0.2)
        return None
