"""Dormand-Prince 5(4) stepper with PI step control and dense output.

Works on states of any array shape; arithmetic is elementwise.  A ``swap``
hook may rewrite the state after every accepted step (chart changes).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction as F

import numpy as np

from .errors import IntegrationError

C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# difference between the 5th- and 4th-order weights, FSAL stage last
E = np.array([-71 / 57600, 0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# continuous extension: weights b_i(theta) = sum_j P[i, j] theta**(j+1)
P = np.array([
    [1, F(-8048581381, 2820520608), F(8663915743, 2820520608), F(-12715105075, 11282082432)],
    [0, 0, 0, 0],
    [0, F(131558114200, 32700410799), F(-68118460800, 10900136933), F(87487479700, 32700410799)],
    [0, F(-1754552775, 470086768), F(14199869525, 1410260304), F(-10690763975, 1880347072)],
    [0, F(127303824393, 49829197408), F(-318862633887, 49829197408), F(701980252875, 199316789632)],
    [0, F(-282668133, 205662961), F(2019193451, 616988883), F(-1453857185, 822651844)],
    [0, F(40617522, 29380423), F(-110615467, 29380423), F(69997945, 29380423)],
], dtype=float)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
ALPHA = 0.7 / 5
BETA = 0.4 / 5


@dataclass
class Segment:
    """One accepted step with its dense interpolant."""

    t0: float
    t1: float
    y0: np.ndarray
    K: np.ndarray
    chart: np.ndarray

    def __call__(self, t):
        """State at time(s) t in [t0, t1]; array t adds a trailing axis."""
        h = self.t1 - self.t0
        theta = (np.asarray(t, dtype=float) - self.t0) / h
        powers = np.stack([theta, theta**2, theta**3, theta**4])
        weights = np.tensordot(P, powers, 1)  # (7, *t.shape)
        incr = np.tensordot(self.K, weights, axes=([0], [0]))  # (*y.shape, *t.shape)
        y0 = self.y0.reshape(self.y0.shape + (1,) * np.ndim(t))
        return y0 + h * incr


@dataclass
class Stats:
    steps: int = 0
    rejected_steps: int = 0
    chart_swaps: int = 0
    evaluations: int = 0


@dataclass
class DormandPrince:
    fun: object
    y0: np.ndarray
    t0: float
    t_end: float
    tol: float
    chart: np.ndarray = None
    swap: object = None
    check: object = None
    max_steps: int = 1_000_000
    stats: Stats = field(default_factory=Stats)

    def __post_init__(self):
        if not 1e-13 <= self.tol <= 1e-3:
            raise ValueError(f"tol must lie in [1e-13, 1e-3], got {self.tol!r}")
        self.y0 = np.array(self.y0, dtype=float)
        if self.chart is None:
            self.chart = np.zeros(self.y0.shape[1:], dtype=int)

    def _f(self, y):
        self.stats.evaluations += 1
        # trial stages may leave the chart; the step is then rejected
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return self.fun(y)

    def _norm(self, v, scale):
        return math.sqrt(float(np.mean(np.square(v / scale))))

    def _initial_step(self, y, f0):
        scale = self.tol + self.tol * np.abs(y)
        d0 = self._norm(y, scale)
        d1 = self._norm(f0, scale)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        f1 = self._f(y + h0 * f0)
        d2 = self._norm(f1 - f0, scale) / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1 / 5)
        return min(100 * h0, h1)

    def segments(self):
        """Yield accepted steps as :class:`Segment` objects until t_end."""
        t, y, chart = float(self.t0), self.y0.copy(), self.chart.copy()
        span = self.t_end - t
        if span <= 0:
            return
        f = self._f(y)
        h = min(self._initial_step(y, f), span)
        prev_norm = 1e-4
        rejected_last = False
        K = np.empty((7,) + y.shape)
        while t < self.t_end:
            if self.stats.steps + self.stats.rejected_steps >= self.max_steps:
                raise IntegrationError("maximum number of steps exceeded", t, y)
            if h < 10 * np.finfo(float).eps * max(1.0, abs(t)):
                raise IntegrationError(f"step size underflow at t={t:.17g}", t, y)
            h = min(h, self.t_end - t)
            K[0] = f
            for i in range(1, 6):
                K[i] = self._f(y + h * np.tensordot(A[i], K[:i], 1))
            y_new = y + h * np.tensordot(B, K[:6], 1)
            K[6] = self._f(y_new)
            err = h * np.tensordot(E, K, 1)
            scale = self.tol + self.tol * np.maximum(np.abs(y), np.abs(y_new))
            norm = self._norm(err, scale)
            if not math.isfinite(norm):
                norm = 1e10
            if norm > 1.0:
                self.stats.rejected_steps += 1
                h *= max(MIN_FACTOR, SAFETY * norm ** (-1 / 5))
                rejected_last = True
                continue
            if norm == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * norm ** (-ALPHA) * prev_norm ** BETA
                factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
            if rejected_last:
                factor = min(1.0, factor)
            prev_norm = max(norm, 1e-4)
            rejected_last = False
            t_new = self.t_end if self.t_end - (t + h) < 1e-14 * max(1.0, abs(t)) else t + h
            seg = Segment(t, t_new, y.copy(), K.copy(), chart.copy())
            self.stats.steps += 1
            t, y = t_new, y_new
            f = K[6]
            if self.check is not None:
                self.check(t, y)
            if self.swap is not None:
                y2, chart2, n = self.swap(y, chart)
                if n:
                    self.stats.chart_swaps += n
                    y, chart = y2, chart2
                    f = self._f(y)
            self.last_state = (t, y, chart)
            yield seg
            h *= factor
