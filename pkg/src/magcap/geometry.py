"""Constant-curvature surfaces in a single conformal chart.

Every model surface (sphere, plane, hyperbolic plane) is realized on a planar
chart with metric ``g = rho**2 (dx**2 + dy**2)`` and conformal factor

    rho(x, y) = 1 / (1 + kappa (x**2 + y**2) / 4).

For ``kappa > 0`` this is stereographic projection of the sphere of radius
``1/sqrt(kappa)``, for ``kappa < 0`` the Poincare disc of radius
``2/sqrt(-kappa)``, and for ``kappa = 0`` the Euclidean plane.  The sphere is
covered by two such charts (``Chart.MAIN`` and ``Chart.ANTIPODAL``).

Trigonometric quantities that depend on ``sqrt(kappa)`` go through the
helpers :func:`sn`, :func:`cn`, :func:`tn` and :func:`atn`, which switch to a
power series in ``kappa * t**2`` near zero so that ``kappa = 0`` is not a
special case.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotClosing

KAPPA_MAX = 1e6
# chart swap radius in units of 1/sqrt(kappa); the equator sits at 2
SWAP_RADIUS = 2.5
_SERIES_CUTOFF = 1e-3


class Chart(enum.IntEnum):
    MAIN = 0
    ANTIPODAL = 1


@dataclass(frozen=True)
class ChartPoint:
    x: float
    y: float
    chart: Chart = Chart.MAIN

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class TangentVec:
    a: float
    b: float

    @property
    def c(self) -> complex:
        return complex(self.a, self.b)


@dataclass(frozen=True)
class Lattice:
    """Translation lattice of a flat torus, given by two generators."""

    e1: tuple
    e2: tuple

    def __post_init__(self):
        if abs(self.e1[0] * self.e2[1] - self.e1[1] * self.e2[0]) < 1e-300:
            raise ValueError("lattice generators are linearly dependent")


def check_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not math.isfinite(kappa) or abs(kappa) > KAPPA_MAX:
        raise DomainError(f"curvature {kappa!r} outside [-{KAPPA_MAX:g}, {KAPPA_MAX:g}]")
    return kappa


def _as_point(p) -> ChartPoint:
    if isinstance(p, ChartPoint):
        return p
    x, y = p
    return ChartPoint(float(x), float(y))


def _as_vec(w) -> TangentVec:
    if isinstance(w, TangentVec):
        return w
    a, b = w
    return TangentVec(float(a), float(b))


# -- kappa-uniform special functions ------------------------------------------

def _use_series(kappa, t):
    return abs(kappa) * float(np.max(np.square(t))) < _SERIES_CUTOFF


def sn(kappa, t):
    """sin(sqrt(kappa) t) / sqrt(kappa); sinh branch for kappa < 0, t at kappa = 0."""
    t = np.asarray(t, dtype=float)
    if _use_series(kappa, t):
        x = kappa * t * t
        return t * (1 - x / 6 * (1 - x / 20 * (1 - x / 42 * (1 - x / 72))))
    if kappa > 0:
        k = math.sqrt(kappa)
        return np.sin(k * t) / k
    k = math.sqrt(-kappa)
    return np.sinh(k * t) / k


def cn(kappa, t):
    """cos(sqrt(kappa) t); cosh branch for kappa < 0."""
    t = np.asarray(t, dtype=float)
    if _use_series(kappa, t):
        x = kappa * t * t
        return 1 - x / 2 * (1 - x / 12 * (1 - x / 30 * (1 - x / 56)))
    if kappa > 0:
        return np.cos(math.sqrt(kappa) * t)
    return np.cosh(math.sqrt(-kappa) * t)


def tn(kappa, t):
    """tan(sqrt(kappa) t) / sqrt(kappa); tanh branch for kappa < 0."""
    t = np.asarray(t, dtype=float)
    if _use_series(kappa, t):
        x = kappa * t * t
        return t * (1 + x / 3 + 2 * x**2 / 15 + 17 * x**3 / 315 + 62 * x**4 / 2835)
    if kappa > 0:
        k = math.sqrt(kappa)
        return np.tan(k * t) / k
    k = math.sqrt(-kappa)
    return np.tanh(k * t) / k


def atn(kappa, y):
    """arctan(sqrt(kappa) y) / sqrt(kappa); artanh branch for kappa < 0."""
    y = np.asarray(y, dtype=float)
    if _use_series(kappa, y):
        x = kappa * y * y
        return y * (1 - x / 3 + x**2 / 5 - x**3 / 7 + x**4 / 9)
    if kappa > 0:
        k = math.sqrt(kappa)
        return np.arctan(k * y) / k
    k = math.sqrt(-kappa)
    return np.arctanh(k * y) / k


# -- metric ---------------------------------------------------------------------

def rho(kappa, x, y):
    """Vectorized conformal factor without domain checks."""
    return 1.0 / (1.0 + 0.25 * kappa * (x * x + y * y))


def check_domain(kappa, p) -> ChartPoint:
    p = _as_point(p)
    kappa = check_kappa(kappa)
    if not (math.isfinite(p.x) and math.isfinite(p.y)):
        raise DomainError(f"non-finite chart point {p}")
    if p.chart == Chart.ANTIPODAL and kappa <= 0:
        raise DomainError("the antipodal chart exists only for kappa > 0")
    if kappa < 0 and p.x * p.x + p.y * p.y >= 4.0 / -kappa:
        raise DomainError(f"point {p} outside the disc of radius {2 / math.sqrt(-kappa):g}")
    return p


def conformal_factor(kappa: float, p) -> float:
    p = check_domain(kappa, p)
    return float(rho(kappa, p.x, p.y))


def metric_inner(kappa: float, p, w1, w2) -> float:
    r = conformal_factor(kappa, p)
    w1, w2 = _as_vec(w1), _as_vec(w2)
    return r * r * (w1.a * w2.a + w1.b * w2.b)


def metric_norm(kappa: float, p, w) -> float:
    return math.sqrt(metric_inner(kappa, p, w, w))


def rotate90(kappa: float, p, w) -> TangentVec:
    """Complex structure J: quarter turn, positively oriented with w."""
    check_domain(kappa, p)
    w = _as_vec(w)
    return TangentVec(-w.b, w.a)


def gauss_curvature(kappa: float, p, h: float = 1e-4) -> float:
    """Curvature -rho**-2 Laplacian(log rho) by central differences of step h."""
    p = check_domain(kappa, p)

    def logr(x, y):
        return math.log(rho(kappa, x, y))

    lap = (logr(p.x + h, p.y) + logr(p.x - h, p.y) + logr(p.x, p.y + h)
           + logr(p.x, p.y - h) - 4 * logr(p.x, p.y)) / (h * h)
    return -lap / rho(kappa, p.x, p.y) ** 2


# -- isometries, distance, exponential map --------------------------------------

def to_origin(kappa, p, z):
    """Isometry sending p to 0: z -> (z - p) / (1 + kappa conj(p) z / 4)."""
    return (z - p) / (1 + 0.25 * kappa * np.conj(p) * z)


def from_origin(kappa, p, zeta):
    """Inverse of :func:`to_origin`."""
    return (zeta + p) / (1 - 0.25 * kappa * np.conj(p) * zeta)


def distance(kappa: float, p, q) -> float:
    p = check_domain(kappa, p)
    q = check_domain(kappa, q)
    if q.chart != p.chart:
        q, _ = chart_transition(kappa, q, (0.0, 0.0))
    return float(distance_z(kappa, p.z, q.z))


def distance_z(kappa, p, q):
    """Vectorized distance between complex chart coordinates in a common chart."""
    num = 0.5 * np.abs(q - p)
    den = np.abs(1 + 0.25 * kappa * np.conj(p) * q)
    if kappa > 0 and not _use_series(kappa, num / np.maximum(den, 1e-300)):
        k = math.sqrt(kappa)
        return 2 * np.arctan2(k * num, den) / k
    return 2 * atn(kappa, num / den)


def exp_map(kappa: float, p, w) -> ChartPoint:
    """Endpoint of the unit-time geodesic from p with initial velocity w."""
    p = check_domain(kappa, p)
    w = _as_vec(w)
    zeta = rho(kappa, p.x, p.y) * w.c
    length = abs(zeta)
    if length == 0.0:
        return p
    if kappa > 0 and length >= math.pi / math.sqrt(kappa):
        warnings.warn(f"|w|_g = {length:g} beyond the injectivity radius "
                      f"{math.pi / math.sqrt(kappa):g}", RuntimeWarning, stacklevel=2)
    e = 2 * float(tn(kappa, 0.5 * length)) * zeta / length
    z = from_origin(kappa, p.z, e)
    return ChartPoint(z.real, z.imag, p.chart)


def rotate_chart(p, theta: float) -> ChartPoint:
    """Rotation about the chart origin, an isometry for every kappa."""
    p = _as_point(p)
    z = p.z * complex(math.cos(theta), math.sin(theta))
    return ChartPoint(z.real, z.imag, p.chart)


# -- geodesic circles -----------------------------------------------------------

def _check_radius(kappa, R):
    kappa = check_kappa(kappa)
    if not R > 0:
        raise ValueError(f"radius must be positive, got {R!r}")
    if kappa > 0 and R >= math.pi / math.sqrt(kappa):
        raise ValueError(f"radius {R:g} >= pi/sqrt(kappa) = {math.pi / math.sqrt(kappa):g}")
    return kappa


def circle_circumference(kappa: float, R: float) -> float:
    kappa = _check_radius(kappa, R)
    return float(2 * math.pi * sn(kappa, R))


def circle_curvature(kappa: float, R: float) -> float:
    kappa = _check_radius(kappa, R)
    return float(cn(kappa, R) / sn(kappa, R))


def radius_from_curvature(kappa: float, kg: float) -> float:
    kappa = check_kappa(kappa)
    if not kg > 0:
        raise ValueError(f"geodesic curvature must be positive, got {kg!r}")
    if kappa < 0 and kg <= math.sqrt(-kappa):
        raise NotClosing(f"curves of geodesic curvature {kg:g} <= sqrt(|kappa|) = "
                         f"{math.sqrt(-kappa):g} do not close up")
    return float(atn(kappa, 1.0 / kg))


# -- atlas and quotient ---------------------------------------------------------

def chart_transition(kappa: float, p, w):
    """Switch a sphere point and tangent vector to the other stereographic chart.

    The transition z -> -4/(kappa z) is holomorphic, so orientation (and the
    sign of the magnetic term) is the same in both charts.
    """
    kappa = check_kappa(kappa)
    if kappa <= 0:
        raise DomainError("chart transitions exist only for kappa > 0")
    p = _as_point(p)
    w = _as_vec(w)
    z = p.z
    if z == 0:
        raise DomainError("the chart origin has no image under the transition")
    z2 = -4.0 / (kappa * z)
    w2 = 4.0 / (kappa * z * z) * w.c
    other = Chart.ANTIPODAL if p.chart == Chart.MAIN else Chart.MAIN
    return ChartPoint(z2.real, z2.imag, other), TangentVec(w2.real, w2.imag)


def torus_project(p, lat: Lattice) -> ChartPoint:
    """Representative of p in the fundamental parallelogram spanned by lat."""
    p = _as_point(p)
    basis = np.array([lat.e1, lat.e2], dtype=float).T
    coef = np.linalg.solve(basis, [p.x, p.y])
    coef -= np.floor(coef)
    x, y = basis @ coef
    return ChartPoint(float(x), float(y), p.chart)
