"""Orbit diagnostics: return times, circle geometry, swept area, escape."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq, minimize_scalar

from . import geometry as geo
from .dynamics import (CIRCLE_ACTION, KINETIC, MagneticSystem, PhaseState, Trajectory,
                       _as_state, _energy, _lorentz, flow_rhs, h_of_energy, integrate,
                       kinetic_energy, make_stepper, period_of_energy, to_chart)
from .errors import IntegrationError, WeakField
from .geometry import ChartPoint

SCAN_PER_PERIOD = 200


@dataclass(frozen=True)
class ReturnReport:
    period: float
    closure_error: float
    converged: bool
    candidates_checked: int
    reason: str = ""


@dataclass(frozen=True)
class CircleFit:
    center: ChartPoint
    radius: float
    max_radial_residual: float


@dataclass(frozen=True)
class EscapeReport:
    max_distance: float
    min_return_after_transient: float
    escaped: bool


def estimated_period(sys: MagneticSystem, st, kind=KINETIC) -> float | None:
    """Closed-form period of the orbit through st when one is known."""
    E = kinetic_energy(sys, st)
    strong = sys.s * sys.s + 2 * sys.kappa * E > 0
    if kind.name == "kinetic":
        if strong:
            return 2 * math.pi / math.sqrt(sys.s * sys.s + 2 * sys.kappa * E)
        return None
    if kind.name == "circle":
        return 1.0
    fp = float(kind.profile.derivative(h_of_energy(sys, E)))
    return 1.0 / fp if fp > 0 else math.inf


def first_return(sys: MagneticSystem, st0, kind=KINETIC, tol: float = 1e-10,
                 t_max: float | None = None, closure_tol: float = 1e-6) -> ReturnReport:
    """Smallest t in (0, t_max] with flow_t(st0) = st0.

    The phase distance to st0 is scanned at a spacing of 1/200 of the expected
    period; every sampled local minimum below a coarse threshold is refined on
    the dense interpolant, and the first one closing within ``closure_tol`` is
    reported.  ``tol`` is both the integrator tolerance and the width of the
    refinement bracket.
    """
    st0 = _as_state(st0)
    T_est = estimated_period(sys, st0, kind)
    y0 = st0.as_array()
    field0 = flow_rhs(sys, kind)(y0[:, None])[:, 0]
    speed = float(np.linalg.norm(field0))
    if speed == 0.0 or T_est == math.inf:
        raise ValueError("first_return needs a non-stationary initial state")
    if T_est is None:
        # no closed form: scan at the gyration scale
        T_est = 2 * math.pi / max(abs(sys.s), 1e-300)
    if t_max is None:
        t_max = 2.5 * T_est
    dt = T_est / SCAN_PER_PERIOD
    coarse = max(4.0 * speed * dt, 10.0 * closure_tol)
    target = int(st0.chart)

    segments, ends = [], []

    def state_at(t):
        seg = segments[min(bisect.bisect_left(ends, t), len(segments) - 1)]
        y = seg(t)[:, 0]
        return to_chart(sys.kappa, y[:, None], seg.chart, target)[:, 0]

    def dist2(t):
        return float(np.sum((state_at(t) - y0) ** 2))

    rhs = flow_rhs(sys, kind)

    def slope(t):
        # half the time derivative of dist2, with the field taken in st0's chart
        y = state_at(t)
        return float((y - y0) @ rhs(y[:, None])[:, 0])

    hist_t, hist_d = [0.0], [0.0]
    candidates, best = 0, math.inf
    next_k = 1
    stepper = make_stepper(sys, y0[:, None], [target], kind, t_max, tol)
    try:
        for seg in stepper.segments():
            segments.append(seg)
            ends.append(seg.t1)
            k_end = int(math.floor(seg.t1 / dt + 1e-12))
            if k_end < next_k:
                continue
            ts = dt * np.arange(next_k, k_end + 1)
            ys = to_chart(sys.kappa, seg(ts)[:, 0, :], seg.chart[0], target)
            ds = np.linalg.norm(ys - y0[:, None], axis=0)
            next_k = k_end + 1
            for t, d in zip(ts, ds):
                hist_t.append(float(t))
                hist_d.append(float(d))
                if len(hist_d) < 3:
                    continue
                dm2, dm1, d0 = hist_d[-3:]
                if not (dm1 < dm2 and dm1 <= d0 and dm1 < coarse):
                    continue
                candidates += 1
                t_ret = _refine_minimum(dist2, slope, hist_t[-3], hist_t[-1], tol)
                err = math.sqrt(dist2(t_ret))
                best = min(best, err)
                if err <= closure_tol:
                    return ReturnReport(t_ret, err, True, candidates)
    except IntegrationError as exc:
        return ReturnReport(math.nan, best, False, candidates, f"integration stopped: {exc}")
    return ReturnReport(math.nan, best, False, candidates, f"no return within t_max={t_max:g}")


def _refine_minimum(dist2, slope, a, b, tol):
    """Minimizer of dist2 on [a, b], located as the sign change of its derivative.

    Minimizing dist2 directly stalls at sqrt(machine eps) relative precision
    because dist2 is flat at its minimum; the derivative crosses zero linearly.
    """
    ga, gb = slope(a), slope(b)
    if ga < 0 < gb:
        return float(brentq(slope, a, b, xtol=tol, rtol=4 * np.finfo(float).eps))
    res = minimize_scalar(dist2, bounds=(a, b), method="bounded", options={"xatol": tol})
    return float(res.x)


# -- curvature and circle fits ----------------------------------------------------

def measure_geodesic_curvature(sys: MagneticSystem, traj: Trajectory) -> float:
    """Mean of |D_t v|_g / |v|_g**2 along a kinetic trajectory.

    The time derivative of the velocity components uses the fourth-order
    central stencil on equispaced samples; the covariant correction uses the
    Christoffel symbols of the conformal metric.
    """
    if len(traj) < 20:
        raise ValueError("need at least 20 samples")
    dts = np.diff(traj.times)
    h = float(dts[0])
    if not np.allclose(dts, h, rtol=1e-9, atol=0):
        raise ValueError("trajectory samples must be equispaced")
    Y = traj.states
    ch = traj.charts
    k = sys.kappa
    vals = []
    for i in range(2, len(Y) - 2):
        if np.any(ch[i - 2:i + 3] != ch[i]):
            continue
        x, y, u, w = Y[i]
        du = (-Y[i + 2, 2] + 8 * Y[i + 1, 2] - 8 * Y[i - 1, 2] + Y[i - 2, 2]) / (12 * h)
        dw = (-Y[i + 2, 3] + 8 * Y[i + 1, 3] - 8 * Y[i - 1, 3] + Y[i - 2, 3]) / (12 * h)
        r = geo.rho(k, x, y)
        px, py = -0.5 * k * r * x, -0.5 * k * r * y
        ax = du + px * (u * u - w * w) + 2 * py * u * w
        ay = dw + py * (w * w - u * u) + 2 * px * u * w
        v2 = u * u + w * w
        if r * r * v2 < 1e-24:
            raise ValueError("degenerate trajectory: speed is zero")
        vals.append(math.hypot(ax, ay) / (r * v2))
    if not vals:
        raise ValueError("no sample window lies within a single chart")
    return float(np.mean(vals))


def fit_geodesic_circle(sys: MagneticSystem, traj: Trajectory, closure_tol: float = 1e-6) -> CircleFit:
    """Center and radius of a closed kinetic orbit sampled over one period.

    The center lies on the geodesic leaving the start point along the inward
    normal; its distance R0 is fixed by requiring that the start point and the
    half-period point be equidistant from it.
    """
    k = sys.kappa
    st0 = PhaseState.from_array(traj.states[0], traj.charts[0])
    pts = traj.in_chart(sys, st0.chart)
    if np.linalg.norm(pts[-1] - pts[0]) > closure_tol:
        raise ValueError("trajectory is not closed; sample exactly one period")
    T = float(traj.times[-1] - traj.times[0])
    half = integrate(sys, st0, KINETIC, T / 2, traj.tol, t_eval=np.array([0.0, T / 2])).final
    half_z = complex(*to_chart(k, half.as_array()[:, None], int(half.chart), int(st0.chart))[:2, 0])
    p0 = st0.point
    r0 = geo.rho(k, st0.x, st0.y)
    vlen = math.hypot(st0.u, st0.w)
    if vlen == 0 or sys.s == 0:
        raise ValueError("orbit is a fixed point or a geodesic, not a circle")
    sgn = math.copysign(1.0, sys.s)
    normal = geo.TangentVec(-sgn * st0.w / (r0 * vlen), sgn * st0.u / (r0 * vlen))

    def center(R):
        return geo.exp_map(k, p0, geo.TangentVec(R * normal.a, R * normal.b))

    def gap(R):
        return float(geo.distance_z(k, center(R).z, half_z)) - R

    D = float(geo.distance_z(k, p0.z, half_z))
    R0 = brentq(gap, 1e-9 * D, D, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    c = center(R0)
    d = geo.distance_z(k, c.z, pts[:, 0] + 1j * pts[:, 1])
    radius = float(np.mean(d))
    return CircleFit(c, radius, float(np.max(np.abs(d - radius))))


# -- swept symplectic area -------------------------------------------------------

def _omega_batch(kappa, s, Y, A, B):
    """omega_s(A, B) at states Y; all arrays of shape (4, ...)."""
    x, y, u, w = Y
    r = geo.rho(kappa, x, y)
    r2 = r * r
    c = -kappa * r2 * r * (w * x - u * y) - s * r2
    return (r2 * (A[2] * B[0] - A[0] * B[2] + A[3] * B[1] - A[1] * B[3])
            + c * (A[0] * B[1] - A[1] * B[0]))


def swept_symplectic_area(sys: MagneticSystem, E_target: float, n_tau: int = 256,
                          n_t: int = 256, tol: float = 1e-11) -> float:
    """Symplectic area of the cylinder u(tau, t) = Phi_H^t(gamma(tau)).

    gamma is the radial fiber path over the chart origin from the zero
    section to kinetic energy E_target, and Phi_H the period-one circle
    action.  Partial derivatives are central differences on the grid and the
    integral is a trapezoidal sum, so the result converges to h(E_target) at
    second order in the grid spacing.
    """
    if n_tau < 32 or n_t < 32:
        raise ValueError("grid sizes must be at least 32")
    if E_target < 0:
        raise ValueError("target energy must be non-negative")
    if sys.s == 0 or sys.s * sys.s + 2 * sys.kappa * E_target <= 0:
        raise WeakField(sys.kappa, sys.s, energy=E_target)
    if E_target == 0:
        return 0.0
    vmax = math.sqrt(2 * E_target)
    tau = np.linspace(0.0, 1.0, n_tau + 1)
    ts = np.linspace(0.0, 1.0, n_t + 1)
    y0 = np.zeros((4, n_tau + 1))
    y0[2] = tau * vmax
    stepper = make_stepper(sys, y0, np.zeros(n_tau + 1, dtype=int), CIRCLE_ACTION, 1.0, tol)
    U = np.empty((4, n_tau + 1, n_t + 1))
    U[:, :, 0] = y0
    i = 1
    for seg in stepper.segments():
        j = int(np.searchsorted(ts, seg.t1, side="right"))
        if j > i:
            U[:, :, i:j] = to_chart(sys.kappa, seg(ts[i:j]), seg.chart[:, None], 0)
            i = j
    U = U[:, :, :n_t]  # t = 1 repeats t = 0
    dt = 1.0 / n_t
    dU_dt = (np.roll(U, -1, axis=2) - np.roll(U, 1, axis=2)) / (2 * dt)
    dU_dtau = np.gradient(U, tau, axis=1, edge_order=2)
    integrand = _omega_batch(sys.kappa, sys.s, U, dU_dtau, dU_dt)
    inner = integrand.mean(axis=1)  # periodic trapezoid in t
    return float(trapezoid(inner, tau))


# -- hyperbolic escape ----------------------------------------------------------

def escape_witness(sys: MagneticSystem, st0, horizon: float = 50.0, return_threshold: float = 0.1,
                   transient: float | None = None, tol: float = 1e-10,
                   n_samples: int | None = None) -> EscapeReport:
    """Whether the base point of a hyperbolic magnetic geodesic leaves and never returns.

    Long escaping orbits run far beyond what the disc chart can resolve, so
    the chart is periodically recentered by a disc isometry; distances to the
    start point are measured through the accumulated isometry.
    """
    st0 = _as_state(st0)
    k = sys.kappa
    if k >= 0:
        raise ValueError("escape witness requires kappa < 0")
    if transient is None:
        transient = 5 * 2 * math.pi / abs(sys.s)
    speed = math.sqrt(2 * kinetic_energy(sys, st0))
    if n_samples is None:
        dt = 0.25 * return_threshold / max(speed, 1e-12)
        n_samples = int(math.ceil(horizon / dt)) + 1
    ts = np.linspace(0.0, horizon, n_samples)
    dist = _recentered_base_distances(sys, st0, ts, tol)
    after = dist[ts >= transient]
    min_ret = float(np.min(after)) if after.size else math.inf
    return EscapeReport(float(np.max(dist)), min_ret, bool(min_ret > return_threshold))


def _recentered_base_distances(sys, st0, ts, tol, recenter_at=0.8):
    """Distances d(base(st0), base(flow_t st0)) for kappa < 0, recentering the chart."""
    k = sys.kappa
    c = math.sqrt(-k) / 2  # chart coordinate z -> unit-disc coordinate c z
    g0 = c * complex(st0.x, st0.y)
    M = np.eye(2, dtype=complex)  # unit-disc isometry: current chart -> original chart
    y = st0.as_array()
    t0 = 0.0
    out = np.empty(len(ts))
    i = 0

    def dists(Mat, zs):
        b = c * zs
        # homogeneous coordinates of the start point in the current chart
        alpha = Mat[1, 1] * g0 - Mat[0, 1]
        beta = -Mat[1, 0] * g0 + Mat[0, 0]
        num = 2 * np.abs(alpha - b * beta) ** 2
        den = (1 - abs(g0) ** 2) * (1 - np.abs(b) ** 2)
        return np.arccosh(1 + num / den) / math.sqrt(-k)

    while i < len(ts):
        stepper = make_stepper(sys, y[:, None], [0], KINETIC, ts[-1] - t0, tol)
        restart = False
        for seg in stepper.segments():
            a, b = seg.t0 + t0, seg.t1 + t0
            j = int(np.searchsorted(ts, b, side="right"))
            if j > i:
                ys = seg(ts[i:j] - t0)[:, 0, :]
                out[i:j] = dists(M, ys[0] + 1j * ys[1])
                i = j
            t_cur, y_cur, _ = stepper.last_state
            y_cur = y_cur[:, 0]
            if c * math.hypot(y_cur[0], y_cur[1]) > recenter_at and i < len(ts):
                p = complex(y_cur[0], y_cur[1])
                q = c * p
                F = np.array([[1, q], [np.conj(q), 1]]) / math.sqrt(1 - abs(q) ** 2)
                M = M @ F
                r = geo.rho(k, y_cur[0], y_cur[1])
                y = np.array([0.0, 0.0, r * y_cur[2], r * y_cur[3]])
                t0 = t0 + t_cur
                restart = True
                break
        if not restart:
            break
    if i < len(ts):
        raise IntegrationError("escape integration ended before the horizon")
    return out
