"""Invariant suites for each module, run by ``magcap verify``.

Every check reports the observed residual next to its bound.  The suites use
fixed seeds, so repeated runs print identical tables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import analysis as an
from . import capacity as cp
from . import dynamics as dy
from . import geometry as geo


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    observed: float
    bound: float
    passed: bool


def _check(suite, name, observed, bound, strict=False):
    ok = bool(observed < bound) if strict else bool(observed <= bound)
    return Check(suite, name, float(observed), float(bound), ok)


def _random_point(rng, kappa, scale=1.2):
    # stay well inside the hyperbolic disc, radius 2/sqrt(|kappa|)
    lim = scale if kappa >= 0 else min(scale, 1.5 / math.sqrt(-kappa))
    while True:
        x, y = rng.uniform(-lim, lim, 2)
        if x * x + y * y < lim * lim:
            return geo.ChartPoint(x, y)


# -- geometry -------------------------------------------------------------------

def geometry_suite(seed=0):
    rng = np.random.default_rng(seed)
    out = []
    worst = 0.0
    for k in (-1.0, -0.3, 0.0, 0.5, 1.0):
        for _ in range(40):
            p = _random_point(rng, k)
            worst = max(worst, abs(geo.gauss_curvature(k, p, 1e-4) - k))
    out.append(_check("geometry", "gauss curvature from rho (finite differences)", worst, 1e-6))

    worst = 0.0
    for k in (-1.0, 0.0, 1.0):
        for _ in range(50):
            p, q = _random_point(rng, k), _random_point(rng, k)
            th = rng.uniform(0, 2 * math.pi)
            d = geo.distance(k, p, q)
            d2 = geo.distance(k, geo.rotate_chart(p, th), geo.rotate_chart(q, th))
            worst = max(worst, abs(d - d2))
    out.append(_check("geometry", "distance invariant under chart rotations", worst, 1e-12))

    worst = 0.0
    for k in (-1.0, 0.0, 1.0):
        for R in np.linspace(0.05, 1.5, 40):
            back = geo.radius_from_curvature(k, geo.circle_curvature(k, R))
            worst = max(worst, abs(back - R) / R)
    out.append(_check("geometry", "radius_from_curvature o circle_curvature = id", worst, 1e-12))

    worst = 0.0
    for _ in range(50):
        p = _random_point(rng, 1.0, 3.0)
        w = geo.TangentVec(*rng.normal(size=2))
        p2, w2 = geo.chart_transition(1.0, p, w)
        p3, w3 = geo.chart_transition(1.0, p2, w2)
        n1, n2 = geo.metric_norm(1.0, p, w), geo.metric_norm(1.0, p2, w2)
        worst = max(worst, abs(n1 - n2) / n1, abs(p3.x - p.x), abs(p3.y - p.y),
                    abs(w3.a - w.a), abs(w3.b - w.b))
    out.append(_check("geometry", "chart transition is an involutive isometry", worst, 1e-12))

    worst = 0.0
    for R in np.linspace(0.1, 3.0, 30):
        c0 = geo.circle_circumference(0.0, R)
        for k in (1e-10, -1e-10):
            worst = max(worst, abs(geo.circle_circumference(k, R) - c0) / c0)
    out.append(_check("geometry", "circumference continuous at kappa = 0", worst, 1e-9))

    worst = 0.0
    for k in (-1.0, 0.0, 1.0):
        for _ in range(40):
            p = _random_point(rng, k, 1.0)
            w = geo.TangentVec(*rng.normal(size=2))
            n = geo.metric_norm(k, p, w)
            if k > 0 and n > 0.9 * math.pi:
                w = geo.TangentVec(w.a * 0.9 * math.pi / n, w.b * 0.9 * math.pi / n)
                n = geo.metric_norm(k, p, w)
            q = geo.exp_map(k, p, w)
            if k < 0 and (q.x * q.x + q.y * q.y) * -k / 4 > 0.9:
                continue
            worst = max(worst, abs(geo.distance(k, p, q) - n))
    out.append(_check("geometry", "distance(p, exp_p(w)) = |w|_g", worst, 1e-9))
    return out


# -- dynamics -------------------------------------------------------------------

SYSTEMS = [(k, s) for k in (-1.0, 0.0, 1.0) for s in (-2.0, -0.5, 0.5, 2.0)]


def _random_state(rng, k):
    p = _random_point(rng, k, 1.0)
    u, w = rng.normal(size=2)
    return dy.PhaseState(p.x, p.y, u, w)


def dynamics_suite(seed=0):
    rng = np.random.default_rng(seed)
    out = []
    eye = np.eye(4)

    worst = 0.0
    for i in range(200):
        k, s = SYSTEMS[i % len(SYSTEMS)]
        sys = dy.MagneticSystem(k, s)
        st = _random_state(rng, k)
        X = dy.lorentz_rhs(sys, st)
        dE = dy.energy_gradient(sys, st)
        res = [dy.twisted_form(sys, st, X, e) + dE @ e for e in eye]
        scale = max(np.max(np.abs(dE)), 1e-300)
        worst = max(worst, np.max(np.abs(res)) / scale)
    out.append(_check("dynamics", "omega_s(X_E, .) + dE = 0 (lorentz_rhs)", worst, 1e-10))

    worst = 0.0
    for k, s in SYSTEMS:
        sys = dy.MagneticSystem(k, s)
        for _ in range(20):
            st = _random_state(rng, k)
            worst = max(worst, np.max(np.abs(dy.lorentz_rhs(sys, st)
                                              - dy.hamiltonian_vector_field(sys, st))))
    out.append(_check("dynamics", "lorentz_rhs = linear-solve field", worst, 1e-12))

    worst = 0.0
    h = 1e-4
    for k, s in SYSTEMS[::3]:
        sys = dy.MagneticSystem(k, s)
        for _ in range(10):
            st = _random_state(rng, k)
            y = st.as_array()
            A, B = rng.normal(size=4), rng.normal(size=4)

            def lam(point, d):
                return dy.canonical_one_form(sys, dy.PhaseState(*point), d)

            dA_lB = (lam(y + h * A, B) - lam(y - h * A, B)) / (2 * h)
            dB_lA = (lam(y + h * B, A) - lam(y - h * B, A)) / (2 * h)
            dlam = dy.twisted_form(sys, st, A, B) + s * geo.rho(k, y[0], y[1]) ** 2 * (A[0] * B[1] - A[1] * B[0])
            worst = max(worst, abs(dA_lB - dB_lA - dlam))
    out.append(_check("dynamics", "closed-form d(lambda) vs finite differences", worst, 1e-6))

    worst = 0.0
    for k, s, v in ((1.0, 1.0, 1.0), (-1.0, 2.0, 1.0), (0.0, 0.5, 1.5), (1.0, 0.7, 2.0)):
        sys = dy.MagneticSystem(k, s)
        st = dy.PhaseState(0.2, -0.1, v / geo.rho(k, 0.2, -0.1), 0.0)
        T = float(dy.period_of_energy(sys, dy.kinetic_energy(sys, st)))
        traj = dy.integrate(sys, st, dy.KINETIC, 10 * T, 1e-10, n_samples=501)
        worst = max(worst, traj.stats.max_energy_drift)
    out.append(_check("dynamics", "energy drift over 10 periods", worst, 1e-8))

    out.append(_check("dynamics", "period through a chart swap = period away from it",
                      chart_swap_period_gap(), 1e-7))

    worst = 0.0
    for k, s in ((1.0, 1.0), (-1.0, 2.0), (0.0, -1.0)):
        sys = dy.MagneticSystem(k, s)
        st = dy.PhaseState(0.1, 0.2, 0.6, -0.3)
        for t in (0.3, 0.75):
            a = dy.circle_action_flow(sys, st, t)
            b = dy.integrate(sys, st, dy.CIRCLE_ACTION, t, 1e-10, t_eval=np.array([0.0, t])).final
            worst = max(worst, dy.phase_distance(sys, a, b))
    out.append(_check("dynamics", "circle_action_flow = integrate(CircleAction)", worst, 1e-8))
    return out


def chart_swap_period_gap(tol=1e-10):
    """|period of a sphere orbit crossing the swap radius - period of its rotated copy|."""
    sys = dy.MagneticSystem(1.0, 1.0)
    z0 = 2.3
    r = geo.rho(1.0, z0, 0.0)
    st = dy.PhaseState(z0, 0.0, 1.0 / r, 0.0)  # unit speed, heading outward
    a = an.first_return(sys, st, dy.KINETIC, tol)
    b = an.first_return(sys, dy.PhaseState(0.0, 0.0, 1.0, 0.0), dy.KINETIC, tol)
    swaps = dy.integrate(sys, st, dy.KINETIC, a.period, tol).stats.chart_swaps
    if not (a.converged and b.converged) or swaps == 0:
        return math.inf
    return abs(a.period - b.period)


# -- analysis -------------------------------------------------------------------

def period_grid():
    """(kappa, s, E) triples: 3 curvatures x 3 strengths x 6 strong-field energies."""
    grid = []
    for k in (-1.0, 0.0, 1.0):
        for s in (0.7, 1.0, 2.0):
            if k < 0:
                Ecrit = s * s / (-2 * k)
                energies = [Ecrit * f for f in (0.05, 0.15, 0.3, 0.5, 0.7, 0.85)]
            else:
                energies = [0.05, 0.2, 0.5, 1.0, 1.5, 2.0]
            grid += [(k, s, E) for E in energies]
    return grid


def grid_state(k, E, i=0):
    """Start state of kinetic energy E at a varied base point and heading."""
    x, y = (0.3, -0.2) if i % 2 else (0.0, 0.0)
    ang = 0.7 * i
    r = geo.rho(k, x, y)
    v = math.sqrt(2 * E) / r
    return dy.PhaseState(x, y, v * math.cos(ang), v * math.sin(ang))


def period_law_residuals(tol=1e-10):
    rows = []
    for i, (k, s, E) in enumerate(period_grid()):
        sys = dy.MagneticSystem(k, s)
        rep = an.first_return(sys, grid_state(k, E, i), dy.KINETIC, tol)
        T = float(dy.period_of_energy(sys, E))
        rows.append((k, s, E, rep.period, T, abs(rep.period - T) / T if rep.converged else math.inf))
    return rows


CIRCLE_CONFIGS = [(0.0, 1.0, 1.0), (0.0, 2.0, 0.7), (1.0, 1.0, 1.0),
                  (1.0, 0.5, 0.8), (-1.0, 2.0, 1.0), (-1.0, 1.5, 0.5)]


def circle_law_residuals(tol=1e-10):
    rows = []
    for k, s, v in CIRCLE_CONFIGS:
        sys = dy.MagneticSystem(k, s)
        st = dy.PhaseState(0.0, 0.0, v, 0.0)
        rep = an.first_return(sys, st, dy.KINETIC, tol)
        traj = dy.integrate(sys, st, dy.KINETIC, rep.period, tol, n_samples=401)
        fit = an.fit_geodesic_circle(sys, traj)
        R = geo.radius_from_curvature(k, abs(s) / v)
        C = geo.circle_circumference(k, fit.radius)
        rows.append((k, s, v, fit.radius, R, abs(fit.radius - R), abs(rep.period * v - C) / C))
    return rows


def analysis_suite():
    out = []
    rows = period_law_residuals()
    out.append(_check("analysis", f"period law on {len(rows)} (kappa, s, E) triples",
                      max(r[-1] for r in rows), 1e-6))

    worst = 0.0
    for k, s in ((1.0, 1.0), (0.0, 0.7), (-1.0, 2.0)):
        sys = dy.MagneticSystem(k, s)
        Emax = 2.0 if k >= 0 else 0.4 * s * s / -k
        for E in np.linspace(0.1, 1.0, 4) * Emax:
            rep = an.first_return(sys, grid_state(k, E, 1), dy.CIRCLE_ACTION, 1e-10)
            worst = max(worst, abs(rep.period - 1.0) if rep.converged else math.inf)
    out.append(_check("analysis", "circle action: minimal period 1 at sampled levels", worst, 1e-6))

    rows = circle_law_residuals()
    out.append(_check("analysis", "fitted radius = radius_from_curvature(|s|/|v|)",
                      max(r[5] for r in rows), 1e-5))
    out.append(_check("analysis", "period x speed = circle_circumference(R)",
                      max(r[6] for r in rows), 1e-5))

    errs = swept_area_errors((64, 128, 256, 512))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    out.append(_check("analysis", "swept-area error at grid 256", errs[2], 1e-3))
    out.append(_check("analysis", "swept-area convergence order deficit (2 - min order)",
                      max(0.0, 2 - min(orders)), 0.1))

    sys = dy.MagneticSystem(1.0, 1.0)
    st = dy.PhaseState(0.2, 0.1, 0.8, 0.3)
    base = an.first_return(sys, st, dy.KINETIC, 1e-12)
    moved = dy.integrate(sys, st, dy.KINETIC, 0.37 * base.period, 1e-12,
                         t_eval=np.array([0.0, 0.37 * base.period])).final
    other = an.first_return(sys, moved, dy.KINETIC, 1e-12)
    out.append(_check("analysis", "period independent of the start point",
                      abs(base.period - other.period), 1e-8))
    return out


def swept_area_errors(grids, kappa=1.0, s=1.0, E=0.5):
    sys = dy.MagneticSystem(kappa, s)
    exact = float(dy.h_of_energy(sys, E))
    return [abs(an.swept_symplectic_area(sys, E, n, n) - exact) for n in grids]


# -- capacity -------------------------------------------------------------------

def naive_capacity(kappa, s, r, dps=50):
    """(2 pi / kappa)(sqrt(s^2 + kappa r^2) - |s|) in extended precision.

    The subtraction loses about log10(s^2 / |kappa| r^2) digits, which are
    added to the working precision.
    """
    if kappa != 0 and s != 0:
        dps += max(0, int(math.log10(s * s / (abs(kappa) * r * r))) + 1)
    with mpmath.workdps(dps):
        k, s, r = mpmath.mpf(kappa), mpmath.mpf(s), mpmath.mpf(r)
        if k == 0:
            return mpmath.pi * r * r / abs(s)
        return 2 * mpmath.pi / k * (mpmath.sqrt(s * s + k * r * r) - abs(s))


def capacity_suite(certify=True):
    out = []
    worst = 0.0
    for ratio in np.geomspace(1e-6, 10, 40):
        for s in (0.5, 1.0, 3.0):
            for sign in (1, -1):
                k = sign * ratio * s * s  # |kappa| r^2 / s^2 = ratio at r = 1
                if not cp.strong_field_check(k, s, 1.0):
                    continue
                naive = float(naive_capacity(k, s, 1.0))
                stable = cp.capacity_value(k, s, 1.0).value
                worst = max(worst, abs(naive - stable) / stable)
    out.append(_check("capacity", "naive and rationalized formulas agree", worst, 1e-14))

    worst = 0.0
    # relative change is about |kappa| r^2 / (4 s^2); keep r <= |s|
    for s, r in ((0.5, 0.5), (1.0, 0.5), (1.0, 1.0), (2.0, 1.0), (2.0, 2.0)):
        c0 = cp.capacity_value(0.0, s, r).value
        for k in (1e-9, -1e-9):
            worst = max(worst, abs(cp.capacity_value(k, s, r).value - c0) / c0)
    out.append(_check("capacity", "continuity at kappa = 0 (relative)", worst, 1e-9))

    violations = 0
    for k in (-1.0, 0.0, 1.0):
        rs = np.linspace(0.1, 0.95, 30)
        vals = [cp.capacity_value(k, 1.0, r).value for r in rs]
        violations += int(np.sum(np.diff(vals) <= 0))
        ss = np.linspace(1.0, 4.0, 30)
        vals = [cp.capacity_value(k, s, 0.9).value for s in ss]
        violations += int(np.sum(np.diff(vals) >= 0))
    out.append(_check("capacity", "monotone in r (up) and |s| (down): violations", violations, 0))

    worst = 0.0
    for k in (-1.0, -0.2, 0.0, 0.4, 1.0):
        for s in (0.5, -1.0, 2.0):
            for r in (0.2, 0.45):
                c = cp.capacity_value(k, s, r).value
                h = float(dy.h_of_energy(dy.MagneticSystem(k, s), r * r / 2))
                worst = max(worst, abs(c - h) / c)
    out.append(_check("capacity", "capacity = h(r^2 / 2)", worst, 1e-14))

    c = cp.capacity_value(1.0, 1.0, 1.0).value
    gap = c - cp.build_profile(c, 1e-4, 1e-4, 1e-4).max_value
    out.append(_check("capacity", "certification gap / value at (1e-4, 1e-4, 1e-4)", gap / c, 1e-3))

    if certify:
        cert = cp.capacity_certificate(1.0, 1.0, 1.0, 0.2, 0.1, 0.1)
        out.append(_check("capacity", "period floor: 1/(1-delta) - min measured period",
                          max(0.0, 1.25 - cert.min_period_measured), 1e-6))
    return out


SUITES = {
    "geometry": geometry_suite,
    "dynamics": dynamics_suite,
    "analysis": analysis_suite,
    "capacity": capacity_suite,
}


def run(suite="all"):
    names = list(SUITES) if suite == "all" else [suite]
    checks = []
    for name in names:
        checks += SUITES[name]()
    return checks
