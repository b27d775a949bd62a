"""Magnetic geodesic flow on the tangent bundle of a constant-curvature surface.

Phase states are ``(x, y, u, w)``: a chart point and the chart components of
the velocity ``v = u d/dx + w d/dy``.  The tangent bundle carries the twisted
symplectic form

    omega_s = d(lambda) - s pi^* sigma,
    lambda  = rho**2 (u dx + w dy),     sigma = rho**2 dx ^ dy,

and Hamiltonian vector fields are defined by ``omega_s(X_H, .) = -dH``.  With
this convention and ``s > 0`` the velocity turns counterclockwise.

Three Hamiltonians are supported: the kinetic energy ``E = |v|**2 / 2``, the
circle-action Hamiltonian ``H = h(E)`` whose flow has period one, and a
profiled ``f(H)`` used for admissibility checks.  All three are functions of
``E`` alone, so their fields are multiples of ``X_E``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from ._rk import DormandPrince
from .errors import DomainError, IntegrationError, WeakField
from .geometry import Chart

EPS_FLOOR = 1e-12


@dataclass(frozen=True)
class MagneticSystem:
    kappa: float
    s: float

    def __post_init__(self):
        geo.check_kappa(self.kappa)
        if not math.isfinite(self.s):
            raise ValueError(f"magnetic strength must be finite, got {self.s!r}")

    def strong(self, energy: float) -> bool:
        return self.s != 0 and self.s * self.s + 2 * self.kappa * energy > 0


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float
    u: float
    w: float
    chart: Chart = Chart.MAIN

    @property
    def point(self) -> geo.ChartPoint:
        return geo.ChartPoint(self.x, self.y, self.chart)

    @property
    def velocity(self) -> geo.TangentVec:
        return geo.TangentVec(self.u, self.w)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.u, self.w])

    @classmethod
    def from_array(cls, a, chart=Chart.MAIN) -> "PhaseState":
        x, y, u, w = (float(c) for c in a)
        return cls(x, y, u, w, Chart(int(chart)))


def _as_state(st) -> PhaseState:
    if isinstance(st, PhaseState):
        return st
    return PhaseState(*(float(c) for c in st))


@dataclass(frozen=True)
class HamiltonianKind:
    """Which Hamiltonian drives the flow: ``kinetic``, ``circle`` or ``profiled``."""

    name: str
    profile: object = None

    def __post_init__(self):
        if self.name not in ("kinetic", "circle", "profiled"):
            raise ValueError(f"unknown Hamiltonian kind {self.name!r}")
        if (self.name == "profiled") != (self.profile is not None):
            raise ValueError("a profile is required exactly for the profiled kind")


KINETIC = HamiltonianKind("kinetic")
CIRCLE_ACTION = HamiltonianKind("circle")


def profiled(profile) -> HamiltonianKind:
    return HamiltonianKind("profiled", profile)


# -- forms and Hamiltonians -------------------------------------------------------

def kinetic_energy(sys: MagneticSystem, st) -> float:
    st = _as_state(st)
    geo.check_domain(sys.kappa, st.point)
    r = geo.rho(sys.kappa, st.x, st.y)
    return 0.5 * r * r * (st.u * st.u + st.w * st.w)


def _energy(kappa, y):
    r = geo.rho(kappa, y[0], y[1])
    return 0.5 * r * r * (y[2] * y[2] + y[3] * y[3])


def canonical_one_form(sys: MagneticSystem, st, d) -> float:
    """lambda(d) = g(v, d pi(d)) for a phase-space direction d = (dx, dy, du, dw)."""
    st = _as_state(st)
    r = geo.conformal_factor(sys.kappa, st.point)
    return r * r * (st.u * d[0] + st.w * d[1])


def twisted_form_matrix(sys: MagneticSystem, st) -> np.ndarray:
    """Matrix W with omega_s(a, b) = a @ W @ b in the frame (dx, dy, du, dw).

    d(lambda) = rho**2 (du^dx + dw^dy) + (w d_x(rho**2) - u d_y(rho**2)) dx^dy,
    where d_x(rho**2) = -kappa x rho**3.
    """
    st = _as_state(st)
    k = sys.kappa
    r = geo.conformal_factor(k, st.point)
    r2 = r * r
    drx = -k * st.x * r2 * r
    dry = -k * st.y * r2 * r
    c = st.w * drx - st.u * dry - sys.s * r2
    W = np.zeros((4, 4))
    W[2, 0], W[0, 2] = r2, -r2
    W[3, 1], W[1, 3] = r2, -r2
    W[0, 1], W[1, 0] = c, -c
    return W


def twisted_form(sys: MagneticSystem, st, d1, d2) -> float:
    return float(np.asarray(d1, float) @ twisted_form_matrix(sys, st) @ np.asarray(d2, float))


def h_of_energy(sys: MagneticSystem, E):
    """Circle-action reparametrization h(E) = (2 pi / kappa)(sqrt(s^2 + 2 kappa E) - |s|).

    Evaluated as 4 pi E / (sqrt(s^2 + 2 kappa E) + |s|), which is finite at kappa = 0.
    """
    _check_strong(sys, E)
    root = np.sqrt(sys.s * sys.s + 2 * sys.kappa * np.asarray(E, float))
    return 4 * math.pi * np.asarray(E, float) / (root + abs(sys.s))


def period_of_energy(sys: MagneticSystem, E):
    """Period 2 pi / sqrt(s^2 + 2 kappa E) of the kinetic flow; equals h'(E)."""
    _check_strong(sys, E)
    return 2 * math.pi / np.sqrt(sys.s * sys.s + 2 * sys.kappa * np.asarray(E, float))


def energy_of_h(sys: MagneticSystem, H):
    """Inverse of :func:`h_of_energy`."""
    a = np.asarray(H, float) / (2 * math.pi)
    E = a * (0.5 * sys.kappa * a + abs(sys.s))
    _check_strong(sys, E)
    return E


def _check_strong(sys, E):
    E = np.asarray(E, float)
    if np.any(E < 0):
        raise ValueError("energy must be non-negative")
    if sys.s == 0 or np.any(sys.s * sys.s + 2 * sys.kappa * E <= 0):
        raise WeakField(sys.kappa, sys.s, energy=float(np.max(E)) if sys.kappa < 0 else float(np.min(E)))


def _scale(sys, kind, E):
    """Factor c(E) with X_kind = c(E) X_E."""
    if kind.name == "kinetic":
        return 1.0
    T = 2 * math.pi / np.sqrt(sys.s * sys.s + 2 * sys.kappa * E)
    if kind.name == "circle":
        return T
    H = 4 * math.pi * E / (np.sqrt(sys.s * sys.s + 2 * sys.kappa * E) + abs(sys.s))
    return kind.profile.derivative(H) * T


def energy_gradient(sys: MagneticSystem, st) -> np.ndarray:
    st = _as_state(st)
    k = sys.kappa
    r = geo.conformal_factor(k, st.point)
    v2 = st.u * st.u + st.w * st.w
    return np.array([-0.5 * v2 * k * st.x * r**3, -0.5 * v2 * k * st.y * r**3,
                     r * r * st.u, r * r * st.w])


def hamiltonian_gradient(sys: MagneticSystem, st, kind: HamiltonianKind = KINETIC) -> np.ndarray:
    E = kinetic_energy(sys, st)
    if kind.name != "kinetic":
        _check_strong(sys, E)
    return float(_scale(sys, kind, E)) * energy_gradient(sys, st)


def hamiltonian_vector_field(sys: MagneticSystem, st, kind: HamiltonianKind = KINETIC) -> np.ndarray:
    """X_H from the pointwise linear system omega_s(X, .) = -dH."""
    W = twisted_form_matrix(sys, st)
    dH = hamiltonian_gradient(sys, st, kind)
    return np.linalg.solve(W.T, -dH)


def _lorentz(kappa, s, y):
    x, yy, u, w = y
    r = geo.rho(kappa, x, yy)
    # Christoffel symbols of rho**2 |dz|**2 via grad(log rho) = -kappa rho z / 2
    px = -0.5 * kappa * r * x
    py = -0.5 * kappa * r * yy
    du = -px * (u * u - w * w) - 2 * py * u * w - s * w
    dw = -py * (w * w - u * u) - 2 * px * u * w + s * u
    return np.stack([u, w, du, dw])


def lorentz_rhs(sys: MagneticSystem, st) -> np.ndarray:
    """Closed form of the kinetic field: geodesic spray plus Lorentz force s J v."""
    st = _as_state(st)
    geo.check_domain(sys.kappa, st.point)
    return _lorentz(sys.kappa, sys.s, st.as_array())


def flow_rhs(sys: MagneticSystem, kind: HamiltonianKind = KINETIC):
    """Vectorized field y -> X_kind(y) on arrays of shape (4, ...)."""
    k, s = sys.kappa, sys.s
    if kind.name == "kinetic":
        return lambda y: _lorentz(k, s, y)
    return lambda y: _scale(sys, kind, _energy(k, y)) * _lorentz(k, s, y)


# -- integration ----------------------------------------------------------------

def swap_charts(kappa, y, chart):
    """Move sphere states with |z| beyond the swap radius to the other chart."""
    z = y[0] + 1j * y[1]
    mask = np.abs(z) > geo.SWAP_RADIUS / math.sqrt(kappa)
    n = int(np.count_nonzero(mask))
    if not n:
        return y, chart, 0
    y = y.copy()
    zm = z[mask]
    vm = (y[2] + 1j * y[3])[mask]
    z2 = -4.0 / (kappa * zm)
    v2 = 4.0 / (kappa * zm * zm) * vm
    y[0][mask], y[1][mask] = z2.real, z2.imag
    y[2][mask], y[3][mask] = v2.real, v2.imag
    chart = chart.copy()
    chart[mask] = 1 - chart[mask]
    return y, chart, n


def to_chart(kappa, y, chart, target):
    """Express states y (shape (4, ...)) given in ``chart`` in the ``target`` chart."""
    chart = np.broadcast_to(chart, np.shape(y)[1:])
    mask = chart != target
    if not np.any(mask):
        return y
    y = np.array(y, dtype=float, copy=True)
    z = (y[0] + 1j * y[1])[mask]
    v = (y[2] + 1j * y[3])[mask]
    with np.errstate(divide="ignore", invalid="ignore"):
        z2 = -4.0 / (kappa * z)
        v2 = 4.0 / (kappa * z * z) * v
    y[0][mask], y[1][mask] = z2.real, z2.imag
    y[2][mask], y[3][mask] = v2.real, v2.imag
    return y


def state_in_chart(sys: MagneticSystem, st: PhaseState, target: Chart) -> PhaseState:
    if st.chart == target:
        return st
    a = to_chart(sys.kappa, st.as_array()[:, None], np.array([int(st.chart)]), int(target))
    return PhaseState.from_array(a[:, 0], target)


def make_stepper(sys, y0, chart0, kind, duration, tol):
    """Dormand-Prince stepper for states y0 of shape (4, N)."""
    k = sys.kappa

    def check(t, y):
        if k < 0 and np.any(y[0] ** 2 + y[1] ** 2 >= 4.0 / -k):
            raise IntegrationError("trajectory left the hyperbolic disc", t, y)
        if not np.all(np.isfinite(y)):
            raise IntegrationError("non-finite state", t, y)

    swap = (lambda y, c: swap_charts(k, y, c)) if k > 0 else None
    return DormandPrince(flow_rhs(sys, kind), y0, 0.0, float(duration), tol,
                         chart=np.asarray(chart0, dtype=int), swap=swap, check=check)


@dataclass
class TrajectoryStats:
    steps: int = 0
    rejected_steps: int = 0
    max_energy_drift: float = 0.0
    chart_swaps: int = 0


@dataclass
class Trajectory:
    """Dense-output samples of one integrated orbit."""

    times: np.ndarray
    states: np.ndarray  # (n, 4)
    charts: np.ndarray  # (n,)
    tol: float
    stats: TrajectoryStats = field(default_factory=TrajectoryStats)

    @property
    def samples(self):
        return [(float(t), PhaseState.from_array(y, c))
                for t, y, c in zip(self.times, self.states, self.charts)]

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> PhaseState:
        return PhaseState.from_array(self.states[-1], self.charts[-1])

    def energies(self, sys: MagneticSystem) -> np.ndarray:
        return _energy(sys.kappa, self.states.T)

    def in_chart(self, sys: MagneticSystem, target: Chart) -> np.ndarray:
        """All sample states expressed in one chart, shape (n, 4)."""
        return to_chart(sys.kappa, self.states.T, self.charts, int(target)).T


def integrate(sys: MagneticSystem, st0, kind: HamiltonianKind = KINETIC, duration: float = 1.0,
              tol: float = 1e-10, t_eval=None, n_samples: int = 201) -> Trajectory:
    """Integrate the flow of ``kind`` from st0 and sample it at t_eval.

    Without ``t_eval`` the trajectory is sampled at ``n_samples`` equispaced
    times on [0, duration].  Sphere states crossing the swap radius move to
    the other chart; each sample records the chart it is expressed in.
    """
    st0 = _as_state(st0)
    geo.check_domain(sys.kappa, st0.point)
    if not (math.isfinite(duration) and duration >= 0):
        raise ValueError(f"duration must be finite and non-negative, got {duration!r}")
    E0 = kinetic_energy(sys, st0)
    if kind.name != "kinetic":
        _check_strong(sys, E0)
    if t_eval is None:
        t_eval = np.linspace(0.0, duration, n_samples) if duration > 0 else np.zeros(1)
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.ndim != 1 or np.any(np.diff(t_eval) <= 0) or t_eval[0] < 0 or t_eval[-1] > duration:
        raise ValueError("t_eval must be strictly increasing within [0, duration]")

    y0 = st0.as_array()[:, None]
    states = np.empty((len(t_eval), 4))
    charts = np.empty(len(t_eval), dtype=int)
    head = t_eval <= 0
    states[head] = st0.as_array()
    charts[head] = int(st0.chart)
    i = int(np.count_nonzero(head))
    stepper = make_stepper(sys, y0, [int(st0.chart)], kind, duration, tol)
    for seg in stepper.segments():
        j = int(np.searchsorted(t_eval, seg.t1, side="right"))
        if j > i:
            ys = seg(t_eval[i:j])  # (4, 1, m)
            states[i:j] = ys[:, 0, :].T
            charts[i:j] = seg.chart[0]
            i = j
    if i < len(t_eval):
        raise IntegrationError("integration stopped before the last sample time")

    drift = np.abs(_energy(sys.kappa, states.T) - E0) / max(E0, EPS_FLOOR)
    st = stepper.stats
    stats = TrajectoryStats(st.steps, st.rejected_steps, float(np.max(drift)), st.chart_swaps)
    return Trajectory(t_eval, states, charts, tol, stats)


def circle_action_flow(sys: MagneticSystem, st0, t: float, tol: float = 1e-10) -> PhaseState:
    """Time-t map of the period-one circle action generated by H = h(E).

    Realized as the kinetic flow for physical time t * h'(E(st0)), exact because
    E is conserved.  The result is returned in the chart of st0.
    """
    st0 = _as_state(st0)
    E = kinetic_energy(sys, st0)
    _check_strong(sys, E)
    if not 0 <= t <= 1:
        raise ValueError(f"circle-action time must lie in [0, 1], got {t!r}")
    if t == 0 or E == 0:
        return st0
    T = float(period_of_energy(sys, E))
    traj = integrate(sys, st0, KINETIC, t * T, tol, t_eval=np.array([0.0, t * T]))
    return state_in_chart(sys, traj.final, st0.chart)


def phase_distance(sys: MagneticSystem, a: PhaseState, b: PhaseState) -> float:
    """Euclidean distance of (x, y, u, w) after moving b into a's chart."""
    b = state_in_chart(sys, b, a.chart)
    return float(np.linalg.norm(a.as_array() - b.as_array()))


__all__ = [
    "MagneticSystem", "PhaseState", "HamiltonianKind", "KINETIC", "CIRCLE_ACTION", "profiled",
    "kinetic_energy", "canonical_one_form", "twisted_form", "twisted_form_matrix",
    "energy_gradient", "hamiltonian_gradient", "hamiltonian_vector_field", "lorentz_rhs",
    "flow_rhs", "h_of_energy", "period_of_energy", "energy_of_h", "integrate",
    "circle_action_flow", "Trajectory", "TrajectoryStats", "phase_distance",
    "state_in_chart", "to_chart", "swap_charts", "DomainError",
]
