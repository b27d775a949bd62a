"""Hofer-Zehnder capacity of magnetic disc tangent bundles.

For a closed surface of constant curvature ``kappa``, magnetic strength
``s != 0`` and radius ``r`` with ``s**2 + kappa r**2 > 0`` the capacity of
the disc bundle ``D_r`` with form ``d(lambda) - s pi^* sigma`` is

    c = (2 pi / kappa)(sqrt(s**2 + kappa r**2) - |s|)
      = 2 pi r**2 / (sqrt(s**2 + kappa r**2) + |s|),

which is the oscillation of the circle-action Hamiltonian ``h(E)`` on the
disc bundle.  The second form is used throughout; it is exact at
``kappa = 0`` where it reduces to ``pi r**2 / |s|``.

The lower bound is certified numerically: composing ``H = h(E)`` with a
profile ``f`` of slope ``f' < 1`` gives an admissible Hamiltonian whose
orbits all have period ``1 / f' > 1``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .analysis import first_return
from .dynamics import (MagneticSystem, PhaseState, energy_of_h, flow_rhs, h_of_energy,
                       profiled)
from .errors import CertificationError, WeakField


@dataclass(frozen=True)
class CapacityResult:
    value: float
    kappa: float
    s: float
    r: float
    stable_branch: bool = True

    def to_dict(self):
        return asdict(self)


def strong_field_check(kappa: float, s: float, r: float) -> bool:
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r!r}")
    return s != 0 and s * s + kappa * r * r > 0


def capacity_value(kappa: float, s: float, r: float) -> CapacityResult:
    if not strong_field_check(kappa, s, r):
        raise WeakField(kappa, s, r=r)
    value = 2 * math.pi * r * r / (math.sqrt(s * s + kappa * r * r) + abs(s))
    return CapacityResult(value, float(kappa), float(s), float(r), True)


@dataclass(frozen=True)
class ProfileF:
    """Monotone C^1 profile f on [0, maxH] with slope below one.

    f' = (1 - delta) * ramp, where ramp is zero on [0, eta], rises along a
    half cosine of width ramp_w, equals one on the plateau, and falls back
    symmetrically so that f is constant on [maxH - eta, maxH].
    """

    maxH: float
    delta: float
    eta: float
    ramp_w: float

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not (self.eta > 0 and self.ramp_w > 0):
            raise ValueError("eta and ramp_w must be positive")
        if not 2 * self.eta + 2 * self.ramp_w < self.maxH:
            raise ValueError(f"profile does not fit: 2*eta + 2*ramp_w = "
                             f"{2 * self.eta + 2 * self.ramp_w:g} >= maxH = {self.maxH:g}")

    @property
    def slope(self) -> float:
        return 1.0 - self.delta

    @property
    def _knots(self):
        a = self.eta
        b = a + self.ramp_w
        d = self.maxH - self.eta
        c = d - self.ramp_w
        return a, b, c, d

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        a, b, c, d = self._knots
        w = self.ramp_w
        rise = 0.5 * (1 - np.cos(math.pi * np.clip((x - a) / w, 0, 1)))
        fall = 0.5 * (1 - np.cos(math.pi * np.clip((d - x) / w, 0, 1)))
        return self.slope * np.where(x < c, rise, fall)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a, b, c, d = self._knots
        w = self.ramp_w

        def rise_int(xi):
            # integral of (1 - cos(pi t)) / 2 over [0, xi], scaled by w
            return 0.5 * w * (xi - np.sin(math.pi * xi) / math.pi)

        xi_up = np.clip((x - a) / w, 0, 1)
        xi_down = np.clip((x - c) / w, 0, 1)
        plateau = np.clip(x, b, c) - b
        # the falling ramp mirrors the rising one
        down = np.where(x > c, 0.5 * w - rise_int(1 - xi_down), 0.0)
        return self.slope * (rise_int(xi_up) + plateau + down)

    @property
    def max_value(self) -> float:
        """f(maxH) = (1 - delta)(maxH - 2 eta - ramp_w)."""
        return self.slope * (self.maxH - 2 * self.eta - self.ramp_w)


def build_profile(maxH: float, delta: float, eta: float, ramp_w: float) -> ProfileF:
    return ProfileF(float(maxH), float(delta), float(eta), float(ramp_w))


@dataclass(frozen=True)
class AdmissibilityReport:
    min_period_measured: float
    levels_checked: int
    certified_lower_bound: float
    stationary_levels: int = 0
    periods: tuple = ()


def admissibility_levels(profile: ProfileF, n_levels: int) -> np.ndarray:
    """H-levels with f' > 0: the plateau plus interior points of both ramps."""
    a, b, c, d = profile._knots
    w = profile.ramp_w
    n_ramp = max(1, n_levels // 4) if n_levels >= 4 else 0
    n_plateau = n_levels - 2 * n_ramp
    ramps = np.linspace(0.25, 0.75, n_ramp) if n_ramp > 1 else np.array([0.5])[:n_ramp]
    plateau = np.linspace(b, c, n_plateau + 2)[1:-1]
    return np.sort(np.concatenate([a + w * ramps, plateau, d - w * ramps]))


def verify_admissibility(sys: MagneticSystem, r: float, profile: ProfileF, n_levels: int = 8,
                         tol: float = 1e-6, integ_tol: float = 1e-10) -> AdmissibilityReport:
    """Measure periods of the flow of f(H) and check them against 1 / f'(H).

    Periods must match to relative ``tol``.  On narrow ramps f' is steep in H,
    so energy drift of the integrator is amplified; lower ``integ_tol`` there.

    Orbits start over the chart origin with kinetic energy E = h^{-1}(level).
    Levels in the flat parts of f are checked to be stationary.
    """
    cap = capacity_value(sys.kappa, sys.s, r).value
    if abs(profile.maxH - cap) > 1e-12 * cap:
        raise ValueError(f"profile maxH {profile.maxH!r} differs from the capacity {cap!r}")
    kind = profiled(profile)
    floor = 1.0 / profile.slope
    periods = []
    for H in admissibility_levels(profile, n_levels):
        E = float(energy_of_h(sys, H))
        st = PhaseState(0.0, 0.0, math.sqrt(2 * E), 0.0)
        expected = 1.0 / float(profile.derivative(H))
        rep = first_return(sys, st, kind, integ_tol, t_max=1.5 * expected)
        if not rep.converged:
            raise CertificationError(f"no return at level H={H:.17g}: {rep.reason}")
        if abs(rep.period - expected) > tol * expected or rep.period < floor - tol or rep.period < 1:
            raise CertificationError(
                f"level H={H:.17g}: period {rep.period:.17g}, expected {expected:.17g} "
                f"(floor {floor:.17g})")
        periods.append((float(H), rep.period, expected))

    stationary = 0
    rhs = flow_rhs(sys, kind)
    for H in (0.5 * profile.eta, profile.maxH - 0.5 * profile.eta):
        E = float(energy_of_h(sys, H))
        y = np.array([[0.0], [0.0], [math.sqrt(2 * E)], [0.0]])
        if np.any(rhs(y) != 0):
            raise CertificationError(f"flat level H={H:.17g} is not stationary")
        stationary += 1

    return AdmissibilityReport(min(p[1] for p in periods), len(periods), profile.max_value,
                               stationary, tuple(periods))


@dataclass(frozen=True)
class CapacityCertificate:
    value: float
    kappa: float
    s: float
    r: float
    stable_branch: bool
    delta: float
    eta: float
    ramp_w: float
    certified_lower_bound: float
    min_period_measured: float
    levels_checked: int
    gap: float

    def to_dict(self):
        return asdict(self)


def capacity_certificate(kappa: float, s: float, r: float, delta: float, eta: float,
                         ramp_w: float, n_levels: int = 8, tol: float = 1e-6,
                         integ_tol: float = 1e-10) -> CapacityCertificate:
    cap = capacity_value(kappa, s, r)
    profile = build_profile(cap.value, delta, eta, ramp_w)
    rep = verify_admissibility(MagneticSystem(kappa, s), r, profile, n_levels, tol, integ_tol)
    if not rep.certified_lower_bound < cap.value:
        raise CertificationError("certified bound does not lie below the capacity")
    return CapacityCertificate(cap.value, cap.kappa, cap.s, cap.r, cap.stable_branch,
                               profile.delta, profile.eta, profile.ramp_w,
                               rep.certified_lower_bound, rep.min_period_measured,
                               rep.levels_checked, cap.value - rep.certified_lower_bound)


def certification_gap(maxH: float, delta: float, eta: float, ramp_w: float) -> float:
    """maxH - f(maxH) = delta maxH + (1 - delta)(2 eta + ramp_w)."""
    return delta * maxH + (1 - delta) * (2 * eta + ramp_w)


__all__ = ["CapacityResult", "strong_field_check", "capacity_value", "ProfileF", "build_profile",
           "AdmissibilityReport", "admissibility_levels", "verify_admissibility",
           "CapacityCertificate", "capacity_certificate", "certification_gap", "h_of_energy"]
