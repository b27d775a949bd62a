"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point or parameter lies outside the chart domain of the model."""


class NotClosing(ValueError):
    """Requested geodesic curvature is too small for a closed circle (kappa < 0)."""


class WeakField(ValueError):
    """The strong-field condition s**2 + kappa*r**2 > 0 (with s != 0) fails.

    Outside this regime the magnetic flow is not totally periodic and the
    capacity formula does not apply: for hyperbolic surfaces with a weak field
    even finiteness of the capacity is unknown.
    """

    def __init__(self, kappa, s, r=None, energy=None):
        self.kappa = kappa
        self.s = s
        self.r = r
        self.energy = energy
        if r is not None:
            lhs = s * s + kappa * r * r
            msg = (f"weak field: s^2 + kappa*r^2 = {lhs:.17g} <= 0 or s == 0 "
                   f"(kappa={kappa:g}, s={s:g}, r={r:g})")
        else:
            lhs = s * s + 2.0 * kappa * energy
            msg = (f"weak field: s^2 + 2*kappa*E = {lhs:.17g} <= 0 or s == 0 "
                   f"(kappa={kappa:g}, s={s:g}, E={energy:g})")
        super().__init__(msg)


class IntegrationError(RuntimeError):
    """The integrator could not continue; ``last_state`` holds the last good state."""

    def __init__(self, msg, t=None, last_state=None):
        super().__init__(msg)
        self.t = t
        self.last_state = last_state


class CertificationError(RuntimeError):
    """A measured period contradicted the admissibility certificate."""
