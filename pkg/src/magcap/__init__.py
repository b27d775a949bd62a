"""Magnetic geodesic flows on constant-curvature surfaces and the
Hofer-Zehnder capacity of their magnetic disc tangent bundles."""
from . import analysis, capacity, dynamics, geometry
from .capacity import CapacityResult, capacity_certificate, capacity_value
from .dynamics import KINETIC, CIRCLE_ACTION, MagneticSystem, PhaseState, integrate
from .errors import (CertificationError, DomainError, IntegrationError, NotClosing,
                     WeakField)
from .geometry import Chart, ChartPoint, TangentVec

__version__ = "0.1.0"
