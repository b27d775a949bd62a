"""
Constant-curvature geometry in one conformal chart
==================================================

The metric rho^2 |dz|^2 with rho = 1 / (1 + kappa |z|^2 / 4) covers the
sphere (kappa > 0), the plane and the hyperbolic disc (kappa < 0) at once.
"""
import math

from magcap import geometry as geo

# curvature recovered from rho by finite differences
for k in (-1.0, 0.0, 1.0):
    print(f"kappa={k:+.1f}  K(0.3, 0.4) = {geo.gauss_curvature(k, (0.3, 0.4)):+.8f}")

# the same chart distance means different things for different kappa
for k in (-1.0, 0.0, 1.0):
    print(f"kappa={k:+.1f}  d(0, 1.5) = {geo.distance(k, (0, 0), (1.5, 0)):.6f}")

# exp_map and distance agree
p, w = geo.ChartPoint(0.2, -0.5), geo.TangentVec(0.9, 0.4)
q = geo.exp_map(1.0, p, w)
print("|w|_g =", geo.metric_norm(1.0, p, w), " d(p, exp_p w) =", geo.distance(1.0, p, q))

# geodesic circles: circumference and curvature, and the inverse map
for k in (-1.0, 0.0, 1.0):
    R = 0.8
    kg = geo.circle_curvature(k, R)
    print(f"kappa={k:+.1f}  R={R}  L={geo.circle_circumference(k, R):.6f}  k_g={kg:.6f}"
          f"  R(k_g)={geo.radius_from_curvature(k, kg):.12f}")

# on the hyperbolic plane, curvature <= 1 never closes up
try:
    geo.radius_from_curvature(-1.0, 0.9)
except geo.NotClosing as exc:
    print("NotClosing:", exc)

# the sphere needs a second chart; the transition is holomorphic
z, v = geo.chart_transition(1.0, (3.0, 1.0), (0.5, 0.0))
print("antipodal chart:", z, v, " back:", geo.chart_transition(1.0, z, v)[0])
print("pole to pole:", geo.distance(1.0, (0, 0), geo.ChartPoint(1e-30, 0, geo.Chart.ANTIPODAL)),
      "= pi", math.pi)
