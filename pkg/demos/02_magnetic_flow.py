"""
Magnetic geodesics are geodesic circles
=======================================

Under a constant magnetic field of strength s a unit charge moving at speed
|v| follows a curve of geodesic curvature |s| / |v|.  With a strong field the
curve is a closed geodesic circle and the period is 2 pi / sqrt(s^2 + 2 kappa E).
"""
import math

from magcap import analysis as an
from magcap import dynamics as dy
from magcap import geometry as geo

for k, s, v in [(0.0, 1.0, 1.0), (1.0, 1.0, 1.0), (-1.0, 2.0, 1.0), (1.0, 0.3, 2.0)]:
    sys = dy.MagneticSystem(k, s)
    st = dy.PhaseState(0.0, 0.0, v, 0.0)
    rep = an.first_return(sys, st)
    traj = dy.integrate(sys, st, dy.KINETIC, rep.period, n_samples=401)
    fit = an.fit_geodesic_circle(sys, traj)
    T = dy.period_of_energy(sys, 0.5 * v * v)
    R = geo.radius_from_curvature(k, abs(s) / v)
    print(f"kappa={k:+.0f} s={s} |v|={v}:  T={rep.period:.10f} (law {T:.10f})  "
          f"R={fit.radius:.8f} (law {R:.8f})  swaps={traj.stats.chart_swaps}  "
          f"drift={traj.stats.max_energy_drift:.1e}")

# the measured curvature of a sampled orbit
sys = dy.MagneticSystem(-1.0, 1.5)
traj = dy.integrate(sys, dy.PhaseState(0.1, 0.2, 0.7, 0.1), dy.KINETIC, 3.0, 1e-12, n_samples=301)
speed = math.sqrt(2 * traj.energies(sys)[0])
print("k_g measured:", an.measure_geodesic_curvature(sys, traj), " |s|/|v|:", 1.5 / speed)
