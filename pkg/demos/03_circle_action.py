"""
The circle action and the swept area
====================================

Reparametrizing energy by h(E) = (2 pi / kappa)(sqrt(s^2 + 2 kappa E) - |s|)
gives a Hamiltonian whose flow has period exactly one on every level.  The
area it sweeps out along a radial path equals the oscillation of h.
"""
import math

from magcap import analysis as an
from magcap import dynamics as dy
from magcap import geometry as geo

sys = dy.MagneticSystem(1.0, 1.0)
for E in (0.1, 0.5, 1.5):
    v = math.sqrt(2 * E) / geo.rho(1.0, 0.3, 0.1)  # chart speed for kinetic energy E
    st = dy.PhaseState(0.3, 0.1, 0.6 * v, 0.8 * v)
    back = dy.circle_action_flow(sys, st, 1.0)
    rep = an.first_return(sys, st, dy.CIRCLE_ACTION)
    print(f"E={E}: |phi_1(x) - x| = {dy.phase_distance(sys, st, back):.1e}, first return {rep.period:.12f}")

exact = float(dy.h_of_energy(sys, 0.5))
print("h(1/2) =", exact)
prev = None
for n in (32, 64, 128, 256):
    err = an.swept_symplectic_area(sys, 0.5, n, n) - exact
    order = "" if prev is None else f"  order {math.log2(abs(prev / err)):.3f}"
    print(f"grid {n:4d}: area error {err:+.3e}{order}")
    prev = err
