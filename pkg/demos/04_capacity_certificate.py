"""
Capacity and a certified lower bound
====================================

The capacity of the magnetic disc bundle of radius r is
2 pi r^2 / (sqrt(s^2 + kappa r^2) + |s|).  Composing the circle-action
Hamiltonian with a profile of slope 1 - delta gives an admissible function;
measuring its periods certifies f(max) as a lower bound.
"""
import math

from magcap import capacity as cp

print("flat     :", cp.capacity_value(0.0, 1.0, 1.0).value, "= pi")
print("sphere   :", cp.capacity_value(1.0, 1.0, 1.0).value, "= 2 pi (sqrt 2 - 1)")
print("hyperbolic:", cp.capacity_value(-1.0, 1.0, 0.6).value, "= 0.4 pi")

cert = cp.capacity_certificate(1.0, 1.0, 1.0, delta=0.2, eta=0.1, ramp_w=0.1)
for key, val in cert.to_dict().items():
    print(f"  {key:22s} {val}")

# the bound approaches the capacity as the profile sharpens
cap = cp.capacity_value(1.0, 1.0, 1.0).value
for d in (0.2, 0.05, 1e-2, 1e-3, 1e-4):
    print(f"delta=eta=w={d:g}: gap {cp.certification_gap(cap, d, d, d):.3e}")
print("2 pi (sqrt 2 - 1) =", 2 * math.pi * (math.sqrt(2) - 1))
