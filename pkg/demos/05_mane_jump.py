"""
The jump at the critical value
==============================

On the hyperbolic plane (kappa = -1, s = 1) every orbit below speed 1 is a
closed circle, while faster orbits drift off to infinity.  The capacity of
D_r increases to 2 pi as r -> 1 and is undefined beyond.
"""
import csv
import io

from magcap import cli

cfg = dict(cli.DEFAULTS, kappa=-1.0, s=1.0, param="r", min=0.5, max=1.2, steps=8)
buf = io.StringIO()
cli.cmd_sweep(cfg, buf)
for row in csv.DictReader(io.StringIO(buf.getvalue())):
    print(f"r={float(row['value']):.2f}  {row['status']:10s} {row['capacity_or_period']}")

cfg = dict(cli.DEFAULTS, kappa=-1.0, s=1.0)
out = io.StringIO()
cli.cmd_mane(cfg, out)
print(out.getvalue())
