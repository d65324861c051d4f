"""Harmonic measure and period matrix of an annulus.

The harmonic measure of the inner circle of ``0.5 < |x| < 1`` is
``log|x| / log 0.5`` and the period is ``2 pi / log 2``.
"""
import math

import numpy as np

from eulervortex import discretize, koebe_assemble, make_domain, star_flux_check

grid = discretize(make_domain("annulus", rho_in=0.5, R_out=1.0), 0.01)
ge = koebe_assemble(grid.domain, grid=grid)
for r in (0.6, 0.75, 0.9):
    z = ge._z_at(np.array([r, 0.0]))[0]
    print(f"|x|={r:.2f}  Z1={z:.5f}  exact={math.log(r) / math.log(0.5):.5f}")
print(f"omega11={ge.omega[0, 0]:.4f}  exact={2 * math.pi / math.log(2):.4f}")
print("obstacle flux of G_*:", star_flux_check(ge, (0.0, 0.7)))
