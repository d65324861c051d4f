"""Point vortices as a Hamiltonian system.

A vortex in the disc circles the centre at constant radius, a rotating
background has a ring of equilibria, and a vortex next to a wall with a
free stream sits still at distance 1/2.
"""
import math

import numpy as np

from eulervortex import integrate_dynamics, make_domain, routh_config, routh_maximize
from eulervortex.routh import VortexState

disc = make_domain("disc", R=1.0)

cfg = routh_config("single", disc, kappa=1.0)
tr = integrate_dynamics(VortexState([[0.5, 0.0]], [1.0]), cfg, 1e-3, 5.0, record_every=500)
for t, x, w in zip(tr.t, tr.x[:, 0], tr.W):
    print(f"t={t:4.1f}  r={np.hypot(*x):.10f}  W={w:.12f}")

rot = routh_config("rotating", disc, kappa=math.pi, alpha=1.0)
x = routh_maximize(rot).points[0]
print(f"rotating background: maximiser at radius {np.hypot(*x):.6f}, expected {math.sqrt(0.5):.6f}")

hp = make_domain("halfplane_window", a0=0.0, width=4.0, height=8.0)
fs = routh_config("freestream", hp, kappa=2 * math.pi, w_inf=1.0)
print("free stream along a wall: maximiser at", routh_maximize(fs).points[0].round(6))
