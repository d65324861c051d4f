"""Condenser capacities: a closed form and a suite of inequalities.

Run with ``python3 demos/capacity_bounds.py`` (about twenty seconds).
"""
from eulervortex import capacity_segment_ray, check_capacity_bounds, segment_ray_numeric

for s in (0.5, 1.0, 2.0, 3.0):
    r = capacity_segment_ray(s)
    num, frames = segment_ray_numeric(s)
    print(f"s={s:3.1f}  closed form {r.capa:.6f}  grid {num:.6f} (frames {frames})  "
          f"2pi/capa={r.lhs:.4f} <= log 16(1+s)={r.bound:.4f}: {r.bound_ok}")

# concentric discs are the equality case, so this entry needs the fine mesh
for c in check_capacity_bounds(h=0.01, resolutions=(1,)):
    print(f"{c.kind:9s} {c.name:28s} lhs={c.lhs:.4f} bound={c.rhs:.4f} ok={c.ok}")
