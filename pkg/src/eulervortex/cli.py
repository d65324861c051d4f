"""Command-line front end.

Usage::

    eulervortex COMMAND --config run.yaml [--out DIR] [--threads N] [--verbose]

The config is YAML (JSON is a subset) with the blocks ``domain``,
``physics``, ``numerics`` and ``output`` plus an optional ``preset`` that
supplies defaults.  Any entry can be overridden by an environment variable
``EULERVORTEX_<BLOCK>__<KEY>`` (value parsed as YAML), e.g.
``EULERVORTEX_NUMERICS__H=0.01``.

Every run writes its artifacts, a ``manifest.json`` (resolved config,
versions, wall time, sha256 of every artifact) and exits with 0 on
success, 2 on invalid input and 3 on numerical failure; failures also
write ``error.json`` and print it to stdout.
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import math
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigInvalid, NumericalError, ValidationError, VortexError

log = logging.getLogger("eulervortex")

ENV_PREFIX = "EULERVORTEX_"
COMMANDS = ("profile", "green", "routh", "dynamics", "solve", "pair", "sweep", "capacity",
            "boundary-asymptotics")
BLOCKS = ("domain", "physics", "numerics", "output")

DEFAULTS = {
    "domain": {"kind": "disc", "R": 1.0},
    "physics": {"p": 3.0, "kappa": 2 * math.pi, "kappa_minus": -2 * math.pi,
                "eps": 0.05, "eps_minus": None, "alpha": 0.0, "w_inf": 0.0,
                "v_n": None, "gammas": None, "routh_mode": None, "positions": None,
                "kappas": None, "source": None, "probe": [1.0, 0.0], "xbar": None,
                "lift": None, "s": None},
    "numerics": {"h": 1 / 128, "tol": 1e-6, "etol": 1e-10, "maxiter": 500, "theta": 0.5,
                 "anderson": 5, "dr": 1e-4, "dt": 1e-3, "T": 1.0, "record_every": 10,
                 "scan_n": 64, "green_mode": "auto", "transect_n": 101,
                 "boundary_eps": [2e-3, 1e-3], "capacity_h": 0.01,
                 "capacity_resolutions": [1, 2], "segment_h": 0.05, "segment_L": 8.0,
                 "symmetric": True},
    "output": {"dir": "out", "field_csv": True},
}

PRESETS = {
    "disc": {"domain": {"kind": "disc", "R": 1.0},
             "physics": {"kappa": 2 * math.pi, "eps": [0.1, 0.05, 0.025]},
             "numerics": {"h": 1 / 256}},
    "rotating": {"domain": {"kind": "disc", "R": 1.0},
                 "physics": {"kappa": math.pi, "alpha": 1.0, "eps": [0.1, 0.05, 0.025]},
                 "numerics": {"h": 1 / 256}},
    "pair": {"domain": {"kind": "disc", "R": 1.0},
             "physics": {"kappa": 2 * math.pi, "kappa_minus": -2 * math.pi, "eps": 0.05},
             "numerics": {"h": 1 / 256}},
    "translating_pair": {"domain": {"kind": "halfplane_window", "a0": 0.0, "width": 4.0,
                                    "height": 8.0},
                         "physics": {"kappa": 2 * math.pi, "w_inf": 1.0,
                                     "routh_mode": "freestream"},
                         "numerics": {"h": 1 / 64}},
    "annulus": {"domain": {"kind": "annulus", "rho_in": 0.5, "R_out": 1.0},
                "physics": {"kappa": 2 * math.pi, "gammas": [0.0]},
                "numerics": {"h": 1 / 128}},
    "turkington": {"domain": {"kind": "disc_complement_window", "R_obs": 1.0, "width": 8.0,
                              "height": 8.0},
                   "physics": {"kappa": 2 * math.pi}, "numerics": {"h": 1 / 32}},
}


# -- configuration -------------------------------------------------------------------

def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "domain":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


DOMAIN_KEYS = ("kind", "R", "center", "a", "b", "c", "d", "rho_in", "R_out", "a0", "width",
               "height", "R_obs", "obstacles")


def _key(block, sub):
    # environment names are upper case; restore the spelling used in the config
    names = DOMAIN_KEYS if block == "domain" else DEFAULTS[block]
    for k in names:
        if k.lower() == sub:
            return k
    raise ConfigInvalid(f"unknown {block} key {sub!r}")


def _env_overrides(env) -> tuple[str | None, dict]:
    preset, over = None, {}
    for key, val in sorted(env.items()):
        if not key.startswith(ENV_PREFIX):
            continue
        name = key[len(ENV_PREFIX):].lower()
        if name == "preset":
            preset = val
            continue
        block, sep, sub = name.partition("__")
        if not sep or block not in BLOCKS:
            raise ConfigInvalid(f"environment override {key} is not of the form "
                                f"{ENV_PREFIX}<BLOCK>__<KEY>")
        over.setdefault(block, {})[_key(block, sub)] = yaml.safe_load(val)
    return preset, over


def load_config(path: str | None, env=None, extra: dict | None = None) -> dict:
    """Resolve a run configuration.

    Precedence, lowest first: built-in defaults, the preset, the config
    file, environment overrides, then ``extra`` (command-line flags).  A
    ``domain`` block replaces the preset's domain as a whole; environment
    overrides edit single domain entries.
    """
    raw = {}
    if path is not None:
        try:
            with open(path) as fh:
                raw = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigInvalid(f"config {path} is not valid YAML/JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigInvalid("the config must be a mapping")
    unknown = set(raw) - set(BLOCKS) - {"preset"}
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
    env_preset, env_over = _env_overrides(os.environ if env is None else env)
    preset = env_preset or raw.get("preset")
    cfg = copy.deepcopy(DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigInvalid(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        cfg = _merge(cfg, PRESETS[preset])
    cfg = _merge(cfg, {k: v for k, v in raw.items() if k in BLOCKS})
    for block, vals in env_over.items():
        cfg[block].update(vals)
    cfg = _merge(cfg, extra or {})
    cfg["preset"] = preset
    for block in BLOCKS:
        if not isinstance(cfg[block], dict):
            raise ConfigInvalid(f"config block {block!r} must be a mapping")
    for block in ("physics", "numerics", "output"):
        bad = set(cfg[block]) - set(DEFAULTS[block])
        if bad:
            raise ConfigInvalid(f"unknown {block} keys: {sorted(bad)}")
    return cfg


def _num(cfg, block, key, lo=None, hi=None, allow_none=False):
    v = cfg[block].get(key)
    if v is None and allow_none:
        return None
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ConfigInvalid(f"{block}.{key} must be a number, got {v!r}") from None
    if not math.isfinite(v) or (lo is not None and v <= lo) or (hi is not None and v >= hi):
        raise ConfigInvalid(f"{block}.{key}={v} is outside ({lo}, {hi})")
    return v


# -- builders ----------------------------------------------------------------------

def _domain(cfg):
    from .domain import make_domain

    d = dict(cfg["domain"])
    kind = d.pop("kind", None)
    if kind is None:
        raise ConfigInvalid("domain.kind is required")
    obstacles = d.pop("obstacles", ())
    return make_domain(kind, obstacles=obstacles, **d)


def _vn(spec, d):
    """Normal velocity ``amplitude * cos(mode * theta)`` about the domain centre."""
    if spec is None:
        return None
    if not isinstance(spec, dict):
        raise ConfigInvalid("physics.v_n must be a mapping {amplitude, mode}")
    a = float(spec.get("amplitude", 1.0))
    m = int(spec.get("mode", 1))
    c = d.center

    def v_n(x1, x2):
        return a * np.cos(m * np.arctan2(np.asarray(x2) - c[1], np.asarray(x1) - c[0]))
    return v_n


def _background(cfg, d, grid=None):
    from .routh import BackgroundField, build_stream_q
    from .semilinear import cutoff_lift

    ph = cfg["physics"]
    alpha = float(ph["alpha"] or 0.0)
    w_inf = float(ph["w_inf"] or 0.0)
    if ph["v_n"] is not None or ph["gammas"] is not None:
        bg = build_stream_q(d, v_n=_vn(ph["v_n"], d), gammas=ph["gammas"], alpha=alpha,
                            grid=grid, h=cfg["numerics"]["h"])
    elif w_inf:
        bg = BackgroundField.uniform_stream(w_inf, d.params.get("a0", 0.0))
    elif alpha:
        bg = BackgroundField.rotation(alpha)
    else:
        bg = BackgroundField.zero()
    lift = ph["lift"]
    if lift is not None:
        bg = cutoff_lift(bg, lift["center"], lift["r0"], lift["r1"], lift["amount"])
    return bg


def _routh_cfg(cfg, d):
    from .routh import routh_config

    ph = cfg["physics"]
    mode = ph["routh_mode"]
    if mode is None:
        if ph["w_inf"]:
            mode = "freestream"
        elif ph["alpha"] and ph["v_n"] is None and ph["gammas"] is None:
            mode = "rotating"
        elif d.obstacles:
            mode = "star"
        else:
            mode = "single"
    bg = None
    if mode in ("single", "star", "pair") and (ph["v_n"] is not None or ph["gammas"] is not None
                                               or ph["lift"] is not None):
        bg = _background(cfg, d)
    kappas = ph["kappas"] or ()
    return routh_config(mode, d, kappa=ph["kappa"], kappa_minus=ph["kappa_minus"],
                        alpha=ph["alpha"] or 0.0, w_inf=ph["w_inf"] or 0.0, kappas=kappas,
                        background=bg, h=cfg["numerics"]["h"])


def _problem(cfg, mode="single", eps=None):
    from .domain import discretize
    from .semilinear import ProblemSpec

    ph, nu = cfg["physics"], cfg["numerics"]
    d = _domain(cfg)
    h = _num(cfg, "numerics", "h", lo=0)
    g = discretize(d, h)
    bg = _background(cfg, d, grid=g)
    if eps is None:
        eps = ph["eps"]
        if isinstance(eps, (list, tuple)):
            eps = eps[-1]
    kw = {}
    if mode == "pair":
        kw = {"kappa_minus": float(ph["kappa_minus"]),
              "eps_minus": None if ph["eps_minus"] is None else float(ph["eps_minus"])}
    return ProblemSpec(g, float(ph["p"]), float(ph["kappa"]), float(eps), background=bg,
                       mode=mode, **kw)


def _solve_kwargs(cfg):
    nu = cfg["numerics"]
    return {"theta": float(nu["theta"]), "tol": float(nu["tol"]), "etol": float(nu["etol"]),
            "maxiter": int(nu["maxiter"]), "anderson": int(nu["anderson"])}


# -- output helpers ----------------------------------------------------------------------

def _clean(obj):
    """JSON-ready copy with numpy scalars/arrays converted and floats rounded to 12 digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if not math.isfinite(f):
            return None
        return float(f"{f:.12g}")
    return obj


class Artifacts:
    """Collects the files written by one command."""

    def __init__(self, out: Path):
        self.out = out
        self.files: list[Path] = []
        out.mkdir(parents=True, exist_ok=True)

    def json(self, name, obj):
        path = self.out / name
        path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")
        self.files.append(path)
        return path

    def csv(self, name, header, rows):
        path = self.out / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([f"{float(v):.12g}" for v in row])
        self.files.append(path)
        return path

    def manifest(self, command, cfg, wall, status):
        import scipy

        from . import __version__

        files = {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in self.files}
        path = self.out / "manifest.json"
        path.write_text(json.dumps(_clean({
            "command": command, "status": status, "config": cfg, "wall_time_s": wall,
            "versions": {"eulervortex": __version__, "numpy": np.__version__,
                         "scipy": scipy.__version__, "python": platform.python_version()},
            "files": files}), indent=2, sort_keys=True) + "\n")
        return path


def _field_rows(g, u, omega):
    pts = g.points
    return np.column_stack([pts[:, 0], pts[:, 1], u, omega])


# -- commands ---------------------------------------------------------------------------

def cmd_profile(cfg, art):
    from .radial_profile import limit_constant, profile_for_kappa, solve_unit_profile

    ph = cfg["physics"]
    prof = solve_unit_profile(_num(cfg, "physics", "p", lo=1), float(cfg["numerics"]["dr"]))
    pk = profile_for_kappa(prof, _num(cfg, "physics", "kappa", lo=0))
    step = max(1, (len(prof.r) - 1) // 1000)
    art.csv("profile.csv", ["r", "V"], np.column_stack([prof.r[::step], prof.v[::step]]))
    rec = {"p": prof.p, "gamma": prof.gamma, "V0": prof.v0, "V_prime_1": prof.slope,
           "kappa": ph["kappa"], "rho_kappa": pk.rho, "C": limit_constant(pk)}
    art.json("profile.json", rec)
    return rec


def cmd_green(cfg, art):
    from .domain import discretize
    from .green import make_evaluator

    d = _domain(cfg)
    nu, ph = cfg["numerics"], cfg["physics"]
    h = _num(cfg, "numerics", "h", lo=0)
    g = discretize(d, h)
    ge = make_evaluator(d, nu["green_mode"], grid=g)
    pts = g.points
    if ph["source"] is not None:
        y = np.asarray(ph["source"], dtype=float)
    else:
        # default source: the grid node farthest from the boundary
        dist = d.nearest_boundary(pts[:, 0], pts[:, 1])[2]
        y = pts[int(np.argmax(dist))]
    if not ge.contains(y):
        from .errors import OutsideDomain
        raise OutsideDomain(f"source ({y[0]:g}, {y[1]:g}) is not inside the domain")
    # skip the singular node at the source
    far = np.hypot(pts[:, 0] - y[0], pts[:, 1] - y[1]) > 0.5 * h
    G = np.array([ge.green(p, y) if f else np.nan for p, f in zip(pts, far)])
    keep = np.isfinite(G)
    art.csv("green_field.csv", ["x1", "x2", "G"], np.column_stack([pts[keep], G[keep]]))
    # Robin transect from the source towards the nearest boundary point
    p1, p2, dist, *_ = d.nearest_boundary(np.array([y[0]]), np.array([y[1]]))
    end = np.array([p1[0], p2[0]])
    n = int(nu["transect_n"])
    ts = np.linspace(0.0, 1.0, n + 1)[:-1]
    rows = []
    for t in ts:
        x = y + t * (end - y)
        if ge.contains(x) and d.contains(x[0], x[1], tol=2 * h if ge.mode != "analytic" else 0):
            rows.append([x[0], x[1], ge.robin(x)])
    art.csv("robin_transect.csv", ["x1", "x2", "H"], rows)
    rec = {"mode": ge.mode, "source": y, "robin_at_source": ge.robin(y),
           "n_field": int(keep.sum()), "n_transect": len(rows)}
    art.json("green.json", rec)
    return rec


def cmd_routh(cfg, art):
    from .routh import routh_eval, routh_maximize

    d = _domain(cfg)
    rc = _routh_cfg(cfg, d)
    n = int(cfg["numerics"]["scan_n"])
    sym = bool(cfg["numerics"]["symmetric"])
    res = routh_maximize(rc, n=n, symmetric=sym)
    xmin, xmax, ymin, ymax = d.bbox
    rows = []
    for a in np.linspace(xmin, xmax, n + 1):
        for b in np.linspace(ymin, ymax, n + 1):
            x = np.array([a, b])
            if not (d.contains(a, b, tol=1e-9) and rc.green.contains(x)):
                continue
            pts = x if rc.mode != "pair" else np.array([x, [a, 2 * d.center[1] - b]])
            try:
                w = routh_eval(rc, pts)
            except VortexError:
                continue
            if np.isfinite(w):
                rows.append([a, b, w])
    art.csv("routh_scan.csv", ["x1", "x2", "W"], rows)
    rec = {"mode": rc.mode, "argmax": res.points, "value": res.value,
           "near_boundary": res.near_boundary, "scan_best": res.scan_best}
    art.json("routh_max.json", rec)
    return rec


def cmd_dynamics(cfg, art):
    from .routh import VortexState, integrate_dynamics, routh_maximize

    ph, nu = cfg["physics"], cfg["numerics"]
    d = _domain(cfg) if ph["routh_mode"] != "free" else None
    if d is None:
        from .routh import routh_config
        rc = routh_config("free", None, kappas=ph["kappas"] or ())
    else:
        rc = _routh_cfg(cfg, d)
    pos = ph["positions"]
    if pos is None:
        pos = routh_maximize(rc, n=int(nu["scan_n"]), symmetric=bool(nu["symmetric"])).points
    state = VortexState(np.asarray(pos, dtype=float), rc.strengths)
    traj = integrate_dynamics(state, rc, float(nu["dt"]), float(nu["T"]),
                              record_every=int(nu["record_every"]))
    nv = traj.x.shape[1]
    header = ["t"] + [f"x{i + 1}_{c}" for i in range(nv) for c in (1, 2)] + ["W"]
    art.csv("trajectory.csv", header, traj.rows())
    rec = {"mode": rc.mode, "start": traj.x[0], "end": traj.x[-1],
           "W_drift": float(traj.W[-1] - traj.W[0]),
           "displacement": float(np.max(np.hypot(*(traj.x[-1] - traj.x[0]).T)))}
    art.json("dynamics.json", rec)
    return rec


def _solve_common(cfg, art, mode):
    from .semilinear import diagnostics, solve_pair, solve_single

    spec = _problem(cfg, mode)
    kw = _solve_kwargs(cfg)
    if mode == "pair":
        res = solve_pair(spec, symmetric=bool(cfg["numerics"]["symmetric"]), **kw)
    else:
        res = solve_single(spec, **kw)
    dg = diagnostics(res.u, spec)
    if cfg["output"]["field_csv"]:
        art.csv("field.csv", ["x1", "x2", "u", "omega"], _field_rows(spec.grid, res.u, dg.omega))
    rec = dg.as_dict()
    rec.update({"iterations": res.iterations, "converged": res.converged,
                "nehari": res.nehari, "pde_residual": res.pde_residual, "eps": spec.eps})
    art.json("diagnostics.json", rec)
    return rec


def cmd_solve(cfg, art):
    return _solve_common(cfg, art, "single")


def cmd_pair(cfg, art):
    return _solve_common(cfg, art, "pair")


def cmd_sweep(cfg, art):
    from .semilinear import epsilon_sweep

    eps = cfg["physics"]["eps"]
    if not isinstance(eps, (list, tuple)):
        raise ConfigInvalid("sweep needs physics.eps to be a list of decreasing values")
    spec = _problem(cfg, "single", eps=eps[0])
    rep = epsilon_sweep(spec, eps, solve_kwargs=_solve_kwargs(cfg))
    rec = rep.as_dict()
    rec["final_radius"] = rep.location["radii"][-1]
    rec["final_center"] = rep.centers[-1]
    art.json("sweep.json", rec)
    return rec


def cmd_capacity(cfg, art):
    from .capacity import capacity_segment_ray, check_capacity_bounds, segment_ray_numeric

    ph, nu = cfg["physics"], cfg["numerics"]
    if ph["s"] is not None:
        s = float(ph["s"])
        r = capacity_segment_ray(s)
        rec = {"s": s, "capa": r.capa, "bound": r.bound, "bound_ok": r.bound_ok,
               "two_pi_over_capa": r.lhs}
        if nu.get("segment_h"):
            num, frames = segment_ray_numeric(s, h=float(nu["segment_h"]), L=float(nu["segment_L"]))
            rec["numeric"] = num
            rec["numeric_frames"] = {str(k): v for k, v in frames.items()}
        art.json("capacity.json", rec)
        return rec
    checks = check_capacity_bounds(float(nu["capacity_h"]),
                                   resolutions=tuple(nu["capacity_resolutions"]))
    rec = {"shapes": [c.as_dict() for c in checks],
           "violations": sum(not c.ok for c in checks)}
    art.json("capacity.json", rec)
    return rec


def cmd_boundary(cfg, art):
    from .green import boundary_h_expansion, make_evaluator

    d = _domain(cfg)
    ph, nu = cfg["physics"], cfg["numerics"]
    ge = make_evaluator(d, nu["green_mode"], h=nu["h"])
    xbar = ph["xbar"]
    if xbar is None:
        p1, p2, *_ = d.nearest_boundary(np.array([d.center[0] + 1e3]), np.array([d.center[1]]))
        xbar = [float(p1[0]), float(p2[0])]
    rep = boundary_h_expansion(ge, xbar, ph["probe"], nu["boundary_eps"])
    rec = {"xbar": xbar, "probe": ph["probe"], "epsilons": rep.epsilons, "ratios": rep.ratios,
           "coefficient": rep.limit, "expected": rep.expected, "curvature": rep.curvature,
           "rel_error": rep.rel_error}
    art.json("boundary_asymptotics.json", rec)
    return rec


HANDLERS = {"profile": cmd_profile, "green": cmd_green, "routh": cmd_routh,
            "dynamics": cmd_dynamics, "solve": cmd_solve, "pair": cmd_pair,
            "sweep": cmd_sweep, "capacity": cmd_capacity, "boundary-asymptotics": cmd_boundary}


# -- entry point ----------------------------------------------------------------------------

def _set_threads(n):
    if n is None:
        return None
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        log.warning("threadpoolctl is not installed; --threads has no effect")
        return None
    return threadpool_limits(limits=int(n))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eulervortex",
                                 description="Desingularized Euler point vortices on grids.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="YAML or JSON run configuration (required except for "
                    "'capacity --s')")
    ap.add_argument("--out", help="output directory (overrides output.dir)")
    ap.add_argument("--threads", type=int, help="BLAS/OpenMP thread cap")
    ap.add_argument("--verbose", action="store_true")
    ap.add_argument("--s", type=float, help="segment-ray gap parameter for 'capacity'")
    return ap


def run(command: str, cfg: dict, out: Path) -> tuple[int, dict]:
    """Execute one command on a resolved config; returns (exit status, record)."""
    art = Artifacts(out)
    t0 = time.perf_counter()
    try:
        rec = HANDLERS[command](cfg, art)
        status = 0
    except (ValidationError, NumericalError, VortexError, ValueError) as exc:
        status = 3 if isinstance(exc, NumericalError) else 2
        rec = {"error": type(exc).__name__, "message": str(exc), "exit_code": status}
        art.json("error.json", rec)
    art.manifest(command, cfg, time.perf_counter() - t0, status)
    return status, rec


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    extra = {}
    if args.s is not None:
        extra["physics"] = {"s": args.s}
    if args.out:
        extra["output"] = {"dir": args.out}
    try:
        if args.config is None and not (args.command == "capacity" and args.s is not None):
            raise ConfigInvalid(f"--config is required for '{args.command}'")
        cfg = load_config(args.config, extra=extra)
    except ConfigInvalid as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": 2}
        print(json.dumps(err, sort_keys=True))
        return 2
    limiter = _set_threads(args.threads)
    try:
        status, rec = run(args.command, cfg, Path(cfg["output"]["dir"]))
    finally:
        if limiter is not None:
            limiter.unregister()
    if status:
        print(json.dumps(_clean(rec), sort_keys=True))
    elif args.verbose:
        print(json.dumps(_clean(rec), indent=2, sort_keys=True))
    return status


if __name__ == "__main__":
    sys.exit(main())
