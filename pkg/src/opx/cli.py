"""Command line experiment runner.

Each subcommand reads an optional JSON config, applies flag overrides, runs one
experiment and writes ``<out>.csv`` plus ``<out>.meta.json``.  The CSV depends
only on the config, so reruns are byte-identical; timing lives in the meta file.

    opx ratio --config area.json --out runs/area_ratio
    opx mask --excluded dyadic cubes --horizon 100000 --out runs/mask
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (kappa_ratio_mask, ratio_trace, shift_threshold, shifted_family,
                          weak_moments, widen_gaps)
from .errors import OpxError
from .faber import keps_experiment
from .measure import (Measure, disk_area, interval_measure, lemniscate_boundary,
                      symmetric_intervals, unit_circle_uniform)
from .opoly import BasisExpansion, VerblunskySeq, orthonormalize, verblunsky_to_basis
from .saff import STANDARD_RADII, standard_grid, verify_nis, write_nis_csv
from .transforms import (attract_experiment, christoffel_ratio_experiment,
                         uvarov_ratio_experiment)

EXPERIMENTS = ("basis", "ratio", "nis", "uvarov", "christoffel", "attract",
               "weak-moments", "keps", "mask")
Z_PRESETS = ("standard", "unit", "infinity", "explicit")

DEFAULTS = {
    "measure": {"builder": "circle"},
    "n_min": 1,
    "n_max": 50,
    "z_preset": "standard",
    "z": None,
    "seed": 0,
    "x": [1.0, 0.0],
    "t": 1.0,
    "mode": "consecutive_z",
    "kappa_eps": None,
    "step": 1,
    "k_max": 3,
    "excluded": ["dyadic"],
    "horizon": 100000,
    "ell": 5,
    "q_family": "shifted",
}


# --- measures ---------------------------------------------------------------

def _circle(p, N):
    return unit_circle_uniform(int(p.get("M", max(256, 4 * N + 4))))


def _area(p, N):
    A = int(p.get("A", 2 * N + 2))
    R = int(p.get("R", (2 * N + 1) // 4 + 2))
    return disk_area(R, A)


def _interval(kind):
    def build(p, N):
        return interval_measure(p.get("a", -2.0), p.get("b", 2.0), kind,
                                int(p.get("order", 2 * N + 2)))
    return build


def _two_intervals(p, N):
    return symmetric_intervals(p.get("a", 1.0), p.get("b", 2.0), p.get("kind", "Chebyshev"),
                               int(p.get("order", 2 * N + 2)))


def _lemniscate(p, N):
    m = int(p.get("m", 2))
    M = int(p.get("M", m * max(512, 8 * N)))
    return lemniscate_boundary(m, M)


def _file(p, N):
    return Measure.from_json(Path(p["path"]).read_text())


BUILDERS = {
    "circle": _circle,
    "area": _area,
    "chebyshev": _interval("Chebyshev"),
    "legendre": _interval("Legendre"),
    "two_intervals": _two_intervals,
    "lemniscate": _lemniscate,
    "file": _file,
    "verblunsky": None,
}


def build_measure(cfg, N):
    """The configured measure, or None for a Verblunsky source."""
    p = dict(cfg["measure"])
    name = p.pop("builder")
    return None if name == "verblunsky" else BUILDERS[name](p, N)


def build_basis(cfg, N):
    """Return ``(measure or None, basis)`` for the configured source."""
    mu = build_measure(cfg, N)
    if mu is not None:
        return mu, orthonormalize(mu, N)
    p = cfg["measure"]
    seq = (VerblunskySeq.from_values(p["values"]) if "values" in p
           else VerblunskySeq.dyadic(p.get("value", 0.5), p.get("first_power", 1)))
    return None, verblunsky_to_basis(seq, N)


def _need_measure(mu, what):
    if mu is None:
        raise ValueError(f"{what} needs a measure, not a Verblunsky source")
    return mu


# --- grids and index sets ---------------------------------------------------

def z_grid(cfg, mu):
    if cfg.get("z") is not None:
        return np.array([complex(*z) if isinstance(z, (list, tuple)) else complex(z)
                         for z in cfg["z"]])
    preset = cfg["z_preset"]
    if preset == "infinity":
        return np.array([complex(np.inf)])
    if preset == "unit":
        return standard_grid(None, STANDARD_RADII)
    if preset == "standard":
        return standard_grid(mu, STANDARD_RADII)
    raise ValueError("z_preset 'explicit' needs a 'z' list")


def excluded_set(spec, horizon):
    named = {
        "dyadic": lambda: [2 ** j for j in range(1, int(math.log2(horizon)) + 1)],
        "squares": lambda: [j * j for j in range(1, math.isqrt(horizon) + 1)],
        "cubes": lambda: [j ** 3 for j in range(1, round(horizon ** (1 / 3)) + 2)
                          if j ** 3 <= horizon],
    }
    out = set()
    for item in spec:
        if isinstance(item, str) and item.isdigit():
            item = int(item)
        if isinstance(item, str):
            if item not in named:
                raise ValueError(f"unknown excluded family {item!r}; known: {sorted(named)}")
            out.update(named[item]())
        else:
            out.add(int(item))
    return sorted(out)


def _n_range(cfg):
    return range(int(cfg["n_min"]), int(cfg["n_max"]) + 1)


# --- experiments ------------------------------------------------------------

def _fmt(v):
    return repr(float(v))


def run_basis(cfg, fh):
    mu, B = build_basis(cfg, cfg["n_max"])
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("n", "kappa", "monic_norm"))
    for n in range(B.N + 1):
        w.writerow([n, _fmt(B.kappas[n]), _fmt(B.monic_norms[n])])
    return {"N": B.N, "source_hash": B.source_hash()}


def run_ratio(cfg, fh):
    mu, B = build_basis(cfg, cfg["n_max"])
    mask = None
    if cfg["kappa_eps"] is not None:
        mask = kappa_ratio_mask(B, cfg["step"], cfg["kappa_eps"])
    tr = ratio_trace(B, z_grid(cfg, mu), _n_range(cfg), mask=mask, mode=cfg["mode"])
    tr.to_csv(fh)
    last = tr.rows[-1] if tr.rows else None
    return {"rows": len(tr.rows),
            "last": None if last is None else [last[0], _jsonable(last[2])],
            "mask_density": None if mask is None else mask.density()}


def run_nis(cfg, fh):
    mu, B = build_basis(cfg, cfg["n_max"])
    _need_measure(mu, "nis")
    rng = np.random.default_rng(cfg["seed"])
    if cfg["q_family"] == "shifted":
        family = shifted_family(B)
    elif cfg["q_family"] == "random":
        # p_n plus a random lower-degree part of norm ~ 1/n
        pert = {n: rng.standard_normal(n) + 1j * rng.standard_normal(n) for n in _n_range(cfg)}

        def family(n):
            c = np.zeros(n + 1, dtype=complex)
            c[n] = 1.0
            c[:n] = pert[n] / (np.linalg.norm(pert[n]) * n)
            return BasisExpansion(B, c)
    else:
        raise ValueError(f"unknown q_family {cfg['q_family']!r}")
    rows = verify_nis(B, family, z_grid(cfg, mu), _n_range(cfg))
    write_nis_csv(rows, fh)
    return {"rows": len(rows), "max_ratio_err": max((r.ratio_err for r in rows), default=None)}


def _transform(kind):
    def run(cfg, fh):
        N = cfg["n_max"]
        mu = _need_measure(build_measure(cfg, N), kind)
        x = complex(*cfg["x"])
        zs = z_grid(cfg, mu)
        if kind == "uvarov":
            rep = uvarov_ratio_experiment(mu, x, cfg["t"], zs, range(0, N + 1))
        elif kind == "christoffel":
            rep = christoffel_ratio_experiment(mu, x, zs, _n_range(cfg))
        else:
            rep = attract_experiment(mu, x, cfg["t"], zs, _n_range(cfg))
        rep.to_csv(fh)
        return {"nevai_slope": rep.nevai_slope,
                "max_cross_check": max(r.cross_check for r in rep.rows)}
    return run


def run_weak_moments(cfg, fh):
    k_max = int(cfg["k_max"])
    mu, B = build_basis(cfg, cfg["n_max"] + k_max)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("n", "k", "moment_re", "moment_im"))
    for n in range(0, cfg["n_max"] + 1):
        for k in range(0, k_max + 1):
            m = weak_moments(B, n, k)
            w.writerow([n, k, _fmt(m.real), _fmt(m.imag)])
    return {"k_max": k_max}


def run_keps(cfg, fh):
    mu, B = build_basis(cfg, cfg["n_max"])
    m = mu.support.m if mu is not None and mu.support.kind == "Lemniscate" else cfg["step"]
    mask = None
    if cfg["kappa_eps"] is not None:
        mask = kappa_ratio_mask(B, m, cfg["kappa_eps"])
    tr = keps_experiment(B, z_grid(cfg, mu), _n_range(cfg), mask=mask, m=m)
    tr.to_csv(fh)
    return {"m": m, "rows": len(tr.rows),
            "mask_density": None if mask is None else mask.density()}


def run_mask(cfg, fh):
    H = int(cfg["horizon"])
    original = excluded_set(cfg["excluded"], H)
    mask = widen_gaps(original, H)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("excluded",))
    for m in mask.excluded.tolist():
        w.writerow([m])
    ell = int(cfg["ell"])
    return {"density_at_horizon": mask.density(), "original_count": len(original),
            "widened_count": int(mask.excluded.size), "ell": ell,
            "shift_threshold": shift_threshold(mask, original, ell)}


RUNNERS = {
    "basis": run_basis, "ratio": run_ratio, "nis": run_nis,
    "uvarov": _transform("uvarov"), "christoffel": _transform("christoffel"),
    "attract": _transform("attract"), "weak-moments": run_weak_moments,
    "keps": run_keps, "mask": run_mask,
}


# --- plumbing ---------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def validate(cfg):
    if cfg["experiment"] not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {cfg['experiment']!r}")
    builder = cfg["measure"].get("builder")
    if builder not in BUILDERS:
        raise ValueError(f"unknown measure builder {builder!r}; known: {sorted(BUILDERS)}")
    if builder == "file" and not Path(cfg["measure"].get("path", "")).is_file():
        raise FileNotFoundError(f"measure file {cfg['measure'].get('path')!r} not found")
    if not 0 <= cfg["n_min"] <= cfg["n_max"]:
        raise ValueError("need 0 <= n_min <= n_max")
    if cfg["z_preset"] not in Z_PRESETS:
        raise ValueError(f"unknown z preset {cfg['z_preset']!r}; known: {Z_PRESETS}")
    if cfg["z_preset"] == "explicit" and cfg.get("z") is None:
        raise ValueError("z_preset 'explicit' needs a 'z' list")
    if cfg["experiment"] == "mask":
        excluded_set(cfg["excluded"], int(cfg["horizon"]))


def load_config(args):
    cfg = json.loads(json.dumps(DEFAULTS))
    if args.config:
        cfg.update(json.loads(Path(args.config).read_text()))
    cfg["experiment"] = args.experiment
    overrides = {
        "n_max": args.n_max, "n_min": args.n_min, "z_preset": args.z_preset,
        "seed": args.seed, "t": args.t, "x": args.x, "horizon": args.horizon,
        "excluded": args.excluded, "kappa_eps": args.kappa_eps, "mode": args.mode,
    }
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    if args.measure:
        cfg["measure"] = {"builder": args.measure}
    if args.z:
        cfg["z"] = [[float(re), float(im)] for re, im in args.z]
        cfg["z_preset"] = "explicit"
    if args.out:
        cfg["out"] = args.out
    cfg.setdefault("out", args.experiment)
    return cfg


def _thread_limit():
    n = os.environ.get("OPX_THREADS")
    if not n:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(int(n))


def run(cfg, dry_run=False):
    """Run one experiment; returns the meta dictionary."""
    validate(cfg)
    if dry_run:
        return {"config": cfg, "dry_run": True}
    out = Path(cfg["out"])
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    with _thread_limit(), open(f"{out}.csv", "w", newline="") as fh:
        summary = RUNNERS[cfg["experiment"]](cfg, fh)
    meta = {"config": cfg, "version": __version__, "wall_time_s": time.perf_counter() - start,
            "summary": summary}
    Path(f"{out}.meta.json").write_text(json.dumps(meta, indent=2, default=_jsonable) + "\n")
    return meta


def build_parser():
    ap = argparse.ArgumentParser(prog="opx", description="Orthogonal polynomial ratio experiments")
    sub = ap.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--out", help="output prefix for <out>.csv and <out>.meta.json")
        p.add_argument("--n-max", type=int)
        p.add_argument("--n-min", type=int)
        p.add_argument("--z-preset", choices=Z_PRESETS)
        p.add_argument("--z", nargs=2, action="append", metavar=("RE", "IM"))
        p.add_argument("--seed", type=int)
        p.add_argument("--measure", choices=sorted(BUILDERS))
        p.add_argument("--x", nargs=2, type=float, metavar=("RE", "IM"))
        p.add_argument("--t", type=float)
        p.add_argument("--mode", choices=("consecutive_z", "joukowski"))
        p.add_argument("--kappa-eps", type=float)
        p.add_argument("--horizon", type=int)
        p.add_argument("--excluded", nargs="+")
        p.add_argument("--dry-run", action="store_true", help="validate the config and exit")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        meta = run(cfg, dry_run=args.dry_run)
    except (OpxError, ValueError, KeyError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else ""
        print(f"{type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    if args.dry_run:
        print(f"config ok: {cfg['experiment']}")
    else:
        print(f"wrote {cfg['out']}.csv")
    return 0 if meta else 1


if __name__ == "__main__":
    sys.exit(main())
