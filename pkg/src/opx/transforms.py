"""Uvarov (add a point mass) and Christoffel (multiply by ``|z - x|^2``) transforms.

Closed forms computed from the basis of the original measure are checked
against a direct orthonormalization of the transformed measure.  Every
experiment returns a :class:`TransformReport` whose rows hold, per degree,
the squared monic norm ratio, the quantity ``|p_n(x)|^2 / K_{n-1}(x, x)``
and the ratio errors on a grid of z values.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .measure import add_atom, christoffel_weight
from .opoly import christoffel_monic, orthonormalize, values


def _kernel_diag(B, x, n):
    """``K_j(x, x)`` for ``j = 0..n``."""
    return np.cumsum(np.abs(values(B, complex(x), n)) ** 2)


def uvarov_norm_ratio(B, x, t, n):
    """``||Phi_n(mu + t delta_x)||^2 / ||Phi_n(mu)||^2 = (1 + t K_n(x,x)) / (1 + t K_{n-1}(x,x))``."""
    K = _kernel_diag(B, x, n)
    prev = K[n - 1] if n >= 1 else 0.0
    return float((1 + t * K[n]) / (1 + t * prev))


def nevai_condition(B, x, n):
    """``|p_n(x)|^2 / K_{n-1}(x, x)``.

    Tends to 0 exactly when adding mass at x leaves ratio asymptotics intact.
    Not bounded by 1 in general: outside the hull it stays near ``|phi(x)|^2 - 1``.
    """
    if not 1 <= n <= B.N:
        raise ValueError(f"need 1 <= n <= {B.N}")
    K = _kernel_diag(B, x, n)
    return float((K[n] - K[n - 1]) / K[n - 1])


def christoffel_closed_form(B, x, n, z):
    """``(z - x) p_{n-1}(z; nu) / p_n(z; mu)`` with ``nu = |w - x|^2 dmu`` from the basis of mu alone.

    The monic polynomial of nu comes from the kernel formula and its norm from
    ``||Phi_{n-1}(nu)||^2 = ||Phi_n(mu)||^2 + |Phi_n(x; mu)|^2 / K_{n-1}(x, x; mu)``.
    """
    if not 1 <= n <= B.N:
        raise ValueError(f"need 1 <= n <= {B.N}")
    z = np.asarray(z, dtype=complex)
    px = values(B, complex(x), n)
    K = float(np.sum(np.abs(px[:n]) ** 2))
    phi_n_x = px[n] / B.kappas[n]
    norm_sq = B.kappas[n] ** -2 + abs(phi_n_x) ** 2 / K
    num = (z - x) * christoffel_monic(B, x, n - 1, z) / np.sqrt(norm_sq)
    with np.errstate(all="ignore"):
        out = num / values(B, z, n)[n]
    return out if out.ndim else complex(out)


@dataclass
class TransformRow:
    n: int
    norm_ratio: float
    nevai_value: float
    ratio_error: dict = field(default_factory=dict)
    cross_check: float = 0.0


@dataclass
class TransformReport:
    """Per-degree diagnostics of one transform experiment."""

    kind: str
    x: complex
    t: float | None
    rows: list
    nevai_slope: float = float("nan")

    def to_dict(self):
        return {
            "kind": self.kind,
            "x": [self.x.real, self.x.imag],
            "t": self.t,
            "nevai_slope": self.nevai_slope,
            "rows": [{"n": r.n, "norm_ratio": r.norm_ratio, "nevai_value": r.nevai_value,
                      "cross_check": r.cross_check,
                      "ratio_error": [[z.real, z.imag, e] for z, e in r.ratio_error.items()]}
                     for r in self.rows],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("n", "z_re", "z_im", "ratio_error", "norm_ratio", "nevai_value", "cross_check"))
        for r in self.rows:
            for z, e in r.ratio_error.items():
                w.writerow([r.n, repr(z.real), repr(z.imag)] + [repr(float(v)) for v in (
                    e, r.norm_ratio, r.nevai_value, r.cross_check)])


def _slope(ns, vals):
    ns, vals = np.asarray(ns, float), np.asarray(vals, float)
    ok = (vals > 0) & np.isfinite(vals)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(ns[ok]), np.log(vals[ok]), 1)[0])


def _errors(num, den, z_grid, at_infinity):
    """``|num/den - 1|`` per grid point; infinite points use the leading-coefficient ratio."""
    with np.errstate(all="ignore"):
        r = np.where(np.isfinite(z_grid), num / den, at_infinity)
    return {complex(z): float(abs(v - 1)) for z, v in zip(z_grid, r)}


def _values(B, z_grid, n):
    """Basis values with infinite grid points replaced by 0 (their column is unused)."""
    return values(B, np.where(np.isfinite(z_grid), z_grid, 0), n)


def _grid(z_grid):
    return np.asarray(z_grid, dtype=complex).reshape(-1)


def uvarov_ratio_experiment(mu, x, t, z_grid, n_range):
    """``|p_n(z; mu + t delta_x) / p_n(z; mu) - 1|`` next to the closed-form norm ratio.

    ``cross_check`` is the relative gap between the closed-form norm ratio and
    ``(kappa_n(mu) / kappa_n(mu + t delta_x))^2`` from direct orthonormalization.
    """
    ns = list(n_range)
    N = max(ns)
    z_grid = _grid(z_grid)
    B = orthonormalize(mu, N)
    Bt = orthonormalize(add_atom(mu, x, t), N)
    P, Pt = _values(B, z_grid, N), _values(Bt, z_grid, N)
    rows = []
    for n in ns:
        nr = uvarov_norm_ratio(B, x, t, n)
        direct = (B.kappas[n] / Bt.kappas[n]) ** 2
        rows.append(TransformRow(n, nr, nevai_condition(B, x, n) if n >= 1 else float("nan"),
                                 _errors(Pt[n], P[n], z_grid, Bt.kappas[n] / B.kappas[n]),
                                 float(abs(direct / nr - 1))))
    return TransformReport("uvarov", complex(x), float(t), rows,
                           _slope([r.n for r in rows if r.n >= 1],
                                  [r.nevai_value for r in rows if r.n >= 1]))


def christoffel_ratio_experiment(mu, x, z_grid, n_range):
    """``|(z - x) p_{n-1}(z; nu) / p_n(z; mu) - 1|`` with ``nu = |w - x|^2 dmu``.

    ``cross_check`` is the largest relative gap over the grid between the
    direct computation and :func:`christoffel_closed_form`.
    """
    ns = [n for n in n_range if n >= 1]
    N = max(ns)
    z_grid = _grid(z_grid)
    B = orthonormalize(mu, N)
    Bx = orthonormalize(christoffel_weight(mu, x), N - 1)
    P, Px = _values(B, z_grid, N), _values(Bx, z_grid, N - 1)
    rows = []
    for n in ns:
        fin = np.isfinite(z_grid)
        direct = np.where(fin, z_grid - x, 0) * Px[n - 1]
        closed = np.where(fin, christoffel_closed_form(B, x, n, np.where(fin, z_grid, 0)), 1)
        with np.errstate(all="ignore"):
            d = direct / P[n]
            rel = np.abs(d - closed) / np.maximum(np.abs(closed), 1e-300)
        rel = np.where(np.abs(closed) == 0, np.abs(d), rel)
        rel = np.where(fin, rel, 0.0)
        rows.append(TransformRow(n, float(B.kappas[n] ** 2 / Bx.kappas[n - 1] ** 2),
                                 nevai_condition(B, x, n),
                                 _errors(direct, P[n], z_grid, Bx.kappas[n - 1] / B.kappas[n]),
                                 float(np.max(rel))))
    return TransformReport("christoffel", complex(x), None, rows,
                           _slope([r.n for r in rows], [r.nevai_value for r in rows]))


def attract_experiment(mu, x, t, z_grid, n_range):
    """``|(z - x) p_{n-1}(z; nu) / p_n(z; mu + t delta_x) - 1|``.

    Moving mass t to x and then removing it by the Christoffel transform;
    ``norm_ratio`` is the Uvarov ratio of mu at x.
    """
    ns = [n for n in n_range if n >= 1]
    N = max(ns)
    z_grid = _grid(z_grid)
    B = orthonormalize(mu, N)
    Bt = orthonormalize(add_atom(mu, x, t), N)
    Bx = orthonormalize(christoffel_weight(mu, x), N - 1)
    Pt, Px = _values(Bt, z_grid, N), _values(Bx, z_grid, N - 1)
    fac = np.where(np.isfinite(z_grid), z_grid - x, 0)
    rows = [TransformRow(n, uvarov_norm_ratio(B, x, t, n), nevai_condition(B, x, n),
                         _errors(fac * Px[n - 1], Pt[n], z_grid, Bx.kappas[n - 1] / Bt.kappas[n]))
            for n in ns]
    return TransformReport("attract", complex(x), float(t), rows,
                           _slope([r.n for r in rows], [r.nevai_value for r in rows]))
