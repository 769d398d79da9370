"""Ratio asymptotics experiments.

Density-one index sets (built by widening the gaps of a sparse excluded set or
by thresholding leading-coefficient ratios), ratio traces
``F(z) p_{n-s}(z) / p_n(z)``, three-term recurrence coefficients of real
measures, the exterior map of [-2, 2], moments of ``|p_n|^2 dmu`` and their
Cesaro averages of the Cauchy kernel.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NotCircleMeasure, NotRealMeasure, OnSlit
from .measure import Measure, Polynomial, SupportDescriptor, integrate
from .opoly import BasisExpansion, multiply, orthonormalize, values


@dataclass(frozen=True, eq=False)
class SubsequenceMask:
    """Indices ``1..horizon`` minus the sorted array ``excluded``."""

    excluded: np.ndarray
    horizon: int

    def __post_init__(self):
        ex = np.unique(np.asarray(self.excluded, dtype=np.int64))
        ex = ex[(ex >= 1) & (ex <= self.horizon)]
        ex.setflags(write=False)
        object.__setattr__(self, "excluded", ex)

    def density(self, n=None):
        n = self.horizon if n is None else n
        if not 1 <= n <= self.horizon:
            raise ValueError(f"density needs 1 <= n <= {self.horizon}")
        return 1.0 - np.searchsorted(self.excluded, n, side="right") / n

    def retained(self, n):
        if not 1 <= n <= self.horizon:
            return False
        i = np.searchsorted(self.excluded, n)
        return not (i < self.excluded.size and self.excluded[i] == n)

    def retained_indices(self, lo=1, hi=None):
        hi = self.horizon if hi is None else hi
        idx = np.arange(max(lo, 1), hi + 1)
        return idx[~np.isin(idx, self.excluded)]

    def to_dict(self):
        return {"excluded": self.excluded.tolist(), "horizon": int(self.horizon),
                "density_at_horizon": self.density()}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def log_schedule(ratio):
    """Default gap width ``floor(2 sqrt(log2(n / |M cap [n]|)))``."""
    with np.errstate(divide="ignore"):
        return np.floor(2 * np.sqrt(np.log2(np.maximum(ratio, 1.0))))


def power_schedule(p):
    """Gap width ``floor((n / |M cap [n]|)**p)``."""
    return lambda ratio: np.floor(np.asarray(ratio, dtype=float) ** p)


def gap_schedule(excluded, horizon, schedule=log_schedule):
    """Non-decreasing widths ``k_n = max(1, schedule(n / max(1, |M cap [n]|)))``.

    Capped at n and made monotone by a running maximum.  Index 0 is unused.
    Any schedule that is unbounded in the ratio gives ``k_n -> infinity`` with
    ``k_n |M cap [n]| / n -> 0`` for a density-zero excluded set.
    """
    ind = np.zeros(horizon + 1, dtype=bool)
    ex = np.asarray(sorted(excluded), dtype=np.int64)
    ind[ex[(ex >= 1) & (ex <= horizon)]] = True
    counts = np.cumsum(ind)
    n = np.arange(horizon + 1)
    k = np.asarray(schedule(n / np.maximum(1, counts))).astype(np.int64)
    k = np.clip(k, 1, np.maximum(n, 1))
    return np.maximum.accumulate(k)


def widen_gaps(excluded, horizon, schedule=log_schedule):
    """Replace every excluded m by ``[m - k_m + 1, m + k_m - 1]``, clipped to ``[1, horizon]``."""
    ex = np.asarray(sorted(set(int(m) for m in excluded)), dtype=np.int64)
    if ex.size and (ex[0] < 1 or ex[-1] > horizon):
        raise ValueError("excluded indices must lie in 1..horizon")
    k = gap_schedule(ex, horizon, schedule)
    cover = np.zeros(horizon + 2, dtype=np.int64)
    if ex.size:
        lo = np.maximum(1, ex - k[ex] + 1)
        hi = np.minimum(horizon, ex + k[ex] - 1)
        np.add.at(cover, lo, 1)
        np.add.at(cover, hi + 1, -1)
    covered = np.cumsum(cover)[: horizon + 1] > 0
    covered[0] = False
    return SubsequenceMask(np.flatnonzero(covered), horizon)


def shift_threshold(mask, original, ell):
    """First index after which every retained m has ``[m-ell, m+ell]`` clear of ``original``.

    Returns ``horizon + 1`` when the property never settles inside the horizon.
    """
    H = mask.horizon
    orig = np.asarray([m for m in original if 1 <= m <= H + ell], dtype=np.int64)
    near = np.zeros(H + 1, dtype=bool)
    for s in range(-ell, ell + 1):
        idx = orig - s
        idx = idx[(idx >= 1) & (idx <= H)]
        near[idx] = True
    keep = np.ones(H + 1, dtype=bool)
    keep[0] = False
    keep[mask.excluded] = False
    offenders = np.flatnonzero(keep & near)
    return int(offenders[-1]) + 1 if offenders.size else 1


def kappa_ratio_mask(B, step, eps):
    """Keep n with ``|kappa_n / kappa_{n-step} - 1| <= eps``; indices below ``step`` are excluded."""
    if not 1 <= step <= B.N:
        raise ValueError("need 1 <= step <= N")
    n = np.arange(1, B.N + 1)
    ok = np.zeros(n.size, dtype=bool)
    big = n >= step
    ok[big] = np.abs(B.kappas[n[big]] / B.kappas[n[big] - step] - 1) <= eps
    return SubsequenceMask(n[~ok], B.N)


# --- ratio traces -----------------------------------------------------------

@dataclass(frozen=True)
class RatioTrace:
    """Rows ``(n, z, value)`` sorted by n and then by position in the z grid."""

    rows: tuple

    def column(self, z):
        sel = [(n, v) for n, zz, v in self.rows if zz == z or (np.isinf(z) and np.isinf(zz))]
        return np.array([n for n, _ in sel]), np.array([v for _, v in sel])

    def to_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("n", "z_re", "z_im", "val_re", "val_im"))
        for n, z, v in self.rows:
            zr, zi = ("inf", "0.0") if np.isinf(z) else (repr(z.real), repr(z.imag))
            w.writerow([n, zr, zi, repr(v.real), repr(v.imag)])


def _is_infinite(z):
    return not np.isfinite(z)


def ratio_trace(B, z_grid, n_range, mask=None, mode="consecutive_z", F=None, step=None):
    """``factor(z) p_{n-step}(z) / p_n(z)`` for the retained n.

    ``mode`` is ``"consecutive_z"`` (factor z, step 1), ``"joukowski"``
    (factor is the exterior map of [-2, 2], step 1) or ``"faber"`` (factor is
    the polynomial ``F``, step defaults to ``deg F``).  Infinite grid points
    evaluate the limit ``lead(factor) kappa_{n-step} / kappa_n``.  Vanishing or
    non-finite ``p_n(z)`` yields a NaN value instead of an error.
    """
    if mode == "consecutive_z":
        factor, lead, step = (lambda z: z), 1.0, 1
    elif mode == "joukowski":
        factor, lead, step = joukowski_phi, 1.0, 1
    elif mode == "faber":
        if F is None:
            raise ValueError("faber mode needs F")
        step = F.degree if step is None else step
        factor, lead = F, F.leading_coefficient
    else:
        raise ValueError(f"unknown mode {mode!r}")
    z_grid = [complex(z) for z in np.asarray(z_grid, dtype=complex).reshape(-1)]
    ns = [n for n in n_range if n >= step and (mask is None or mask.retained(n))]
    if ns and max(ns) > B.N:
        raise ValueError(f"n up to {max(ns)} exceeds basis size {B.N}")
    finite = np.array([z for z in z_grid if not _is_infinite(z)], dtype=complex)
    P = values(B, finite, max(ns)) if ns and finite.size else None
    fz = np.asarray(factor(finite)) if finite.size else finite
    rows = []
    for n in ns:
        j = 0
        for z in z_grid:
            if _is_infinite(z):
                deg = getattr(factor, "degree", step)
                val = lead * B.kappas[n - step] / B.kappas[n] if deg == step else (
                    0.0 if deg < step else np.inf)
                rows.append((n, complex(np.inf), complex(val)))
                continue
            pn = P[n, j]
            with np.errstate(all="ignore"):
                if not np.isfinite(pn) or abs(pn) < 1e-300:
                    val = complex(np.nan, np.nan)
                else:
                    val = complex(fz[j] * P[n - step, j] / pn)
            rows.append((n, z, val))
            j += 1
    return RatioTrace(tuple(rows))


# --- real line --------------------------------------------------------------

@dataclass(frozen=True)
class JacobiCoeffs:
    """``x p_n = a_{n+1} p_{n+1} + b_{n+1} p_n + a_n p_{n-1}``; ``a[i]`` holds a_{i+1}."""

    a: np.ndarray
    b: np.ndarray


def jacobi_from_basis(B, tol=1e-10):
    H = B.hessenberg
    N = H.shape[1]
    far = np.triu(H[:N, :N], 2)
    if np.max(np.abs(far), initial=0.0) > tol:
        warnings.warn(f"Hessenberg table is not tridiagonal (max far entry "
                      f"{np.max(np.abs(far)):.2e})", RuntimeWarning, stacklevel=2)
    return JacobiCoeffs(a=H[np.arange(1, N + 1), np.arange(N)].real.copy(),
                        b=np.diagonal(H[:N, :N]).real.copy())


def jacobi_coeffs(mu, N):
    """Recurrence coefficients a_1..a_N, b_1..b_N of a measure on the real line."""
    if np.max(np.abs(mu.points.imag)) > 1e-12:
        raise NotRealMeasure("measure has points off the real axis")
    return jacobi_from_basis(orthonormalize(mu, N))


def jacobi_measure(a, b):
    """Discrete probability measure whose recurrence coefficients are ``a``, ``b``.

    Gauss rule of the truncated Jacobi matrix: nodes are its eigenvalues and
    weights the squared first eigenvector components.  Coefficients up to
    ``a_{len(b)-1}``, ``b_{len(b)}`` are reproduced.
    """
    b = np.asarray(b, dtype=float)
    a = np.asarray(a, dtype=float)[: b.size - 1]
    J = np.diag(b) + np.diag(a, 1) + np.diag(a, -1)
    x, V = np.linalg.eigh(J)
    w = V[0] ** 2
    keep = w > 0
    return Measure(x[keep], w[keep] / w[keep].sum(), SupportDescriptor.custom(), -1)


def joukowski_phi(w):
    """Exterior conformal map of [-2, 2]: ``(w + sqrt(w^2 - 4)) / 2`` with ``|phi| > 1``."""
    w = np.asarray(w, dtype=complex)
    d = np.where(np.abs(w.real) <= 2, np.abs(w.imag), np.hypot(np.abs(w.real) - 2, w.imag))
    if np.any(d < 1e-12):
        raise OnSlit("argument lies on the slit [-2, 2]")
    # product of principal roots: analytic off [-2, 2] and ~ w at infinity
    out = (w + np.sqrt(w - 2) * np.sqrt(w + 2)) / 2
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class EquilibriumCauchy:
    """Cauchy transform ``z -> int d omega(w) / (z - w)`` of an equilibrium measure."""

    kind: str

    def __post_init__(self):
        if self.kind not in ("ClosedDisk", "UnitCircle", "RealInterval"):
            raise ValueError(f"no closed form for {self.kind!r}")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "RealInterval":
            out = 1.0 / (np.sqrt(z - 2) * np.sqrt(z + 2))
        else:
            out = 1.0 / z
        return out if out.ndim else complex(out)


def weak_moments(B, n, k, conj_power=0, method="hessenberg"):
    """``int w^k conj(w)^conj_power |p_n(w)|^2 dmu(w)``.

    The default route reads the moment off powers of the Hessenberg table,
    ``<z^c p_n, z^k p_n>``, which needs no quadrature and works for bases from
    Verblunsky coefficients; it needs ``n + max(k, conj_power) <= N``.
    ``method="quadrature"`` sums over the measure's points instead.
    """
    if method == "quadrature":
        mu = B.measure
        if mu is None:
            raise ValueError("quadrature route needs a Measure-backed basis")
        z = mu.points
        return integrate(mu, z ** k * np.conj(z) ** conj_power * np.abs(B.node_values[n]) ** 2)
    u = multiply(B, Polynomial.monomial(conj_power), n).coeffs
    v = multiply(B, Polynomial.monomial(k), n).coeffs
    m = min(u.size, v.size)
    return complex(np.vdot(u[:m], v[:m]))


def cesaro_cauchy(B, z, n):
    """``(n+1)^{-1} sum_{j<=n} int |p_j(w)|^2 / (z - w) dmu(w)``."""
    mu = B.measure
    if mu is None or B.node_values is None:
        raise ValueError("cesaro_cauchy needs a Measure-backed basis")
    if n > B.N:
        raise ValueError(f"n = {n} exceeds basis size {B.N}")
    dens = np.sum(np.abs(B.node_values[: n + 1]) ** 2, axis=0)
    return integrate(mu, dens / (complex(z) - mu.points)) / (n + 1)


# --- circle L2 check --------------------------------------------------------

@dataclass(frozen=True)
class CircaseRow:
    n: int
    l2_distance_sq: float
    bs_residual: float


def _on_circle(B):
    if B.alphas is not None:
        return True
    mu = B.measure
    return mu is not None and np.all(np.abs(np.abs(mu.points) - 1) <= 1e-12)


def _norm_sq(B, Q):
    if isinstance(Q, BasisExpansion) and Q.basis is B:
        return Q.norm() ** 2
    if B.measure is None:
        raise ValueError("need a basis expansion or a Measure-backed basis to take norms")
    return integrate(B.measure, np.abs(Q(B.measure.points)) ** 2).real


def circase_check(B, Q_family, n_range, M_grid):
    """``int |Q_n/p_n - 1|^2 dtheta/2pi`` on an M_grid-point circle rule.

    Each row also reports ``|int |Q_n/p_n|^2 dtheta/2pi - ||Q_n||^2_mu|``, which
    vanishes because ``dtheta / (2 pi |p_n|^2)`` and ``mu`` share their moments
    up to degree n.
    """
    if not _on_circle(B):
        raise NotCircleMeasure("basis is not built from a measure on the unit circle")
    grid = np.exp(2j * np.pi * np.arange(M_grid) / M_grid)
    ns = list(n_range)
    P = values(B, grid, max(ns))
    rows = []
    for n in ns:
        Q = Q_family(n)
        r = np.asarray(Q(grid)) / P[n]
        dist = float(np.mean(np.abs(r - 1) ** 2))
        lhs = float(np.mean(np.abs(r) ** 2))
        rows.append(CircaseRow(n, dist, abs(lhs - _norm_sq(B, Q))))
    return rows


def shifted_family(B, F=None, step=1):
    """``n -> F(z) p_{n-step}(z)`` as basis expansions (``F = z`` by default)."""
    F = Polynomial.monomial(1) if F is None else F
    return lambda n: multiply(B, F, n - step)
