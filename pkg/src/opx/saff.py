"""Weighted Cauchy integrals of orthonormal polynomials.

For ``deg Q <= n`` and ``z`` off the support,

    Q(z) / p_n(z) = int conj(p_n) Q / (z - w) dmu  /  int |p_n|^2 / (z - w) dmu,

and outside the convex hull the denominator is bounded below by
``dist(z, hull) / max_w |z - w|^2``.  This module evaluates both sides on the
discrete measure, the lower bound, and the error decomposition used to show
``Q_n / p_n -> 1`` when ``||Q_n|| -> 1`` and the leading coefficients match.
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass

import numpy as np

from .errors import NearZeroDenominator, ZInsideHull
from .measure import integrate
from .opoly import BasisExpansion, values

HULL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ConvexHullData:
    """Counterclockwise hull vertices; one or two vertices mark a degenerate hull."""

    vertices: np.ndarray

    @property
    def kind(self):
        return {1: "point", 2: "segment"}.get(len(self.vertices), "polygon")

    @property
    def degenerate(self):
        return len(self.vertices) < 3

    @property
    def radius(self):
        return float(np.max(np.abs(self.vertices)))

    def distance(self, z):
        """Euclidean distance from z (scalar or array) to the hull; 0 inside."""
        z = np.asarray(z, dtype=complex)
        flat = z.reshape(-1)
        v = self.vertices
        if len(v) == 1:
            d = np.abs(flat - v[0])
        else:
            a = v
            b = np.roll(v, -1) if len(v) > 2 else v[::-1]
            d = np.min(_segment_distance(flat[:, None], a[None, :], b[None, :]), axis=1)
            if len(v) > 2:
                edge = b - a
                cross = (np.conj(edge)[None, :] * (flat[:, None] - a[None, :])).imag
                d = np.where(np.all(cross >= 0, axis=1), 0.0, d)
        d = d.reshape(z.shape)
        return d if d.ndim else float(d)

    def farthest(self, z):
        """``max_w |z - w|`` over the hull, attained at a vertex."""
        return float(np.max(np.abs(z - self.vertices)))


def _segment_distance(p, a, b):
    ab = b - a
    denom = np.abs(ab) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(denom > 0, ((p - a) * np.conj(ab)).real / denom, 0.0)
    s = np.clip(s, 0.0, 1.0)
    return np.abs(p - (a + s * ab))


def _hull_vertices(points):
    pts = sorted(set(zip(points.real.tolist(), points.imag.tolist())))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def convex_hull(mu):
    """Monotone-chain hull of the nodes and atom locations of ``mu``."""
    return _cached_hull(mu)


@functools.lru_cache(maxsize=64)
def _cached_hull(mu):
    v = _hull_vertices(np.asarray(mu.points, dtype=complex))
    return ConvexHullData(np.array([complex(x, y) for x, y in v], dtype=complex))


def hull_from_points(points):
    v = _hull_vertices(np.asarray(points, dtype=complex).reshape(-1))
    return ConvexHullData(np.array([complex(x, y) for x, y in v], dtype=complex))


def lower_bound_az(hull, z):
    """``dist(z, hull) / max_{w in hull} |z - w|^2``."""
    d = hull.distance(complex(z))
    if d <= HULL_TOL:
        raise ZInsideHull(f"z = {complex(z)} is within {HULL_TOL} of the convex hull")
    return d / hull.farthest(complex(z)) ** 2


@dataclass(frozen=True)
class CauchyEvaluation:
    z: complex
    n: int
    numerator: complex
    denominator: complex
    ratio: complex
    bound_az: float


def _require_measure(B):
    if B.measure is None or B.node_values is None:
        raise ValueError("Cauchy integrals need a basis built from a Measure")
    return B.measure


def _values_at_points(B, Q):
    if isinstance(Q, BasisExpansion) and Q.basis is B:
        return Q.at_nodes()
    return np.asarray(Q(B.measure.points), dtype=complex)


def saff_ratio(B, n, Q, z):
    """Both weighted Cauchy integrals and their quotient at ``z``."""
    mu = _require_measure(B)
    if Q.degree > n:
        raise ValueError(f"deg Q = {Q.degree} exceeds n = {n}")
    z = complex(z)
    bound = lower_bound_az(convex_hull(mu), z)
    pn = B.node_values[n]
    kern = 1.0 / (z - mu.points)
    # Q(w)(1 - p_m(w)/p_m(z))/(z - w) has degree n - 1 and is orthogonal to p_n,
    # so weighting by p_m(w)/p_m(z) removes the cancelling part of the numerator sum
    m = n - max(Q.degree, 0)
    weight = B.node_values[m] / values(B, z, m)[m]
    num = integrate(mu, np.conj(pn) * _values_at_points(B, Q) * weight * kern)
    den = integrate(mu, np.abs(pn) ** 2 * kern)
    if abs(den) < bound / 10:
        raise NearZeroDenominator(
            f"|denominator| = {abs(den):.3e} < A_z/10 = {bound / 10:.3e} at z = {z}")
    return CauchyEvaluation(z, n, num, den, num / den, bound)


def orthogonality_residual(B, n, Q, z):
    """``Q(z) int conj(p_n)/(z-w) dmu - int conj(p_n) Q/(z-w) dmu``; zero in exact arithmetic."""
    mu = _require_measure(B)
    if Q.degree > n:
        raise ValueError(f"deg Q = {Q.degree} exceeds n = {n}")
    z = complex(z)
    lower_bound_az(convex_hull(mu), z)
    pn = np.conj(B.node_values[n])
    kern = 1.0 / (z - mu.points)
    return complex(Q(z)) * integrate(mu, pn * kern) - integrate(mu, pn * _values_at_points(B, Q) * kern)


@dataclass(frozen=True)
class NisRow:
    n: int
    z: complex
    ratio_err: float
    norm_gap: float
    leading_gap: float
    schwarz_envelope: float


NIS_HEADER = ("n", "z_re", "z_im", "ratio_err", "norm_gap", "leading_gap", "schwarz_envelope")


def verify_nis(B, Q_family, z_grid, n_range):
    """Tabulate ``|Q_n(z)/p_n(z) - 1|`` with the quantities that control it.

    ``Q_family(n)`` must return a polynomial-like object of degree exactly n
    (callable, with ``degree`` and ``leading_coefficient``).  Each row carries
    the certified bound ``||Q_n - p_n|| / (dist(z, hull) |denominator|)``
    obtained from the Schwarz inequality.
    """
    mu = _require_measure(B)
    hull = convex_hull(mu)
    z_grid = np.asarray(z_grid, dtype=complex).reshape(-1)
    rows = []
    for n in n_range:
        Q = Q_family(n)
        if Q.degree != n:
            raise ValueError(f"Q_{n} has degree {Q.degree}")
        pn = B.node_values[n]
        qw = _values_at_points(B, Q)
        norm = np.sqrt(integrate(mu, np.abs(qw) ** 2).real)
        diff = np.sqrt(integrate(mu, np.abs(qw - pn) ** 2).real)
        leading_gap = abs(Q.leading_coefficient / B.kappas[n] - 1)
        pz = values(B, z_grid, n)[n]
        qz = np.asarray(Q(z_grid))
        for z, p_val, q_val in zip(z_grid, pz, qz):
            ev = saff_ratio(B, n, Q, z)
            envelope = diff / (hull.distance(z) * abs(ev.denominator))
            rows.append(NisRow(n, complex(z), float(abs(q_val / p_val - 1)), float(abs(norm - 1)),
                               float(leading_gap), float(envelope)))
    return rows


def write_nis_csv(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(NIS_HEADER)
    for r in rows:
        w.writerow([r.n, repr(r.z.real), repr(r.z.imag), repr(r.ratio_err),
                    repr(r.norm_gap), repr(r.leading_gap), repr(r.schwarz_envelope)])


# --- evaluation grids -------------------------------------------------------

STANDARD_RADII = (1.25, 1.5, 2.0, 4.0)


def standard_grid(mu=None, radii=STANDARD_RADII, count=16):
    """``count`` points on each circle ``|z| = R * scale``.

    ``scale`` is 1 for circle and disk supports and the hull radius otherwise.
    """
    scale = 1.0
    if mu is not None and mu.support.kind not in ("UnitCircle", "ClosedDisk"):
        scale = convex_hull(mu).radius
    theta = 2 * np.pi * np.arange(count) / count
    return np.concatenate([R * scale * np.exp(1j * theta) for R in radii])


def exterior_points(hull, d, count):
    """``count`` points at distance exactly ``d`` from the hull.

    Points are spread by arc length over the boundary and pushed out along the
    outward edge normal (a circle of radius d for a one-point hull).
    """
    v = hull.vertices
    if len(v) == 1:
        return v[0] + d * np.exp(2j * np.pi * np.arange(count) / count)
    if len(v) == 2:
        a = np.array([v[0], v[1]])
        b = np.array([v[1], v[0]])
    else:
        a, b = v, np.roll(v, -1)
    lengths = np.abs(b - a)
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    s = (np.arange(count) + 0.5) / count * cum[-1]
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(a) - 1)
    frac = (s - cum[idx]) / lengths[idx]
    base = a[idx] + frac * (b[idx] - a[idx])
    # outward normal of a counterclockwise edge is the edge direction turned by -90 degrees
    normal = -1j * (b[idx] - a[idx]) / lengths[idx]
    return base + d * normal
