"""Discrete representations of compactly supported measures in the plane.

A :class:`Measure` is a quadrature rule (nodes and positive weights) plus a
list of point masses.  Continuous measures carry the degree up to which the
rule integrates ``z**j * conj(z)**k`` exactly (``j + k <= exactness_degree``);
intrinsically discrete measures use ``-1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMeasure

_KINDS = ("UnitCircle", "ClosedDisk", "RealInterval", "Lemniscate", "Custom")


@dataclass(frozen=True)
class SupportDescriptor:
    kind: str
    a: float | None = None
    b: float | None = None
    m: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown support kind {self.kind!r}")
        if self.kind == "RealInterval":
            if self.a is None or self.b is None or not self.a < self.b:
                raise ValueError("RealInterval needs a < b")
        if self.kind == "Lemniscate" and (self.m is None or self.m < 1):
            raise ValueError("Lemniscate needs m >= 1")

    @classmethod
    def unit_circle(cls):
        return cls("UnitCircle")

    @classmethod
    def closed_disk(cls):
        return cls("ClosedDisk")

    @classmethod
    def interval(cls, a, b):
        return cls("RealInterval", a=float(a), b=float(b))

    @classmethod
    def lemniscate(cls, m):
        return cls("Lemniscate", m=int(m))

    @classmethod
    def custom(cls):
        return cls("Custom")

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "RealInterval":
            d.update(a=self.a, b=self.b)
        elif self.kind == "Lemniscate":
            d["m"] = self.m
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], a=d.get("a"), b=d.get("b"), m=d.get("m"))


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype).reshape(-1)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Polynomial:
    """Polynomial in ``z`` stored by ascending powers.

    Trailing zero coefficients are trimmed, so ``coeffs[-1] != 0`` unless the
    polynomial is zero (empty coefficient vector).
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else c[:0]
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def monomial(cls, n, c=1.0):
        coeffs = np.zeros(n + 1, dtype=complex)
        coeffs[n] = c
        return cls(coeffs)

    @classmethod
    def linear(cls, x):
        """The polynomial ``z - x``."""
        return cls([-complex(x), 1.0])

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def leading_coefficient(self):
        return self.coeffs[-1] if len(self.coeffs) else 0j

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            out = out * z + c
        return out if out.ndim else complex(out)

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        c = np.zeros(n, dtype=complex)
        c[: len(self.coeffs)] += self.coeffs
        c[: len(other.coeffs)] += other.coeffs
        return Polynomial(c)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return Polynomial(self.coeffs * other)
        other = _as_poly(other)
        if not len(self.coeffs) or not len(other.coeffs):
            return Polynomial([])
        return Polynomial(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Polynomial([1.0])
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, Polynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())


def _as_poly(p):
    return p if isinstance(p, Polynomial) else Polynomial([p])


@dataclass(frozen=True, eq=False)
class Measure:
    """Quadrature nodes and weights plus point masses.

    Immutable: the arrays are flagged read-only and every transform returns a
    new instance.
    """

    nodes: np.ndarray
    weights: np.ndarray
    support: SupportDescriptor
    exactness_degree: int = -1
    atom_locations: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    atom_masses: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        nodes = _frozen(self.nodes, complex)
        weights = _frozen(self.weights, float)
        locs = _frozen(self.atom_locations, complex)
        masses = _frozen(self.atom_masses, float)
        if nodes.size != weights.size:
            raise ValueError("nodes and weights differ in length")
        if locs.size != masses.size:
            raise ValueError("atom locations and masses differ in length")
        if nodes.size + locs.size < 1:
            raise ValueError("measure needs at least one point")
        if np.any(weights <= 0) or np.any(masses <= 0):
            raise ValueError("weights and atom masses must be positive")
        for name, val in (("nodes", nodes), ("weights", weights),
                          ("atom_locations", locs), ("atom_masses", masses)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "exactness_degree", int(self.exactness_degree))

    @property
    def atoms(self):
        return list(zip(self.atom_locations.tolist(), self.atom_masses.tolist()))

    @property
    def points(self):
        """All support points: quadrature nodes followed by atoms."""
        return np.concatenate([self.nodes, self.atom_locations])

    @property
    def masses(self):
        return np.concatenate([self.weights, self.atom_masses])

    @property
    def total_mass(self):
        return math.fsum(self.masses)

    def distinct_points(self):
        return np.unique(self.points).size

    def to_dict(self):
        return {
            "support": self.support.to_dict(),
            "nodes": [[z.real, z.imag] for z in self.nodes.tolist()],
            "weights": self.weights.tolist(),
            "atoms": [[z.real, z.imag, t] for z, t in self.atoms],
            "exactness_degree": self.exactness_degree,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        atoms = d.get("atoms", [])
        return cls(
            nodes=[complex(re, im) for re, im in d["nodes"]],
            weights=d["weights"],
            support=SupportDescriptor.from_dict(d["support"]),
            exactness_degree=d.get("exactness_degree", -1),
            atom_locations=[complex(a[0], a[1]) for a in atoms],
            atom_masses=[a[2] for a in atoms],
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# --- quadrature rules -------------------------------------------------------

def gauss_legendre(n, tol=1e-15, maxiter=50):
    """Gauss-Legendre nodes and weights on [-1, 1].

    Newton iteration on the three-term Legendre recurrence, started from the
    Chebyshev points.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    i = np.arange(1, n + 1)
    x = np.cos((2 * i - 1) * np.pi / (2 * n))
    for _ in range(maxiter):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return x[order], w[order]


def _legendre_and_derivative(n, x):
    p_prev = np.ones_like(x)
    p = x.copy()
    if n == 0:
        return p_prev, np.zeros_like(x)
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def unit_circle_uniform(M):
    """Trapezoid discretization of d(theta)/2pi with M equally spaced nodes."""
    if M < 1:
        raise ValueError("M must be >= 1")
    theta = 2 * np.pi * np.arange(M) / M
    return Measure(
        nodes=np.exp(1j * theta),
        weights=np.full(M, 1.0 / M),
        support=SupportDescriptor.unit_circle(),
        exactness_degree=M - 1,
    )


def disk_area(radial_order, angular_order):
    """Planar area measure on the unit disk (total mass pi).

    Gauss-Legendre in ``s = r**2`` times a uniform angular rule.  Exact for
    ``z**j conj(z)**k`` with ``j + k <= min(4*radial_order - 1, angular_order - 1)``.
    """
    if radial_order < 1 or angular_order < 1:
        raise ValueError("orders must be >= 1")
    x, w = gauss_legendre(radial_order)
    r = np.sqrt((x + 1) / 2)
    theta = 2 * np.pi * np.arange(angular_order) / angular_order
    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    # dA = r dr dtheta = ds dtheta / 2 with s in [0, 1]
    weights = np.repeat(np.pi * (w / 2) / angular_order, angular_order)
    return Measure(
        nodes=nodes,
        weights=weights,
        support=SupportDescriptor.closed_disk(),
        exactness_degree=min(4 * radial_order - 1, angular_order - 1),
    )


def interval_measure(a, b, kind, order):
    """Probability measure on [a, b] with Chebyshev (arcsine) or Legendre weight."""
    if not a < b:
        raise ValueError("need a < b")
    if order < 1:
        raise ValueError("order must be >= 1")
    if kind == "Chebyshev":
        i = np.arange(1, order + 1)
        x = np.sort(np.cos((2 * i - 1) * np.pi / (2 * order)))
        w = np.full(order, 1.0 / order)
    elif kind == "Legendre":
        x, w = gauss_legendre(order)
        w = w / 2
    else:
        raise ValueError(f"unknown interval weight {kind!r}")
    return Measure(
        nodes=(a + b) / 2 + (b - a) / 2 * x,
        weights=w,
        support=SupportDescriptor.interval(a, b),
        exactness_degree=2 * order - 1,
    )


def symmetric_intervals(a, b, kind, order):
    """Probability measure on [-b, -a] U [a, b], invariant under z -> -z."""
    if not 0 <= a < b:
        raise ValueError("need 0 <= a < b")
    half = interval_measure(a, b, kind, order)
    return Measure(
        nodes=np.concatenate([-half.nodes[::-1], half.nodes]),
        weights=np.concatenate([half.weights[::-1], half.weights]) / 2,
        support=SupportDescriptor.custom(),
        exactness_degree=half.exactness_degree,
    )


def lemniscate_boundary(m, M):
    """Equal-mass points on the curve ``|z**m - 1| = 1``.

    ``M // m`` uniformly spaced points ``w`` on the unit circle (offset by half a
    step so that ``w = -1``, whose preimage is the multiple point 0, is never
    hit) are pulled back through the ``m`` branches of ``(1 + w)**(1/m)``.
    The result is intrinsically discrete (``exactness_degree = -1``).
    """
    if m < 1 or M < m:
        raise ValueError("need m >= 1 and M >= m")
    if M % m:
        raise ValueError("M must be a multiple of m")
    K = M // m
    w = np.exp(2j * np.pi * (np.arange(K) + 0.5) / K)
    root = (1 + w) ** (1.0 / m)
    branches = np.exp(2j * np.pi * np.arange(m) / m)
    nodes = (branches[:, None] * root[None, :]).ravel()
    return Measure(
        nodes=nodes,
        weights=np.full(M, 1.0 / M),
        support=SupportDescriptor.lemniscate(m),
        exactness_degree=-1,
    )


# --- transforms -------------------------------------------------------------

def add_atom(mu, x, t):
    """Return ``mu + t * delta_x``; an atom already at ``x`` absorbs the mass."""
    if not t > 0:
        raise ValueError("atom mass must be positive")
    x = complex(x)
    locs = mu.atom_locations.copy()
    masses = mu.atom_masses.copy()
    hit = np.flatnonzero(locs == x)
    if hit.size:
        masses[hit[0]] += t
    else:
        locs = np.append(locs, x)
        masses = np.append(masses, float(t))
    return Measure(mu.nodes, mu.weights, mu.support, mu.exactness_degree, locs, masses)


def christoffel_weight(mu, x):
    """Multiply ``mu`` by ``|z - x|**2``.  Points located exactly at ``x`` drop out."""
    w = mu.weights * np.abs(mu.nodes - x) ** 2
    t = mu.atom_masses * np.abs(mu.atom_locations - x) ** 2
    keep_n, keep_a = w > 0, t > 0
    if not keep_n.any() and not keep_a.any():
        raise DegenerateMeasure("christoffel_weight annihilated all mass")
    d = mu.exactness_degree
    return Measure(
        nodes=mu.nodes[keep_n],
        weights=w[keep_n],
        support=mu.support,
        exactness_degree=max(d - 2, 0) if d >= 0 else -1,
        atom_locations=mu.atom_locations[keep_a],
        atom_masses=t[keep_a],
    )


def combine(mu1, mu2):
    """Sum of two measures.  The support becomes Custom unless both agree."""
    support = mu1.support if mu1.support == mu2.support else SupportDescriptor.custom()
    degs = (mu1.exactness_degree, mu2.exactness_degree)
    return Measure(
        nodes=np.concatenate([mu1.nodes, mu2.nodes]),
        weights=np.concatenate([mu1.weights, mu2.weights]),
        support=support,
        exactness_degree=min(degs) if min(degs) >= 0 else -1,
        atom_locations=np.concatenate([mu1.atom_locations, mu2.atom_locations]),
        atom_masses=np.concatenate([mu1.atom_masses, mu2.atom_masses]),
    )


def _csum(values):
    values = np.asarray(values, dtype=complex)
    return complex(math.fsum(values.real), math.fsum(values.imag))


def integrate(mu, values):
    """Compensated sum of ``values`` (sampled at ``mu.points``) against the masses."""
    return _csum(mu.masses * np.asarray(values))


def inner_product(mu, f, g):
    """``sum conj(f(z)) g(z)`` over nodes and atoms, conjugate-linear in ``f``."""
    pts = mu.points
    return integrate(mu, np.conj(f(pts)) * g(pts))
