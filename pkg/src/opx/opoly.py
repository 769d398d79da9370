"""Orthonormal polynomial bases.

Two constructors produce an :class:`OrthoBasis`: :func:`orthonormalize` runs a
Stieltjes/Arnoldi procedure (multiply by ``z``, orthogonalize twice) on the
values of the basis at the measure's points, and :func:`verblunsky_to_basis`
runs the Szego recursion.  Either way the basis is described by its upper
Hessenberg table ``h`` with ``z p_k = sum_{j <= k+1} h[j, k] p_j`` and the
leading coefficients ``kappa_n > 0``.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateMeasure, ExactnessWarning, IndexOutOfRange, InvalidVerblunsky
from .measure import Measure, Polynomial, SupportDescriptor

#: candidate rejected when orthogonalization removes all but this fraction of z*p_k
DEGENERACY_RTOL = 1e-13


@dataclass(frozen=True)
class VerblunskySeq:
    """Verblunsky coefficients ``alpha_n`` given by a rule ``n -> alpha_n``."""

    rule: Callable[[int], complex]
    name: str = "custom"

    def take(self, n):
        a = np.array([complex(self.rule(k)) for k in range(n)], dtype=complex)
        bad = np.flatnonzero(np.abs(a) >= 1)
        if bad.size:
            raise InvalidVerblunsky(f"|alpha_{bad[0]}| = {abs(a[bad[0]])} >= 1")
        return a

    @classmethod
    def free(cls):
        """All coefficients zero: the measure d(theta)/2pi."""
        return cls(lambda n: 0.0, name="free")

    @classmethod
    def from_values(cls, values, name="finite"):
        vals = [complex(v) for v in values]
        return cls(lambda n: vals[n] if n < len(vals) else 0.0, name=name)

    @classmethod
    def dyadic(cls, value=0.5, first_power=1):
        """``alpha_n = value`` when ``n = 2**j`` for ``j >= first_power``, else 0.

        With the defaults the ratio ``kappa_{n-1}/kappa_n`` drops to
        ``sqrt(1 - value**2)`` exactly at ``n = 2**j + 1``.
        """
        def rule(n):
            return value if n >= 2 ** first_power and n & (n - 1) == 0 else 0.0
        return cls(rule, name=f"dyadic({value},{first_power})")


@dataclass(frozen=True, eq=False)
class OrthoBasis:
    hessenberg: np.ndarray
    kappas: np.ndarray
    source: object = None
    node_values: np.ndarray | None = None
    alphas: np.ndarray | None = None

    @property
    def N(self):
        return len(self.kappas) - 1

    @property
    def monic_norms(self):
        return 1.0 / self.kappas

    @property
    def measure(self):
        return self.source if isinstance(self.source, Measure) else None

    def source_hash(self):
        if isinstance(self.source, Measure):
            payload = self.source.to_json(sort_keys=True)
        elif self.alphas is not None:
            payload = "verblunsky:" + json.dumps([[a.real, a.imag] for a in self.alphas.tolist()])
        else:
            return None
        return hashlib.sha256(payload.encode()).hexdigest()

    def to_dict(self):
        h = self.hessenberg
        return {
            "N": self.N,
            "kappas": self.kappas.tolist(),
            "hessenberg": [[[v.real, v.imag] for v in row] for row in h.tolist()],
            "source_hash": self.source_hash(),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        h = np.array([[complex(re, im) for re, im in row] for row in d["hessenberg"]],
                     dtype=complex).reshape(d["N"] + 1, d["N"])
        return cls(hessenberg=h, kappas=np.array(d["kappas"], dtype=float))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def orthonormalize(mu, N):
    """Orthonormal polynomials p_0..p_N of ``mu`` with positive leading coefficients."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if mu.distinct_points() < N + 1:
        raise DegenerateMeasure(
            f"measure has {mu.distinct_points()} distinct points, degree {N} needs {N + 1}")
    if 0 <= mu.exactness_degree < 2 * N:
        warnings.warn(f"degree {N} needs exactness {2 * N}, quadrature has "
                      f"{mu.exactness_degree}", ExactnessWarning, stacklevel=2)
    z = mu.points
    sw = np.sqrt(mu.masses)
    mass = mu.total_mass
    # rows hold sqrt(w) * p_k(z) so that inner products are plain dot products
    U = np.zeros((N + 1, z.size), dtype=complex)
    H = np.zeros((N + 1, N), dtype=complex)
    kappas = np.empty(N + 1)
    kappas[0] = 1.0 / np.sqrt(mass)
    U[0] = sw * kappas[0]
    for k in range(N):
        u = z * U[k]
        before = np.linalg.norm(u)
        Q = U[: k + 1]
        h = Q.conj() @ u
        u = u - h @ Q
        h2 = Q.conj() @ u
        u = u - h2 @ Q
        beta = np.linalg.norm(u)
        if not beta > DEGENERACY_RTOL * before:
            raise DegenerateMeasure(f"monic norm collapsed at degree {k + 1}")
        H[: k + 1, k] = h + h2
        H[k + 1, k] = beta
        U[k + 1] = u / beta
        kappas[k + 1] = kappas[k] / beta
    return OrthoBasis(hessenberg=H, kappas=kappas, source=mu, node_values=U / sw)


def _ggt_hessenberg(alphas):
    """Hessenberg table of ``z`` in the orthonormal basis built from ``alphas``."""
    N = alphas.size
    rho = np.sqrt(1.0 - np.abs(alphas) ** 2)
    logrho = np.concatenate([[0.0], np.cumsum(np.log(rho))])
    a_prev = np.concatenate([[-1.0], alphas[:-1]]) if N else np.zeros(0)
    j = np.arange(N)[:, None]
    l = np.arange(N)[None, :]
    with np.errstate(under="ignore"):
        prod = np.exp(np.where(j <= l, logrho[np.minimum(l, N)] - logrho[np.minimum(j, N)], 0.0))
    H = np.zeros((N + 1, N), dtype=complex)
    H[:N] = np.where(j <= l, -np.conj(alphas)[None, :] * a_prev[:, None] * prod, 0.0)
    H[np.arange(1, N + 1), np.arange(N)] = rho
    return H


def verblunsky_to_basis(alpha, N):
    """Orthonormal basis of the circle measure with Verblunsky coefficients ``alpha``."""
    if isinstance(alpha, VerblunskySeq):
        a = alpha.take(N)
        source = alpha
    else:
        a = np.asarray(alpha, dtype=complex)[:N]
        if a.size < N:
            raise ValueError(f"need {N} coefficients, got {a.size}")
        if np.any(np.abs(a) >= 1):
            raise InvalidVerblunsky("all |alpha_n| must be < 1")
        source = VerblunskySeq.from_values(a)
    rho = np.sqrt(1.0 - np.abs(a) ** 2)
    kappas = np.exp(-np.concatenate([[0.0], np.cumsum(np.log(rho))]))
    return OrthoBasis(hessenberg=_ggt_hessenberg(a), kappas=kappas, source=source, alphas=a)


def bernstein_szego_measure(alpha, n, M):
    """Circle measure ``d(theta) / (2 pi |phi_n(e^{i theta})|^2)`` on M nodes.

    Its first ``n`` Verblunsky coefficients are ``alpha_0..alpha_{n-1}`` and the
    rest vanish, so it reproduces p_0..p_n of any measure sharing those
    coefficients (up to trapezoid error, which decays geometrically in M).
    """
    B = verblunsky_to_basis(alpha, n)
    theta = 2 * np.pi * np.arange(M) / M
    nodes = np.exp(1j * theta)
    phi = values(B, nodes, n)[n]
    w = 1.0 / (M * np.abs(phi) ** 2)
    return Measure(nodes, w, SupportDescriptor.unit_circle(), exactness_degree=-1)


# --- evaluation -------------------------------------------------------------

def _check_degree(B, n):
    if not 0 <= n <= B.N:
        raise IndexOutOfRange(f"degree {n} outside 0..{B.N}")


def values(B, z, n_max=None):
    """Array ``P`` with ``P[k] = p_k(z)`` for ``k = 0..n_max`` (z may be an array)."""
    n_max = B.N if n_max is None else n_max
    _check_degree(B, n_max)
    z = np.asarray(z, dtype=complex)
    P = np.zeros((n_max + 1,) + z.shape, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        if B.alphas is not None:
            _szego_values(B.alphas, z, P)
        else:
            P[0] = B.kappas[0]
            H = B.hessenberg
            for k in range(n_max):
                acc = np.tensordot(H[: k + 1, k], P[: k + 1], axes=1)
                P[k + 1] = (z * P[k] - acc) / H[k + 1, k]
    return P


def _szego_values(alphas, z, P):
    phi = np.ones_like(z)
    phistar = np.ones_like(z)
    P[0] = phi
    for k in range(P.shape[0] - 1):
        a = alphas[k]
        rho = np.sqrt(1.0 - abs(a) ** 2)
        zphi = z * phi
        phi, phistar = (zphi - np.conj(a) * phistar) / rho, (phistar - a * zphi) / rho
        P[k + 1] = phi


def derivatives(B, z, n_max=None):
    """``D[k] = p_k'(z)`` via the differentiated Hessenberg recurrence."""
    n_max = B.N if n_max is None else n_max
    _check_degree(B, n_max)
    z = np.asarray(z, dtype=complex)
    P = values(B, z, n_max)
    D = np.zeros_like(P)
    H = B.hessenberg
    for k in range(n_max):
        acc = np.tensordot(H[: k + 1, k], D[: k + 1], axes=1)
        D[k + 1] = (P[k] + z * D[k] - acc) / H[k + 1, k]
    return D


def evaluate(B, n, z):
    """p_n(z), computed by recurrence rather than from monomial coefficients."""
    _check_degree(B, n)
    out = values(B, z, n)[n]
    return out if out.ndim else complex(out)


def coefficients(B, n):
    """Monomial coefficients of p_n.  Ill-conditioned for large n; use for checks only."""
    _check_degree(B, n)
    C = np.zeros((n + 1, n + 1), dtype=complex)
    C[0, 0] = B.kappas[0]
    H = B.hessenberg
    for k in range(n):
        zc = np.roll(C[k], 1)
        C[k + 1] = (zc - H[: k + 1, k] @ C[: k + 1]) / H[k + 1, k]
    return Polynomial(C[n])


def monic(B, n, z):
    """Phi_n(z) = p_n(z) / kappa_n."""
    return evaluate(B, n, z) / B.kappas[n]


def kernel(B, n, y, z):
    """Reproducing kernel ``K_n(y, z) = sum_{j<=n} p_j(y) conj(p_j(z))``."""
    _check_degree(B, n)
    y, z = np.broadcast_arrays(np.asarray(y, dtype=complex), np.asarray(z, dtype=complex))
    out = np.sum(values(B, y, n) * np.conj(values(B, z, n)), axis=0)
    return out if out.ndim else complex(out)


def christoffel_monic(B, x, n, z):
    """Monic orthogonal polynomial of degree n for ``|w - x|^2 dmu(w)``, at z.

    Built from the basis of ``mu`` through the kernel formula
    ``(Phi_{n+1}(z) - Phi_{n+1}(x) K_n(z, x) / K_n(x, x)) / (z - x)``.  The
    bracket vanishes at ``z = x``; there the quotient is the bracket's
    derivative (the remainder-free step of synthetic division by ``z - x``).
    """
    if n + 1 > B.N:
        raise IndexOutOfRange(f"need degree {n + 1} <= {B.N}")
    x = complex(x)
    zz = np.asarray(z, dtype=complex)
    px = values(B, x, n + 1)
    Kxx = float(np.sum(np.abs(px[: n + 1]) ** 2))
    c = px[n + 1] / B.kappas[n + 1] / Kxx
    weights = np.conj(px[: n + 1])

    def bracket(P):
        return P[n + 1] / B.kappas[n + 1] - c * np.tensordot(weights, P[: n + 1], axes=1)

    at_x = zz == x
    out = np.empty(zz.shape, dtype=complex)
    if np.any(~at_x):
        zo = zz[~at_x]
        out[~at_x] = bracket(values(B, zo, n + 1)) / (zo - x)
    if np.any(at_x):
        out[at_x] = bracket(derivatives(B, np.array([x]), n + 1))[0]
    return out if out.ndim else complex(out)


# --- polynomials expressed in an orthonormal basis --------------------------

@dataclass(frozen=True, eq=False)
class BasisExpansion:
    """Polynomial ``sum_j coeffs[j] p_j`` in the orthonormal basis ``basis``.

    Norms in the basis' own measure are exact: ``sqrt(sum |coeffs|^2)``.
    """

    basis: OrthoBasis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else c[:1]
        if c.size - 1 > self.basis.N:
            raise IndexOutOfRange("expansion longer than the basis")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return self.coeffs.size - 1

    @property
    def leading_coefficient(self):
        return self.coeffs[-1] * self.basis.kappas[self.degree]

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def __call__(self, z):
        out = np.tensordot(self.coeffs, values(self.basis, z, self.degree), axes=1)
        return out if out.ndim else complex(out)

    def at_nodes(self):
        V = self.basis.node_values
        return None if V is None else self.coeffs @ V[: self.degree + 1]


def basis_polynomial(B, n):
    """p_n as a :class:`BasisExpansion`."""
    _check_degree(B, n)
    e = np.zeros(n + 1, dtype=complex)
    e[n] = 1.0
    return BasisExpansion(B, e)


def multiply(B, F, m):
    """``F(z) * p_m(z)`` expanded in the basis, via ``F(H) e_m``."""
    F = F if isinstance(F, Polynomial) else Polynomial(F)
    if m + F.degree > B.N:
        raise IndexOutOfRange(f"degree {m + F.degree} exceeds basis size {B.N}")
    size = m + F.degree + 1
    H = np.zeros((size, size), dtype=complex)
    H[:, : size - 1] = B.hessenberg[:size, : size - 1]
    e = np.zeros(size, dtype=complex)
    e[m] = 1.0
    out = np.zeros(size, dtype=complex)
    for c in F.coeffs[::-1]:
        out = H @ out + c * e
    return BasisExpansion(B, out)
