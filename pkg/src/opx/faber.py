"""Faber polynomials with closed forms and the lemniscate ratio experiment.

For the disk ``F_k = z^k``; for ``[-2, 2]`` ``F_k = 2 T_k(x/2)``; for the
lemniscate ``E_m = {|z^m - 1| <= 1}`` the exterior map satisfies
``phi^m = z^m - 1``, so ``F_{jm} = (z^m - 1)^j`` and other degrees have no
polynomial closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

from .asymptotics import ratio_trace
from .errors import InadmissibleDegree
from .measure import Polynomial, SupportDescriptor


def _admissible(support):
    if support.kind in ("ClosedDisk", "UnitCircle"):
        return "every k >= 0", lambda k: True
    if support.kind == "Lemniscate":
        m = support.m
        return f"multiples of {m}", lambda k: k % m == 0
    if support.kind == "RealInterval" and (support.a, support.b) == (-2.0, 2.0):
        return "every k >= 0", lambda k: True
    return "none (no closed form for this support)", lambda k: False


def faber(support, k):
    """Monic Faber polynomial of degree k for a support with a known exterior map."""
    desc, ok = _admissible(support)
    if k < 0 or not ok(k):
        raise InadmissibleDegree(f"degree {k} not admissible for {support.kind}; admissible: {desc}")
    if support.kind == "Lemniscate":
        m = support.m
        return (Polynomial.monomial(m) - Polynomial([1.0])) ** (k // m)
    if support.kind == "RealInterval":
        if k == 0:
            return Polynomial([1.0])
        x = Polynomial.monomial(1)
        # F_1 = x, F_2 = x^2 - 2, then F_k = x F_{k-1} - F_{k-2}
        prev, cur = Polynomial([2.0]), x
        for _ in range(k - 1):
            prev, cur = cur, x * cur - prev
        return cur
    return Polynomial.monomial(k)


@dataclass(frozen=True)
class FaberFamily:
    support: SupportDescriptor

    @property
    def admissible(self):
        return _admissible(self.support)[0]

    def is_admissible(self, k):
        return k >= 0 and _admissible(self.support)[1](k)

    def __call__(self, k):
        return faber(self.support, k)


def _support_of(B):
    mu = B.measure
    if mu is not None:
        return mu.support
    if B.alphas is not None:
        return SupportDescriptor.unit_circle()
    raise ValueError("basis carries no support description")


def keps_experiment(B, z_grid, n_range, mask=None, m=None, support=None):
    """``F_m(z) p_{n-m}(z) / p_n(z)`` for the retained n.

    ``F_m`` is the degree-m Faber polynomial of the basis' support:
    ``z^m - 1`` on the lemniscate ``E_m`` (m taken from the support when not
    given) and ``z^m`` on the disk or circle, where ``m = 1`` is the plain
    consecutive ratio.
    """
    support = _support_of(B) if support is None else support
    if m is None:
        m = support.m if support.kind == "Lemniscate" else 1
    F = faber(support, m)
    return ratio_trace(B, z_grid, n_range, mask=mask, mode="faber", F=F, step=m)
