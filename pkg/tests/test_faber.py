import numpy as np
import pytest

from opx.asymptotics import kappa_ratio_mask, ratio_trace
from opx.errors import InadmissibleDegree
from opx.faber import FaberFamily, faber, keps_experiment
from opx.measure import (Polynomial, SupportDescriptor, interval_measure, lemniscate_boundary,
                         unit_circle_uniform)
from opx.opoly import orthonormalize


def test_faber_closed_forms():
    assert faber(SupportDescriptor.closed_disk(), 5) == Polynomial.monomial(5)
    assert faber(SupportDescriptor.lemniscate(3), 3) == Polynomial([-1, 0, 0, 1])
    assert faber(SupportDescriptor.lemniscate(2), 4) == Polynomial([1, 0, -2, 0, 1])
    assert faber(SupportDescriptor.interval(-2, 2), 4) == Polynomial([2, 0, -4, 0, 1])


@pytest.mark.parametrize("k", range(0, 12))
def test_interval_faber_is_scaled_chebyshev(k):
    F = faber(SupportDescriptor.interval(-2, 2), k)
    theta = np.linspace(0, np.pi, 13)
    # F_k(2 cos t) = 2 cos(k t) for k >= 1
    expect = 2 * np.cos(k * theta) if k else np.ones_like(theta)
    assert np.allclose(F(2 * np.cos(theta)), expect, atol=1e-11)
    assert F.degree == k and F.leading_coefficient == 1


def test_inadmissible_degrees():
    with pytest.raises(InadmissibleDegree, match="multiples of 3"):
        faber(SupportDescriptor.lemniscate(3), 4)
    with pytest.raises(InadmissibleDegree):
        faber(SupportDescriptor.interval(0, 1), 2)
    with pytest.raises(InadmissibleDegree):
        faber(SupportDescriptor.custom(), 1)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_lemniscate_sup_norm_certificate(m):
    fam = FaberFamily(SupportDescriptor.lemniscate(m))
    bd = lemniscate_boundary(m, m * -(-4096 // m)).nodes
    for j in range(1, 6):
        F = fam(j * m)
        assert F.degree == j * m and F.leading_coefficient == 1
        assert abs(np.max(np.abs(F(bd))) - 1) < 1e-10
    assert not fam.is_admissible(m + 1) or m == 1


def test_keps_disk_matches_ratio_trace():
    B = orthonormalize(unit_circle_uniform(128), 40)
    z = [1.5, 2j, -3 + 1j]
    a = keps_experiment(B, z, range(1, 41))
    b = ratio_trace(B, z, range(1, 41))
    assert len(a.rows) == len(b.rows)
    for (n1, z1, v1), (n2, z2, v2) in zip(a.rows, b.rows):
        assert n1 == n2 and z1 == z2 and abs(v1 - v2) < 1e-12 and abs(v1 - 1) < 1e-12


def test_keps_lemniscate_two():
    mu = lemniscate_boundary(2, 1024)
    B = orthonormalize(mu, 60)
    mask = kappa_ratio_mask(B, 2, 0.05)
    tr = keps_experiment(B, [2.5, 2j, np.inf], range(40, 61), mask=mask)
    assert tr.rows and max(abs(v - 1) for _, _, v in tr.rows) < 0.05


def test_keps_lemniscate_three_at_infinity():
    B = orthonormalize(lemniscate_boundary(3, 1536), 60)
    mask = kappa_ratio_mask(B, 3, 0.05)
    ns, vals = keps_experiment(B, [np.inf], range(30, 61), mask=mask).column(np.inf)
    assert ns.size > 0
    assert np.allclose(vals, B.kappas[ns - 3] / B.kappas[ns], rtol=1e-14)
    assert np.max(np.abs(vals - 1)) < 0.05


def test_keps_requires_support():
    B = orthonormalize(interval_measure(0, 1, "Legendre", 10), 4)
    with pytest.raises(InadmissibleDegree):
        keps_experiment(B, [3.0], range(1, 5))
