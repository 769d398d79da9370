import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opx.errors import DegenerateMeasure, ExactnessWarning, IndexOutOfRange, InvalidVerblunsky
from opx.measure import (Polynomial, add_atom, christoffel_weight,
                         disk_area, integrate, interval_measure, unit_circle_uniform)
from opx.opoly import (BasisExpansion, OrthoBasis, VerblunskySeq,
                       bernstein_szego_measure, christoffel_monic, coefficients, derivatives,
                       evaluate, kernel, monic, multiply, orthonormalize, values,
                       verblunsky_to_basis)


def gram_kappas(mu, N):
    """Leading coefficients from a Cholesky factorization of the monomial Gram matrix."""
    V = mu.points[None, :] ** np.arange(N + 1)[:, None]
    G = (V.conj() * mu.masses) @ V.T
    L = np.linalg.cholesky(G)
    return 1.0 / np.real(np.diag(L))


def szego_coefficients(alphas, n):
    """Monomial coefficients of the orthonormal phi_0..phi_n by the Szego recursion."""
    phi = np.array([1.0 + 0j])
    star = np.array([1.0 + 0j])
    out = [phi]
    for k in range(n):
        a = alphas[k]
        rho = math.sqrt(1 - abs(a) ** 2)
        zphi = np.concatenate([[0], phi])
        st_ = np.concatenate([star, [0]])
        phi, star = (zphi - np.conj(a) * st_) / rho, (st_ - a * zphi) / rho
        out.append(phi)
    return out


def test_circle_basis_is_monomials():
    B = orthonormalize(unit_circle_uniform(64), 20)
    assert np.allclose(B.kappas, 1, atol=1e-13)
    z = np.array([0.3 + 0.4j, 2.0, -1.5j])
    P = values(B, z)
    for n in range(21):
        assert np.allclose(P[n], z ** n, rtol=1e-12)


def test_area_basis_closed_form():
    B = orthonormalize(disk_area(10, 40), 15)
    for n in range(16):
        c = coefficients(B, n).coeffs
        expect = np.zeros(n + 1)
        expect[n] = math.sqrt((n + 1) / math.pi)
        assert np.max(np.abs(c - expect)) < 1e-10


def test_kappas_match_cholesky_for_circle_plus_atom():
    mu = add_atom(unit_circle_uniform(32), 1.5 + 0.5j, 0.7)
    N = 8
    B = orthonormalize(mu, N)
    assert np.allclose(B.kappas, gram_kappas(mu, N), rtol=1e-8)


def test_orthonormality_on_nodes():
    mu = add_atom(interval_measure(-1, 2, "Legendre", 30), 3.0, 0.2)
    B = orthonormalize(mu, 25)
    V = B.node_values
    G = (V.conj() * mu.masses) @ V.T
    assert np.max(np.abs(G - np.eye(26))) < 1e-12


def test_recurrence_values_match_node_values():
    mu = disk_area(8, 30)
    B = orthonormalize(mu, 12)
    P = values(B, mu.points)
    assert np.max(np.abs(P - B.node_values)) < 1e-10


def test_degenerate_and_exactness_errors():
    with pytest.raises(DegenerateMeasure):
        orthonormalize(unit_circle_uniform(5), 5)
    with pytest.warns(ExactnessWarning):
        orthonormalize(unit_circle_uniform(10), 6)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        orthonormalize(unit_circle_uniform(10), 4)


def test_index_out_of_range():
    B = orthonormalize(unit_circle_uniform(16), 5)
    with pytest.raises(IndexOutOfRange):
        evaluate(B, 6, 0.5)
    with pytest.raises(IndexOutOfRange):
        multiply(B, Polynomial.monomial(2), 4)


def test_invalid_verblunsky():
    with pytest.raises(InvalidVerblunsky):
        verblunsky_to_basis([0.5, 1.0, 0.0], 3)
    with pytest.raises(InvalidVerblunsky):
        VerblunskySeq(lambda n: 2.0).take(1)


def test_verblunsky_free_is_monomials():
    B = verblunsky_to_basis(VerblunskySeq.free(), 10)
    assert np.allclose(B.kappas, 1)
    assert np.array_equal(B.hessenberg, np.eye(11, 10, -1))


@pytest.mark.parametrize("alphas", [
    [0.3, -0.2j, 0.1 + 0.1j, 0.0, 0.5, -0.4],
    [0.9, 0.0, -0.7j, 0.2, 0.0, 0.0, 0.6],
])
def test_verblunsky_basis_against_coefficient_oracle(alphas):
    n = len(alphas)
    B = verblunsky_to_basis(alphas, n)
    ref = szego_coefficients(alphas, n)
    for k in range(n + 1):
        assert np.max(np.abs(coefficients(B, k).coeffs - ref[k])) < 1e-12
        assert abs(B.kappas[k] - ref[k][-1].real) < 1e-12
    # Hessenberg route and Szego route agree
    z = np.array([0.2 + 0.1j, 1.3, -0.5 + 2j])
    plain = OrthoBasis(B.hessenberg, B.kappas)
    assert np.allclose(values(B, z), values(plain, z), rtol=1e-11)


def test_bernstein_szego_measure_reproduces_basis():
    alphas = [0.3, 0.2j, -0.25, 0.1]
    mu = bernstein_szego_measure(alphas, 4, 512)
    B = orthonormalize(mu, 6)
    V = verblunsky_to_basis(alphas + [0.0, 0.0], 6)
    assert np.allclose(B.kappas, V.kappas, rtol=1e-10)
    assert np.allclose(B.hessenberg, V.hessenberg, atol=1e-10)


def test_dyadic_kappa_ratios():
    B = verblunsky_to_basis(VerblunskySeq.dyadic(), 1025)
    r = B.kappas[:-1] / B.kappas[1:]
    for n in range(1, 1026):
        expect = math.sqrt(3) / 2 if (n - 1) >= 2 and (n - 1) & (n - 2) == 0 else 1.0
        assert abs(r[n - 1] - expect) < 1e-12


def test_kernel_reproduces():
    mu = disk_area(8, 32)
    B = orthonormalize(mu, 10)
    y = 0.3 - 0.2j
    Q = BasisExpansion(B, np.array([1, -2j, 0.5, 0, 3], dtype=complex))
    K = kernel(B, 10, y, mu.points)
    assert abs(integrate(mu, K * Q.at_nodes()) - Q(y)) < 1e-10


def test_christoffel_monic_matches_reorthogonalization():
    mu = disk_area(10, 40)
    x = 0.5 + 0.25j
    B = orthonormalize(mu, 12)
    Bx = orthonormalize(christoffel_weight(mu, x), 11)
    z = np.array([2.0, -1 + 1.5j, 0.1j])
    for n in range(0, 11):
        direct = values(Bx, z, n)[n] / Bx.kappas[n]
        assert np.allclose(christoffel_monic(B, x, n, z), direct, rtol=1e-9)


def test_christoffel_monic_at_x_is_synthetic_division():
    mu = unit_circle_uniform(64)
    B = orthonormalize(mu, 10)
    x = 0.4
    for n in (2, 5, 8):
        Bx = orthonormalize(christoffel_weight(mu, x), n)
        direct = coefficients(Bx, n).coeffs / Bx.kappas[n]
        assert abs(christoffel_monic(B, x, n, x) - Polynomial(direct)(x)) < 1e-10


def test_derivatives_against_coefficients():
    B = orthonormalize(interval_measure(-2, 2, "Legendre", 20), 8)
    z = np.array([0.3, 1.5 + 0.5j])
    D = derivatives(B, z)
    for n in range(9):
        c = coefficients(B, n).coeffs
        dc = Polynomial(c[1:] * np.arange(1, c.size))
        assert np.allclose(D[n], dc(z), rtol=1e-9, atol=1e-12)


def test_monic_and_expansion():
    B = orthonormalize(disk_area(6, 24), 8)
    assert abs(monic(B, 3, 2.0) - 8.0) < 1e-12
    Q = multiply(B, Polynomial([1.0, 0.0, 2.0]), 3)
    assert Q.degree == 5
    assert abs(Q.leading_coefficient - 2 * B.kappas[3]) < 1e-12
    z = 1.7 - 0.3j
    assert abs(Q(z) - (1 + 2 * z ** 2) * evaluate(B, 3, z)) < 1e-10


def test_basis_json_round_trip():
    B = orthonormalize(add_atom(unit_circle_uniform(16), 2j, 1.0), 5)
    back = OrthoBasis.from_json(B.to_json())
    assert np.array_equal(back.kappas, B.kappas)
    assert np.array_equal(back.hessenberg, B.hessenberg)
    assert len(B.source_hash()) == 64


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6)), min_size=1, max_size=8))
def test_verblunsky_kappas_formula(pairs):
    a = np.array([complex(x, y) for x, y in pairs])
    a = np.where(np.abs(a) < 0.8, a, 0.0)
    B = verblunsky_to_basis(a, a.size)
    rho = np.sqrt(1 - np.abs(a) ** 2)
    assert np.allclose(B.kappas[1:], 1 / np.cumprod(rho), rtol=1e-13)
    # the Hessenberg columns are unit vectors: z is an isometry on the circle
    assert np.allclose(np.linalg.norm(B.hessenberg, axis=0), 1, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 12), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_multiply_matches_pointwise(m, re, im):
    B = orthonormalize(disk_area(9, 40), 16)
    F = Polynomial([0.5, -1.0, 0.25j])
    z = complex(re, im) + 2.5
    lhs = multiply(B, F, m)(z)
    rhs = F(z) * evaluate(B, m, z)
    assert abs(lhs - rhs) <= 1e-9 * max(1, abs(rhs))
