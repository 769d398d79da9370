import io
import json
import math

import numpy as np
import pytest

from opx.measure import add_atom, christoffel_weight, disk_area, unit_circle_uniform
from opx.opoly import orthonormalize, values
from opx.transforms import (attract_experiment, christoffel_closed_form,
                            christoffel_ratio_experiment, nevai_condition, uvarov_norm_ratio,
                            uvarov_ratio_experiment)


@pytest.fixture(scope="module")
def circle():
    return orthonormalize(unit_circle_uniform(256), 60)


@pytest.fixture(scope="module")
def area_mu():
    return disk_area(28, 112)


def area_christoffel_oracle(n, z):
    """Closed form of (z - 1) p_{n-1}(z; nu) / p_n(z; mu) for the area measure and x = 1."""
    m = n - 1
    s = math.fsum((m + 2 - k) / z ** k for k in range(1, m + 2))
    return 2 / ((m + 2) * math.sqrt((m + 1) * (m + 3))) * ((m + 1) * (m + 2) / 2 - s)


def test_uvarov_closed_form_examples(circle):
    assert abs(uvarov_norm_ratio(circle, 0.3, 2.0, 0) - (1 + 2.0 * circle.kappas[0] ** 2)) < 1e-14
    for n in range(1, 20):
        assert abs(uvarov_norm_ratio(circle, 0.0, 5.0, n) - 1) < 1e-14
        assert abs(uvarov_norm_ratio(circle, 1.0, 1.0, n) - (n + 2) / (n + 1)) < 1e-12


def test_nevai_examples(circle):
    for n in range(1, 30):
        assert nevai_condition(circle, 0.0, n) < 1e-28
        assert abs(nevai_condition(circle, 1.0, n) - 1 / n) < 1e-12
        assert abs(nevai_condition(circle, 2.0, n) - 3 * 4 ** n / (4 ** n - 1)) < 1e-10


@pytest.mark.parametrize("x", [0.0, 1.0, 1 + 0.5j])
@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_uvarov_matches_reorthogonalization(x, t, area_mu):
    rep = uvarov_ratio_experiment(area_mu, x, t, [2.0], range(0, 31))
    assert max(r.cross_check for r in rep.rows) < 1e-8
    assert all(r.norm_ratio >= 1 for r in rep.rows)


def test_uvarov_tiny_mass_is_continuous(area_mu):
    rep = uvarov_ratio_experiment(area_mu, 1.0, 1e-12, [2.0, 3j], range(0, 21))
    assert max(e for r in rep.rows for e in r.ratio_error.values()) < 1e-6


def test_uvarov_outside_hull_does_not_settle():
    mu = unit_circle_uniform(256)
    rep = uvarov_ratio_experiment(mu, 2.0, 1.0, [np.inf], range(0, 41))
    tail = [r for r in rep.rows if r.n >= 20]
    assert all(abs(r.norm_ratio - 4) < 1e-6 for r in tail)
    assert all(r.ratio_error[complex(np.inf)] > 0.4 for r in tail)
    assert all(r.nevai_value >= 1 for r in rep.rows if r.n >= 1)


def test_uvarov_inside_decays(area_mu):
    rep = uvarov_ratio_experiment(area_mu, 1.0, 1.0, [2.0], range(1, 31))
    errs = np.array([r.ratio_error[2 + 0j] for r in rep.rows])
    # a short transient, then monotone decay
    assert np.all(np.diff(errs[9:]) < 0)
    assert errs[-1] < errs[0] / 2
    assert rep.nevai_slope < -0.5


def test_christoffel_area_expansion(area_mu):
    rep = christoffel_ratio_experiment(area_mu, 1.0, [2.0, 1.0], range(1, 41))
    for r in rep.rows:
        assert abs((1 - r.ratio_error[2 + 0j]) - area_christoffel_oracle(r.n, 2.0)) < 1e-8
        # the factor z - x vanishes at z = x
        assert r.ratio_error[1 + 0j] == 1.0
        assert r.cross_check < 1e-8


def test_christoffel_circle_origin_is_exact(circle):
    mu = unit_circle_uniform(256)
    rep = christoffel_ratio_experiment(mu, 0.0, [1.5, -2j], range(1, 30))
    assert max(e for r in rep.rows for e in r.ratio_error.values()) < 1e-12


def test_christoffel_closed_form_zero_at_x(circle):
    for n in (1, 5, 20):
        assert christoffel_closed_form(circle, 2.0, n, 2.0) == 0


def test_christoffel_norm_identity(area_mu):
    B = orthonormalize(area_mu, 30)
    x = 0.5 + 0.5j
    nu = christoffel_weight(area_mu, x)
    Bx = orthonormalize(nu, 29)
    for n in (1, 10, 30):
        px = values(B, x, n)
        K = float(np.sum(np.abs(px[:n]) ** 2))
        rhs = B.kappas[n] ** -2 + abs(px[n] / B.kappas[n]) ** 2 / K
        assert abs(Bx.kappas[n - 1] ** -2 / rhs - 1) < 1e-8
        # ||(w - x) p_{n-1}(w; nu)||_{L2(mu)} = 1 by definition of nu
        vals = (area_mu.points - x) * Bx.node_values[n - 1]
        assert abs(math.fsum(area_mu.masses * np.abs(vals) ** 2) - 1) < 1e-10


def test_nogrow_bound_away_from_zero():
    B = orthonormalize(unit_circle_uniform(256), 100)
    for x in (1.5, -1.5j, 2 + 1j):
        delta = min(nevai_condition(B, x, n) for n in range(10, 101))
        assert delta > 0.5


def test_attract_experiment(area_mu):
    rep = attract_experiment(area_mu, 1.0, 1.0, [2.0], range(1, 41))
    errs = [r.ratio_error[2 + 0j] for r in rep.rows]
    assert errs[-1] < 0.1 and errs[-1] < errs[0]
    tiny = attract_experiment(area_mu, 1.0, 1e-12, [2.0], range(1, 21))
    plain = christoffel_ratio_experiment(area_mu, 1.0, [2.0], range(1, 21))
    for a, b in zip(tiny.rows, plain.rows):
        assert abs(a.ratio_error[2 + 0j] - b.ratio_error[2 + 0j]) < 1e-5


def test_report_serialization(area_mu):
    rep = uvarov_ratio_experiment(area_mu, 1.0, 1.0, [2.0, 3.0], range(0, 4))
    d = json.loads(rep.to_json())
    assert d["kind"] == "uvarov" and len(d["rows"]) == 4
    buf = io.StringIO()
    rep.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("n,z_re,z_im,ratio_error") and len(lines) == 9


def test_merge_with_existing_atom(area_mu):
    once = add_atom(add_atom(area_mu, 1.0, 0.5), 1.0, 0.5)
    B1 = orthonormalize(once, 10)
    B2 = orthonormalize(add_atom(area_mu, 1.0, 1.0), 10)
    assert np.allclose(B1.kappas, B2.kappas, rtol=1e-12)
