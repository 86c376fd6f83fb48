from fractions import Fraction

import numpy as np
import pytest

from cenbm.certify import (
    ARGMAX_PQRS,
    CORNERS,
    certify_g_max_on_Q,
    check_partials,
    g_dp,
    g_dr,
    g_exact,
    g_value,
    maximize_f_on_domain,
)
from cenbm.errors import DomainError
from cenbm.witness import f_ratio_array


@pytest.mark.parametrize(
    "p, r, expected",
    [
        (0, 0, 3.0),
        (4 / 21, 0, 11 / 5),
        (0, 2 / 7, 69 / 17),
        (4 / 21, 2 / 7, 253 / 85),
    ],
)
def test_g_examples(p, r, expected):
    assert g_value(p, r) == pytest.approx(expected, abs=1e-12)


def test_exact_corners():
    got = {k: g_exact(*v) for k, v in CORNERS.items()}
    assert got == {
        "(0,0)": 3,
        "(4/21,0)": Fraction(11, 5),
        "(0,2/7)": Fraction(69, 17),
        "(4/21,2/7)": Fraction(253, 85),
    }
    assert 17 * g_exact(Fraction(0), Fraction(2, 7)) == 69


@pytest.mark.parametrize("p, r", [(0.0, 1.5), (0.0, 2.0), (-1.0, 0.0)])
def test_g_domain_error(p, r):
    with pytest.raises(DomainError):
        g_value(p, r)


def test_partials_match_differences():
    assert check_partials() <= 1e-6
    # independent check with a different step and points outside Q
    rng = np.random.default_rng(5)
    p, r = rng.uniform(-0.5, 0.5, 500), rng.uniform(-0.5, 1.0, 500)
    h = 1e-5
    fd = (g_value(p + h, r) - g_value(p - h, r)) / (2 * h)
    assert np.allclose(fd, g_dp(p, r), rtol=1e-7)
    fd = (g_value(p, r + h) - g_value(p, r - h)) / (2 * h)
    assert np.allclose(fd, g_dr(p, r), rtol=1e-7)


def test_g_is_f_on_the_slice():
    rng = np.random.default_rng(6)
    p, r = rng.uniform(0, 4 / 21, 10_000), rng.uniform(0, 2 / 7, 10_000)
    zero = np.zeros_like(p)
    assert np.abs(f_ratio_array(p, zero, r, zero) - g_value(p, r)).max() <= 1e-14


def test_certify_report():
    rep = certify_g_max_on_Q(512)
    assert rep.certified and not rep.failures
    assert rep.max_value == pytest.approx(69 / 17, abs=1e-12)
    assert rep.argmax == pytest.approx((0.0, 2 / 7), abs=1e-15)
    assert rep.interior_critical_points == [] and rep.edge_extrema == []
    assert sorted(rep.corner_exact.values()) == sorted(["3", "11/5", "69/17", "253/85"])
    assert rep.grid_residual <= 1e-12
    assert all(rep.monotonicity_checks.values())
    js = rep.to_json()
    assert js["argmax"] == list(rep.argmax)


def test_grid_residual_does_not_grow_with_refinement():
    res = [certify_g_max_on_Q(n).grid_residual for n in (64, 128, 256, 512)]
    assert all(abs(x) <= 1e-12 for x in res)
    # the corner sits on every grid, so the residual is at float noise for every size
    assert max(res) - min(res) <= 1e-12


def test_certify_rejects_tiny_grid():
    with pytest.raises(ValueError):
        certify_g_max_on_Q(8)


def test_f_maximum_small_run():
    rep = maximize_f_on_domain(samples=100_000, refine_iters=100, top=20)
    assert rep.certified
    assert rep.max_value <= 69 / 17 + 1e-9
    assert np.max(np.abs(np.array(rep.argmax) - ARGMAX_PQRS)) <= 1e-3
    assert all(rep.monotonicity_checks.values())


def test_f_maximum_rejects_small_sample():
    with pytest.raises(ValueError):
        maximize_f_on_domain(samples=1000)
