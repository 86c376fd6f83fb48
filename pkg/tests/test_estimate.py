import math
import warnings

import numpy as np
import pytest

from cenbm.errors import ProofViolation
from cenbm.estimate import (
    PENTAGON_TRIANGLE_LAMBDA,
    EstimatorConfig,
    estimate,
    estimate_cen,
    estimate_extended,
    pentagon_triangle_witness,
    unit_square,
    unit_triangle,
)
from cenbm.geometry import AffineMap, apply, centroid, contains_polygon, regular_polygon, scale_about
from cenbm.witness import ChainGapWarning, construct

from conftest import random_affine, random_pair

LOW = EstimatorConfig.for_budget("low")
LOW_EXT = EstimatorConfig.for_budget("low", "extended")

# first recorded run of the extended estimator on a triangle and its point reflection
TRIANGLE_REFLECTION_VALUE = 1.0


def rotated_triangle():
    return apply(AffineMap(-np.eye(2)), unit_triangle())


def check_result(C, D, res):
    inner = apply(res.best_map, C)
    outer = apply(scale_about(res.homothety_center, res.lambda_hat), inner)
    assert contains_polygon(D, inner, 1e-9)
    assert contains_polygon(outer, D, 1e-9)


@pytest.mark.parametrize(
    "budget, mode",
    [("low", "cen"), ("default", "extended"), ("unknown", "cen"), ("low", "affine")],
)
def test_budget_table(budget, mode):
    if budget == "unknown" or mode == "affine":
        with pytest.raises(ValueError):
            EstimatorConfig.for_budget(budget, mode)
    else:
        assert EstimatorConfig.for_budget(budget, mode).mode == mode


@pytest.mark.parametrize(
    "kw",
    [dict(sigma_range=(1.0, 6.0)), dict(grid=(3, 12, 24)), dict(mode="sup"), dict(restarts=0)],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        EstimatorConfig(**kw)


@pytest.mark.parametrize("poly", [regular_polygon(5), unit_square(), regular_polygon(3, phase=0.3)])
def test_same_body_gives_one(poly):
    res = estimate_cen(poly, poly, LOW)
    assert res.verified
    assert res.lambda_hat == pytest.approx(1.0, abs=1e-9)


def test_homothets_give_one():
    C = regular_polygon(96)
    res = estimate_cen(C, apply(AffineMap(2 * np.eye(2), (0.3, -1.0)), C), LOW)
    assert res.lambda_hat == pytest.approx(1.0, abs=1e-9)
    check_result(C, apply(AffineMap(2 * np.eye(2), (0.3, -1.0)), C), res)


def test_square_triangle_default():
    res = estimate_cen(unit_square(), unit_triangle())
    assert res.verified
    assert 2.499 <= res.lambda_hat <= 2.55
    assert np.allclose(centroid(apply(res.best_map, unit_square())), centroid(unit_triangle()), atol=1e-9)
    check_result(unit_square(), unit_triangle(), res)


def test_square_triangle_high():
    res = estimate(unit_square(), unit_triangle(), EstimatorConfig.for_budget("high"))
    assert 2.4999 <= res.lambda_hat <= 2.51


def test_pentagon_witness():
    pt = pentagon_triangle_witness()
    P, T, Tstar, lam, ok = pt
    assert ok
    assert lam == pytest.approx((7 - math.sqrt(5)) / 2, abs=1e-15)
    assert pt.y == pytest.approx(0.6882, abs=1e-4)
    assert np.isclose(sum(T.vertices[:, 0]), 0.0, atol=1e-12)
    for X in (P, T, Tstar):
        assert np.abs(centroid(X)).max() <= 1e-12
    assert contains_polygon(P, T, 1e-9) and contains_polygon(Tstar, P, 1e-9)


def test_pentagon_estimate_beats_the_witness():
    pt = pentagon_triangle_witness()
    res = estimate_cen(pt.T, pt.P)
    assert res.verified
    assert res.lambda_hat <= 2.383
    assert res.lambda_hat <= PENTAGON_TRIANGLE_LAMBDA + 1e-9


def test_extended_square_triangle():
    res = estimate_extended(unit_square(), unit_triangle(), LOW_EXT)
    cen = estimate_cen(unit_square(), unit_triangle(), LOW)
    assert res.verified and res.mode == "extended"
    assert res.lambda_hat <= 2.55
    # without the centroid pin a square fits a triangle with ratio 2
    assert res.lambda_hat == pytest.approx(2.0, abs=1e-5)
    assert res.lambda_hat <= cen.lambda_hat + 1e-12
    check_result(unit_square(), unit_triangle(), res)


def test_extended_same_body():
    res = estimate_extended(unit_square(), unit_square(), LOW_EXT)
    assert res.lambda_hat == pytest.approx(1.0, abs=1e-9)


def test_extended_triangle_reflection_regression():
    res = estimate_extended(unit_triangle(), rotated_triangle(), LOW_EXT)
    assert res.lambda_hat == pytest.approx(TRIANGLE_REFLECTION_VALUE, abs=1e-6)


def test_cen_triangle_reflection():
    # a triangle is an affine image of its reflection, so the pinned distance is 1 too
    res = estimate_cen(unit_triangle(), rotated_triangle(), LOW)
    assert res.lambda_hat == pytest.approx(1.0, abs=1e-9)


def test_symmetry():
    for i in range(4):
        C, D = random_pair(i)
        a = estimate_cen(C, D, LOW).lambda_hat
        b = estimate_cen(D, C, LOW).lambda_hat
        assert abs(a - b) <= 1e-6


def test_affine_invariance():
    rng = np.random.default_rng(17)
    for i in range(4):
        C, D = random_pair(10 + i)
        A, B = random_affine(rng), random_affine(rng)
        a = estimate_cen(C, D, LOW).lambda_hat
        b = estimate_cen(apply(A, C), apply(B, D), LOW).lambda_hat
        assert abs(a - b) <= 1e-5


def test_monotone_in_refinement_budget():
    C, D = random_pair(3)
    vals = [estimate_cen(C, D, EstimatorConfig(grid=(24, 12, 24), refine_iters=k, restarts=4)).lambda_hat
            for k in (0, 10, 50, 200)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_estimate_never_exceeds_the_witness():
    for i in range(25):
        C, D = random_pair(i)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ChainGapWarning)
            try:
                lam = construct(C, D)[0].lam
            except ProofViolation as exc:
                lam = exc.certified_ratio
        res = estimate_cen(C, D, LOW)
        assert res.verified
        assert res.lambda_hat <= lam + 1e-9


def test_thread_count_does_not_change_the_answer(monkeypatch):
    C, D = random_pair(5)
    monkeypatch.setenv("CBM_THREADS", "1")
    one = estimate_cen(C, D, LOW)
    monkeypatch.setenv("CBM_THREADS", "3")
    three = estimate_cen(C, D, LOW)
    assert one.lambda_hat == three.lambda_hat
    assert one.best_map.to_list() == three.best_map.to_list()


def test_result_json():
    res = estimate_cen(unit_square(), unit_triangle(), LOW)
    js = res.to_json()
    assert js["lambda_hat"] == res.lambda_hat and js["mode"] == "cen"
    assert AffineMap.from_json(js["best_map"]).to_list() == res.best_map.to_list()
