import math

import numpy as np
import pytest

from hadflow import catalog
from hadflow.center_manifold import (BasisError, detect_flow, evaluate_embedding, expand, rates,
                                     tangency_residual)
from hadflow.exact import to_phase_vector
from hadflow.flow import wrap
from hadflow.phase_core import gradient, potential


@pytest.fixture(scope="module")
def f4_expansion():
    p = to_phase_vector(catalog.get("F4_1").matrix, {"a": math.pi / 2})
    return expand(p, catalog.vectors("F4_1_center").T, 3)


@pytest.fixture(scope="module")
def d6_base():
    return to_phase_vector(catalog.get("D6_1").matrix, {"c": 0}), catalog.vectors("D6_center").T


def test_cubic_rates_at_f4(f4_expansion):
    e = f4_expansion
    # rate 0 (t1): t1*t2^2 and t2*t1^2 coefficients
    assert e.alpha(0, (1, 2, 0)) == pytest.approx(-20 / 9, rel=1e-9)
    assert e.alpha(0, (2, 1, 0)) == pytest.approx(4 / 9, rel=1e-9)
    assert e.alpha(0, (1, 0, 2)) == pytest.approx(-20 / 9, rel=1e-9)
    assert e.alpha(0, (0, 2, 1)) == pytest.approx(4 / 9, rel=1e-9)
    assert e.alpha(1, (2, 1, 0)) == pytest.approx(-20 / 9, rel=1e-9)
    assert e.alpha(2, (0, 1, 2)) == pytest.approx(4 / 9, rel=1e-9)
    for i in range(3):
        for cube in [(3, 0, 0), (0, 3, 0), (0, 0, 3)]:
            assert abs(e.alpha(i, cube)) < 1e-9
    assert e.alpha(0, (1, 2, 0)) / e.alpha(0, (2, 1, 0)) == pytest.approx(-5, abs=1e-10)


@pytest.mark.parametrize("scale", [0.5, 3.0])
def test_ratio_is_independent_of_uniform_basis_scaling(scale):
    p = to_phase_vector(catalog.get("F4_1").matrix, {"a": math.pi / 2})
    e = expand(p, scale * catalog.vectors("F4_1_center").T, 3)
    assert e.alpha(0, (1, 2, 0)) == pytest.approx(-20 / 9 * scale ** 2, rel=1e-9)
    assert e.alpha(0, (1, 2, 0)) / e.alpha(0, (2, 1, 0)) == pytest.approx(-5, abs=1e-10)


def test_quadratic_rates_vanish_against_direct_sampling(f4_expansion):
    e = f4_expansion
    B = e.basis
    dual = np.linalg.solve(B.T @ B, B.T)
    rng = np.random.default_rng(3)
    for _ in range(5):
        u = rng.normal(size=3)
        s = np.linspace(-2e-2, 2e-2, 9)
        # kernel component of the field along the straight line, fitted in s
        samples = np.array([dual @ gradient(type(e.base)(4, e.base.theta + si * (B @ u))) for si in s])
        coeffs = np.polynomial.polynomial.polyfit(s, samples, 4)
        assert np.max(np.abs(coeffs[2])) < 1e-7
    for k, val in e.alpha_coeffs.items():
        if sum(k[1]) == 2:
            assert abs(val) < 1e-12


def test_detect_flow_at_f4(f4_expansion):
    verdict = detect_flow(f4_expansion, 1e-8)
    assert verdict.flow_detected
    first = verdict.first_nonzero
    assert first.order == 3
    assert sum(1 for m in first.monomial if m) >= 2
    assert verdict.max_abs_alpha_per_order[0] < 1e-12


def test_embedding_along_v1_follows_the_family(f4_expansion):
    M = catalog.get("F4_1").matrix
    for s in (1e-2, 5e-3):
        X = evaluate_embedding(f4_expansion, [s, 0, 0])
        target = to_phase_vector(M, {"a": math.pi / 2 + s})
        assert np.max(np.abs(wrap(X.theta - target.theta))) < 10 * s * s


def test_embedding_at_zero_is_base(f4_expansion):
    assert np.allclose(evaluate_embedding(f4_expansion, [0, 0, 0]).theta, f4_expansion.base.theta)


def test_w_orthogonal_to_basis(f4_expansion, d6_base):
    p, B = d6_base
    for e in (f4_expansion, expand(p, B, 3)):
        for w in e.w_coeffs.values():
            nw = np.linalg.norm(w)
            assert np.all(np.abs(e.basis.T @ w) <= 1e-10 * max(nw, 1e-300))


def test_tangency_residual_scales_with_order(d6_base):
    p, B = d6_base
    rng = np.random.default_rng(11)
    u = rng.normal(size=4)
    u /= np.linalg.norm(u)
    for K in (2, 3, 4):
        e = expand(p, B, K)
        r1, r2 = tangency_residual(e, 1e-2 * u), tangency_residual(e, 5e-3 * u)
        assert r1 / r2 == pytest.approx(2 ** (K + 1), rel=0.2)


def test_potential_slope_when_no_flow(d6_base):
    p, B = d6_base
    rng = np.random.default_rng(5)
    u = rng.normal(size=4)
    u /= np.linalg.norm(u)
    for K in (2, 3):
        e = expand(p, B, K)
        assert not detect_flow(e, 1e-8).flow_detected
        s = np.array([1e-1, 5e-2, 2.5e-2, 1.25e-2])
        v = [potential(evaluate_embedding(e, si * u)) for si in s]
        slope = np.polyfit(np.log(s), np.log(v), 1)[0]
        assert slope >= K + 1 - 0.5


def test_f6_direction_tangent_to_affine_family():
    p = to_phase_vector(catalog.get("F6").matrix)
    e = expand(p, catalog.vectors("F6_center").T, 3)
    assert potential(evaluate_embedding(e, [1e-2, 0, 0, 0])) < 1e-20


def test_rates_match_projected_field(f4_expansion):
    e = f4_expansion
    B = e.basis
    t = [1e-3, -2e-3, 5e-4]
    dual = np.linalg.solve(B.T @ B, B.T)
    projected = dual @ gradient(evaluate_embedding(e, t))
    # agreement up to the truncation error O(|t|^4)
    assert np.max(np.abs(rates(e, t) - projected)) < 1e-4 * np.max(np.abs(projected))


def test_basis_validation(f4_expansion):
    p = f4_expansion.base
    V = catalog.vectors("F4_1_center").T
    with pytest.raises(BasisError):
        expand(p, V[:, :2], 3)
    bad = V.copy()
    bad[0, 0] += 1
    with pytest.raises(BasisError):
        expand(p, bad, 3)
    with pytest.raises(ValueError):
        expand(p, V, 1)


def test_memory_friendly_f6_fifth_order():
    p = to_phase_vector(catalog.get("F6").matrix)
    e = expand(p, catalog.vectors("F6_center").T, 5)
    assert e.embedding_jet.nbytes < 10 ** 6
    assert max(detect_flow(e).max_abs_alpha_per_order) < 1e-8
