import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import fd_gradient, reference_potential

from hadflow.phase_core import (PhaseVector, build_matrix, core_permutation, gradient, gradient_batch,
                                jacobian, order_from_size, permute_core, potential, potential_batch)
from hadflow.precision import Precision


def test_build_matrix_d2():
    H = build_matrix(PhaseVector(2, [math.pi]))
    assert np.allclose(H, [[1, 1], [1, -1]])


def test_phase_vector_validation():
    with pytest.raises(ValueError):
        PhaseVector(3, [0.0, 1.0])
    with pytest.raises(ValueError):
        PhaseVector(1, [])
    with pytest.raises(ValueError):
        order_from_size(5)


def test_normalized_range_and_json_roundtrip():
    p = PhaseVector(3, [-1.0, 7.0, 2 * math.pi, 0.5])
    q = p.normalized()
    assert np.all((q.theta >= 0) & (q.theta < 2 * math.pi))
    assert PhaseVector.from_json(q.to_json()) == q


def test_fourier_matrix_potential_vanishes():
    d = 5
    theta = [2 * math.pi * r * c / d for r in range(1, d) for c in range(1, d)]
    p = PhaseVector(d, theta)
    assert potential(p) < 1e-25
    assert np.max(np.abs(gradient(p))) < 1e-12


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_potential_matches_definition(d, rng):
    for _ in range(5):
        theta = rng.uniform(0, 2 * math.pi, (d - 1) ** 2)
        assert potential(PhaseVector(d, theta)) == pytest.approx(reference_potential(d, theta), rel=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_gradient_and_jacobian_match_finite_differences(d, rng):
    worst_g = worst_j = 0.0
    for _ in range(100):
        theta = rng.uniform(0, 2 * math.pi, (d - 1) ** 2)
        g = gradient(PhaseVector(d, theta))
        g_fd = -fd_gradient(lambda x: reference_potential(d, x), theta)
        worst_g = max(worst_g, np.linalg.norm(g - g_fd) / np.linalg.norm(g_fd))
        J = jacobian(PhaseVector(d, theta))
        J_fd = np.column_stack([fd_gradient(lambda x: gradient(PhaseVector(d, x))[k], theta)
                                for k in range(theta.size)]).T
        worst_j = max(worst_j, np.linalg.norm(J - J_fd) / np.linalg.norm(J_fd))
    assert worst_g < 1e-5
    assert worst_j < 1e-5


def test_batch_matches_single(rng):
    d = 4
    pts = rng.uniform(0, 2 * math.pi, (7, 9))
    assert np.allclose(gradient_batch(pts, d), [gradient(PhaseVector(d, x)) for x in pts], atol=1e-12)
    assert np.allclose(potential_batch(pts, d), [potential(PhaseVector(d, x)) for x in pts], rtol=1e-12)


def test_arbitrary_precision_agrees_with_machine(rng):
    d = 4
    theta = rng.uniform(0, 2 * math.pi, 9)
    prec = Precision.arbitrary(40)
    p_mp = PhaseVector(d, prec.real_array(theta))
    assert float(potential(p_mp, prec)) == pytest.approx(potential(PhaseVector(d, theta)), rel=1e-12)
    J_mp = prec.to_float(jacobian(p_mp, prec))
    assert np.allclose(J_mp, jacobian(PhaseVector(d, theta)), atol=1e-11)


def test_jacobian_is_symmetric(rng):
    J = jacobian(PhaseVector(5, rng.uniform(0, 6, 16)))
    assert np.array_equal(J, J.T)


perm_case = st.integers(3, 6).flatmap(
    lambda d: st.tuples(
        st.just(d),
        st.permutations(list(range(1, d))),
        st.permutations(list(range(1, d))),
        st.lists(st.floats(0, 2 * math.pi), min_size=(d - 1) ** 2, max_size=(d - 1) ** 2),
    )
)


@settings(max_examples=60, deadline=None)
@given(perm_case)
def test_permutation_equivariance(case):
    d, rows, cols, theta = case
    rp, cp = [0, *rows], [0, *cols]
    p = PhaseVector(d, theta)
    q = permute_core(p, rp, cp)
    H = build_matrix(p)
    assert np.allclose(build_matrix(q), H[np.ix_(rp, cp)])
    assert potential(q) == pytest.approx(potential(p), rel=1e-9, abs=1e-12)
    idx = core_permutation(d, rp, cp)
    assert np.allclose(gradient(q), gradient(p)[idx], atol=1e-10)
    assert np.allclose(jacobian(q), jacobian(p)[np.ix_(idx, idx)], atol=1e-10)


def test_core_permutation_rejects_moving_first_index():
    with pytest.raises(ValueError):
        core_permutation(3, [1, 0, 2], [0, 1, 2])
