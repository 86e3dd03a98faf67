import math

import numpy as np
import pytest
from oracles import d6_char_roots, f4_char_roots, f4_jacobian_display

from hadflow import catalog
from hadflow.exact import to_phase_vector
from hadflow.phase_core import PhaseVector, jacobian, permute_core
from hadflow.precision import Precision
from hadflow.spectral import (DefectMismatch, NotHadamard, cross_check_defect, defect_flow,
                              defect_linear_system, linear_system, spectrum)


def test_f4_jacobian_entries_exact():
    M = catalog.get("F4_1").matrix
    for a in np.linspace(0, math.pi, 13):
        J = jacobian(to_phase_vector(M, {"a": a}))
        assert np.max(np.abs(J - f4_jacobian_display(a))) < 1e-13
        assert np.all(np.diag(J) == pytest.approx(-12, abs=1e-13))


def test_f4_spectrum_matches_characteristic_polynomial():
    M = catalog.get("F4_1").matrix
    for a in np.linspace(0, math.pi, 50):
        lam = spectrum(jacobian(to_phase_vector(M, {"a": a}))).eigenvalues
        assert np.max(np.abs(lam - f4_char_roots(a))) < 1e-8


def test_f4_center_dimension_jumps_at_quarter_turn(f4_point):
    data = spectrum(jacobian(f4_point))
    assert data.center_dim == 3 and data.stable_dim == 6 and data.unstable_dim == 0
    for v in catalog.vectors("F4_1_center"):
        assert np.linalg.norm(jacobian(f4_point) @ v) < 1e-12


def test_d6_spectrum_matches_factors():
    M = catalog.get("D6_1").matrix
    for c in np.linspace(-math.pi / 2, math.pi / 2, 25):
        lam = spectrum(jacobian(to_phase_vector(M, {"c": c}))).eigenvalues
        assert np.max(np.abs(lam - d6_char_roots(c))) < 1e-6


def test_f6_center_basis_spans_catalog_vectors():
    p = to_phase_vector(catalog.get("F6").matrix)
    data = spectrum(jacobian(p))
    V = catalog.vectors("F6_center").T.astype(float)
    Q, _ = np.linalg.qr(V)
    cosines = np.linalg.svd(Q.T @ data.center_basis, compute_uv=False)
    assert data.center_dim == 4
    assert np.min(cosines) > 1 - 1e-10


def test_linear_system_shape():
    H = catalog.get("D6").matrix.evaluate()
    A = linear_system(H)
    assert A.shape == (2 * 6 - 1 + 6 * 5, 36)


def test_two_defect_routes_agree():
    cases = [("F4_1", {"a": 0.3}, 1), ("F4_1", {"a": math.pi / 2}, 3), ("F6", {}, 4),
             ("D6_1", {"c": 0.5}, 4), ("D10", {}, 16)]
    for name, assignment, expected in cases:
        p = to_phase_vector(catalog.get(name).matrix, assignment)
        assert defect_flow(p).defect == expected
        assert defect_linear_system(p).defect == expected
        rep = cross_check_defect(p)
        assert rep.agreement and rep.defect == expected


def test_defect_d2_is_zero():
    assert cross_check_defect(PhaseVector(2, [math.pi])).defect == 0


def test_mismatch_raises_with_bad_threshold(f4_point):
    # a threshold between the flow and linear-system scales splits the two routes
    with pytest.raises(DefectMismatch):
        cross_check_defect(f4_point, tol=3.0)


def test_non_hadamard_rejected():
    with pytest.raises(NotHadamard):
        defect_flow(PhaseVector(3, [0.1, 0.2, 0.3, 0.4]))
    with pytest.raises(NotHadamard):
        defect_linear_system(PhaseVector(3, [0.1, 0.2, 0.3, 0.4]))


def test_spectrum_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_defect_invariant_under_permutation(rng):
    p = to_phase_vector(catalog.get("D6_1").matrix, {"c": 0.7})
    for _ in range(4):
        rp = [0, *(rng.permutation(5) + 1)]
        cp = [0, *(rng.permutation(5) + 1)]
        assert cross_check_defect(permute_core(p, rp, cp)).defect == 4


def test_arbitrary_precision_defect():
    prec = Precision.arbitrary(40)
    p = to_phase_vector(catalog.get("F4_1").matrix, {"a": prec.pi / 2}, prec)
    rep = cross_check_defect(p, prec=prec)
    assert rep.defect == 3
    data = spectrum(jacobian(p, prec), prec=prec)
    # threshold is 10**(-digits/2) times the spectral radius (32 here)
    assert float(data.tol * 10 ** 20) == pytest.approx(32, rel=1e-12)
