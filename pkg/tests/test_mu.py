import cmath
from fractions import Fraction

import numpy as np
import pytest

from realstab.errors import DimensionMismatch, NotStable
from realstab.matrix import TransferMatrix
from realstab.mu import mu_destab_test, mu_m_matrix
from realstab.realization import Transformation, build_plant_controller, stability_matrix

from conftest import HALF, Z, random_stable_fir_tm, rf


def scalar_S():
    G = TransferMatrix(1, 1, [rf(1, Z)])
    K = TransferMatrix(1, 1, [rf(HALF)])
    return stability_matrix(build_plant_controller(G, K))


def test_identity_wrapping_returns_stability_matrix():
    S = scalar_S()
    T = Transformation(TransferMatrix.identity(2))
    assert mu_m_matrix(S, T, TransferMatrix.identity(2)) == S


def test_row_selection():
    S = scalar_S()
    T = Transformation(TransferMatrix.identity(2))
    F = TransferMatrix(1, 2, [rf(1), rf(0)])
    M = mu_m_matrix(S, T, F)
    assert M == TransferMatrix(1, 2, [rf(2 * Z, 2 * Z - 1), rf(2, 2 * Z - 1)])


def test_scaling_transformation_doubles():
    S = scalar_S()
    T = Transformation(2 * TransferMatrix.identity(2))
    M = mu_m_matrix(S, T, TransferMatrix.identity(2))
    assert M == 2 * S


def test_requires_stable_nominal():
    bad = TransferMatrix(1, 1, [rf(1, Z - 2)])
    T = Transformation(TransferMatrix.identity(1))
    with pytest.raises(NotStable):
        mu_m_matrix(bad, T, TransferMatrix.identity(1))


def test_shape_mismatch():
    S = scalar_S()
    T = Transformation(TransferMatrix.identity(3))
    with pytest.raises(DimensionMismatch):
        mu_m_matrix(S, T, TransferMatrix.identity(2))


def test_destab_zero_perturbation():
    M = TransferMatrix(1, 1, [rf(Z, 2 * Z - 1)])
    det_fn, verdict = mu_destab_test(M, TransferMatrix.zeros(1, 1))
    assert det_fn == rf(1)
    assert verdict.is_stable


def test_destab_boundary_witness():
    M = TransferMatrix(1, 1, [rf(Z, 2 * Z - 1)])
    det_fn, verdict = mu_destab_test(M, TransferMatrix.identity(1))
    assert det_fn == rf(Z - 1, 2 * Z - 1)
    assert verdict.status == "unstable"  # boundary roots count as destabilizing
    assert any(abs(root - 1.0) < 1e-9 for root, _ in verdict.witnesses)


def test_destab_identically_singular():
    M = TransferMatrix.identity(1)
    det_fn, verdict = mu_destab_test(M, TransferMatrix.identity(1))
    assert det_fn.is_zero
    assert verdict.status == "unstable"


def test_destab_interior_perturbation_stays_stable():
    M = TransferMatrix(1, 1, [rf(Z, 2 * Z - 1)])
    det_fn, verdict = mu_destab_test(M, TransferMatrix(1, 1, [rf(HALF)]))
    assert verdict.is_stable
    assert det_fn == rf(Fraction(3, 2) * Z - 1, 2 * Z - 1)


def test_destab_rectangular_analysis_matrix():
    M = TransferMatrix(1, 2, [rf(Z, 2 * Z - 1), rf(1, 2 * Z - 1)])
    delta = TransferMatrix(2, 1, [rf(HALF), rf(0)])
    det_fn, verdict = mu_destab_test(M, delta)
    # det(I - M delta) = 1 - z/(4z - 2) = (3z - 2)/(4z - 2)
    assert det_fn == rf(Fraction(3, 4) * Z - HALF, Z - HALF)
    assert verdict.is_stable
    destab = TransferMatrix(2, 1, [rf(1), rf(0)])
    _, verdict2 = mu_destab_test(M, destab)
    assert verdict2.status == "unstable"


def test_determinant_matches_pointwise_evaluation(rng):
    M = TransferMatrix.from_rows([
        [rf(Z, 2 * Z - 1), rf(1, 2 * Z - 1)],
        [rf(HALF), rf(Z, 4 * Z - 1)],
    ])
    delta = random_stable_fir_tm(rng, 2, 2, order=1)
    det_fn, _ = mu_destab_test(M, delta)
    for k in range(16):
        omega = rng.uniform(0.0, 3.14159)
        point = cmath.exp(1j * omega)
        direct = np.linalg.det(np.eye(2) - M.evaluate(point) @ delta.evaluate(point))
        assert abs(det_fn(point) - direct) < 1e-8
