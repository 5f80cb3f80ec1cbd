import unittest

import numpy as np
import pytest
import sympy as sp

from soliton_surfaces.cpn_model import (
    ProjectorSource,
    _vector_field,
    algebraic_conditions_residual,
    chain_identity_residual,
    el_residual,
    euler_characteristic,
    gwfi,
    gwfi_derivative_residual,
    ladder_residual,
    lowering,
    projector_from_vector,
    raising,
    raising_theta,
    theta_constraint_residual,
    theta_el_residual,
    theta_of,
    veronese_chain,
    veronese_seed,
)
from soliton_surfaces.diffops import X, Y, Z
from soliton_surfaces.errors import ChainLengthError, ContractViolationError
from soliton_surfaces.matrixcore import is_rank_one_projector


def test_cp1_projectors_match_closed_form(cp1):
    z = 0.8 - 1.3j
    a = abs(z) ** 2
    expected = np.array([[1, np.conj(z)], [z, a]]) / (1 + a)
    assert np.allclose(cp1[0](z.real, z.imag), expected, atol=1e-14)
    assert np.allclose(cp1[1](z.real, z.imag), np.eye(2) - expected, atol=1e-14)


def test_projector_at_origin(cp1):
    assert np.allclose(cp1[0](0.0, 0.0), [[1, 0], [0, 0]])
    assert np.allclose(cp1[1](0.0, 0.0), [[0, 0], [0, 1]])


def test_chain_identities(chain, points):
    xs, ys, _ = points
    assert np.max(chain_identity_residual(chain, xs, ys)) < 1e-12
    for k in range(chain.N):
        _, passed = is_rank_one_projector(chain[k](xs, ys), 1e-12)
        assert passed


def test_euler_lagrange(chain, points):
    xs, ys, _ = points
    for k in range(chain.N):
        assert np.max(el_residual(chain[k], xs, ys)) < 1e-8


def test_euler_lagrange_fails_for_non_harmonic_projector():
    # f = (1, z + |z|²) is not holomorphic
    p = _vector_field(sp.Matrix([1, Z + X**2 + Y**2]), "nonharmonic")
    assert float(el_residual(p, 0.6, 0.3)) > 1e-3


def test_ladder_operators(chain):
    for x, y in ((0.4, -0.9), (1.7, 0.2)):
        assert ladder_residual(chain, x, y) < 1e-10


def test_ladder_ends_vanish(cp1):
    assert np.allclose(raising(cp1[1], 0.5, 0.5), 0.0)
    assert np.allclose(lowering(cp1[0], 0.5, 0.5), 0.0)


def test_theta_form(chain, points):
    xs, ys, _ = points
    for k in range(chain.N):
        theta = theta_of(chain[k])
        assert np.max(theta_constraint_residual(theta, xs, ys)) < 1e-12
        assert np.max(theta_el_residual(theta, xs, ys)) < 1e-8
        expected = raising(chain[k], 0.9, -0.3)
        assert np.allclose(raising_theta(theta, 0.9, -0.3), expected, atol=1e-10)


class TestGeneralizedWeierstrass(unittest.TestCase):
    def setUp(self):
        self.chain = veronese_chain(2)
        self.xs = np.array([0.3, -1.1, 2.2])
        self.ys = np.array([0.5, 0.4, -1.7])

    def test_f0_is_radius_half_sphere(self):
        F0 = gwfi(self.chain, 0)(self.xs, self.ys)
        self.assertLess(np.max(np.abs(F0 @ F0 + 0.25 * np.eye(2))), 1e-14)

    def test_f1_equals_f0_for_cp1(self):
        F0 = gwfi(self.chain, 0)(self.xs, self.ys)
        F1 = gwfi(self.chain, 1)(self.xs, self.ys)
        self.assertTrue(np.allclose(F0, F1, atol=1e-14))

    def test_derivatives(self):
        for k in range(2):
            self.assertLess(np.max(gwfi_derivative_residual(self.chain, k, self.xs, self.ys)), 1e-10)

    def test_algebraic_conditions(self):
        self.assertLess(np.max(algebraic_conditions_residual(self.chain, self.xs, self.ys)), 1e-12)

    def test_last_member_identity_at_origin(self):
        # F_1 = diag(-i/2, i/2): roots i(c-1) and i(c-2) with c = 3/2
        F1 = gwfi(self.chain, 1)(0.0, 0.0)
        np.testing.assert_allclose(F1, np.diag([-0.5j, 0.5j]), atol=1e-14)
        self.assertLess(float(algebraic_conditions_residual(self.chain, 0.0, 0.0)), 1e-14)

    def test_algebraic_conditions_detect_wrong_last_member(self):
        fields = [gwfi(self.chain, k)(self.xs, self.ys) for k in range(2)]
        fields[1] = fields[1] + 0.5j * np.eye(2)
        self.assertGreater(
            np.min(algebraic_conditions_residual(self.chain, self.xs, self.ys, fields)), 0.1
        )

    def test_algebraic_conditions_detect_wrong_field(self):
        fields = [gwfi(self.chain, k)(self.xs, self.ys) for k in range(2)]
        fields[0] = fields[0] + 0.1j * np.eye(2)
        self.assertGreater(
            np.max(algebraic_conditions_residual(self.chain, self.xs, self.ys, fields)), 1e-3
        )


@pytest.mark.slow
def test_algebraic_conditions_cp2(cp2, points):
    xs, ys, _ = points
    assert np.max(algebraic_conditions_residual(cp2, xs, ys)) < 1e-10


def test_veronese_seed():
    assert veronese_seed(2) == ((1.0,), (0.0, 1.0))
    seed = veronese_seed(3)
    assert seed[1] == (0.0, pytest.approx(np.sqrt(2.0)))


def test_chain_validation():
    with pytest.raises(ContractViolationError):
        veronese_chain(1)
    with pytest.raises(ContractViolationError):
        veronese_chain(2, [(1.0,)])
    with pytest.raises(ChainLengthError) as info:
        veronese_chain(2, [(1.0,), (2.0,)])
    assert info.value.index == 1


def test_chain_index_check(cp1):
    cp1.check_index(1)
    with pytest.raises(ContractViolationError):
        cp1.check_index(2)


def test_projector_from_vector():
    p = projector_from_vector([1.0, 1j])
    assert p.source is ProjectorSource.FROM_VECTOR
    assert np.allclose(p.matrix, [[0.5, -0.5j], [0.5j, 0.5]])
    with pytest.raises(ContractViolationError):
        projector_from_vector([0.0, 0.0])


@pytest.mark.parametrize("k", [0, 1])
@pytest.mark.slow
def test_euler_characteristic(cp1, k):
    chi = euler_characteristic(cp1[k], radius=50.0, n=400)
    assert abs(chi - 2.0) < 0.01


@pytest.mark.slow
def test_euler_characteristic_truncated_disk(cp1):
    # χ(R) = 2 − 2/(1+R²) on the disk of radius R
    chi = euler_characteristic(cp1[0], radius=2.0, n=400)
    assert abs(chi - (2.0 - 2.0 / 5.0)) < 1e-6


def test_euler_characteristic_arguments(cp1):
    with pytest.raises(ContractViolationError):
        euler_characteristic(cp1[0], radius=-1.0)
    with pytest.raises(ContractViolationError):
        euler_characteristic(cp1[0].numeric())
