"""Invariants over random points and matrices."""

import numpy as np
import sympy as sp
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from soliton_surfaces.cpn_model import projector_from_vector, veronese_chain
from soliton_surfaces.diffops import X, Y, Z, FieldSampler
from soliton_surfaces.immersion import immersion_st, sphere_fit
from soliton_surfaces.linear_spectral import potentials, wavefunction, wavefunction_invariants, zcc_residual
from soliton_surfaces.matrixcore import (
    algebra_residuals,
    commutator,
    is_rank_one_projector,
    su_basis,
    su_project,
    trace,
)
from soliton_surfaces.utils.validation import parse_complex

CP1 = veronese_chain(2)

finite = dict(allow_nan=False, allow_infinity=False)
coords = st.floats(min_value=-4.0, max_value=4.0, **finite)
spectral = st.floats(min_value=0.05, max_value=3.0, **finite)
coefficients = st.lists(st.floats(min_value=-10.0, max_value=10.0, **finite), min_size=8, max_size=8)


@given(coefficients, coefficients)
@settings(max_examples=50, deadline=None)
def test_bracket_stays_in_su3(a, b):
    basis = su_basis(3)
    herm, tr = algebra_residuals(commutator(basis.reconstruct(a), basis.reconstruct(b)))
    assert herm < 1e-9
    assert tr < 1e-9


complex_entries = st.builds(
    complex,
    st.floats(min_value=-3.0, max_value=3.0, **finite),
    st.floats(min_value=-3.0, max_value=3.0, **finite),
)
matrices3 = st.lists(complex_entries, min_size=9, max_size=9).map(lambda v: np.array(v).reshape(3, 3))


@given(matrices3, matrices3, matrices3)
@settings(max_examples=50, deadline=None)
def test_commutator_antisymmetry_and_jacobi(a, b, c):
    assert np.allclose(commutator(a, b), -commutator(b, a))
    jacobi = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
    assert np.allclose(jacobi, 0, atol=1e-9)
    assert abs(trace(commutator(a, b))) < 1e-10


@given(coefficients)
@settings(max_examples=50, deadline=None)
def test_su_projection_recovers_coefficients(c):
    basis = su_basis(3)
    assert np.allclose(su_project(basis.reconstruct(c), basis), c, atol=1e-10)


@given(
    st.lists(complex_entries, min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3),
    complex_entries.filter(lambda s: abs(s) > 1e-3),
)
@settings(max_examples=50, deadline=None)
def test_projector_is_scale_invariant(v, s):
    p = projector_from_vector(v).matrix
    assert np.allclose(projector_from_vector(np.asarray(v) * s).matrix, p, atol=1e-10)


@given(st.integers(min_value=-5, max_value=5), coords, coords)
@settings(max_examples=30, deadline=None)
def test_wirtinger_derivative_is_linear(a, x, y):
    F = FieldSampler.from_expr(sp.Matrix([[X**2 * Y, Z], [sp.I * Y, X - Y**3]]), "F")
    G = FieldSampler.from_expr(sp.Matrix([[Z**2, X * Y], [1, sp.conjugate(Z)]]), "G")
    lhs = (F.scale(a) + G).d()(x, y)
    rhs = a * F.d()(x, y) + G.d()(x, y)
    assert np.allclose(lhs, rhs, atol=1e-9)

@given(coords, coords)
@settings(max_examples=40, deadline=None)
def test_chain_members_are_projectors(x, y):
    for k in range(2):
        _, passed = is_rank_one_projector(CP1[k](x, y))
        assert passed


@given(coords, coords, spectral)
@settings(max_examples=30, deadline=None)
def test_zero_curvature(x, y, t):
    assume(np.hypot(x, y) > 0.05)
    for k in range(2):
        assert zcc_residual(potentials(CP1, k), x, y, t) < 1e-8


@given(coords, coords, spectral)
@settings(max_examples=30, deadline=None)
def test_normalised_wavefunction_is_special_unitary(x, y, t):
    inverse, unitary, det = wavefunction_invariants(wavefunction(CP1, 0, "su"), x, y, t)
    assert inverse < 1e-10
    assert unitary < 1e-10
    assert abs(det - 1) < 1e-10


@given(coords, coords)
@settings(max_examples=30, deadline=None)
def test_spectral_surface_lies_on_sphere(x, y):
    values = immersion_st(CP1, 0)(x, y, 1.0)
    assert np.allclose(values @ values, -0.25 * np.eye(2), atol=1e-10)


@given(
    st.floats(min_value=0.1, max_value=10.0, **finite),
    st.lists(st.floats(min_value=-5.0, max_value=5.0, **finite), min_size=3, max_size=3),
)
@settings(max_examples=30, deadline=None)
def test_sphere_fit_recovers_sphere(radius, center):
    rng = np.random.default_rng(0)
    v = rng.normal(size=(30, 3))
    pts = radius * v / np.linalg.norm(v, axis=1, keepdims=True) + center
    fit = sphere_fit(pts)
    assert abs(fit.radius - radius) < 1e-8 * max(1.0, radius)
    assert np.allclose(fit.center, center, atol=1e-8)


@given(st.floats(min_value=-1e6, max_value=1e6, **finite), st.floats(min_value=-1e6, max_value=1e6, **finite))
def test_parse_complex_literal(re, im):
    text = f"{re!r}{'+' if im >= 0 else '-'}{abs(im)!r}i"
    assert parse_complex(text) == complex(re, im)
