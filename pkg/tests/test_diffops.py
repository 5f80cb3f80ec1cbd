import math

import numpy as np
import pytest
import sympy as sp

from soliton_surfaces.diffops import (
    EXACT_ORDER,
    T,
    X,
    Y,
    Z,
    ZBAR,
    FieldSampler,
    SpectralPoint,
    central_difference,
    convergence_order,
    d_lambda,
    expression_cache_info,
    map_chunks,
    partial_x,
    partial_y,
    wirtinger,
)
from soliton_surfaces.errors import ContractViolationError, FieldEvaluationError


def holomorphic():
    return FieldSampler.from_expr(sp.Matrix([[Z**2, Z], [ZBAR, 1]]), "h")


def test_wirtinger_derivatives_exact():
    d, dbar = wirtinger(holomorphic(), 0.7, -0.4)
    z = 0.7 - 0.4j
    assert np.allclose(d, [[2 * z, 1], [0, 0]])
    assert np.allclose(dbar, [[0, 0], [1, 0]])


def test_numeric_twin_agrees_with_exact():
    f = FieldSampler.from_expr(
        sp.Matrix([[sp.exp(X) * sp.sin(Y), X * Y * T], [1 / (1 + X**2 + Y**2), sp.cos(X - T)]]), "f"
    )
    fd = f.numeric()
    assert not fd.exact
    x, y, t = np.array([0.3, -1.2]), np.array([0.5, 0.9]), np.array([0.5, 2.0])
    for var in ("x", "y", "t"):
        assert np.max(np.abs(fd.partial(var)(x, y, t) - f.partial(var)(x, y, t))) < 1e-6
    assert np.max(np.abs(fd.d()(x, y, t) - f.d()(x, y, t))) < 1e-6


def test_convergence_order_of_stencil():
    f = FieldSampler.from_expr(sp.Matrix([[sp.exp(X) * sp.sin(Y), 0], [0, sp.exp(-X)]]), "f")
    assert convergence_order(f, 0.3, 0.2) >= 3.5
    assert convergence_order(f.numeric(), 0.3, 0.2) >= 3.5


def test_convergence_order_exact_for_polynomials():
    f = FieldSampler.from_expr(sp.Matrix([[X, 2 * X], [0, 1]]), "lin")
    assert convergence_order(f, 0.5, 0.5) == EXACT_ORDER
    assert math.isinf(EXACT_ORDER)


def test_central_difference_explicit_step():
    f = FieldSampler.from_expr(sp.Matrix([[X**3, 0], [0, 0]]), "cube")
    value = central_difference(f, "x", 2.0, 0.0, 0.0, 0.1)
    assert abs(value[0, 0] - 12.0) < 1e-12


def test_d_lambda_is_minus_i_d_dt():
    f = FieldSampler.from_expr(sp.eye(2) * T**2, "t2")
    value = d_lambda(f, 0.0, 0.0, SpectralPoint(1.5))
    assert np.allclose(value, -1j * 3.0 * np.eye(2))
    with pytest.raises(ValueError):
        SpectralPoint(float("nan"))


def test_algebra_matches_numpy():
    a = holomorphic()
    b = FieldSampler.from_expr(sp.Matrix([[0, sp.I], [X, Y]]), "b")
    x, y = 0.4, 1.1
    av, bv = a(x, y), b(x, y)
    assert np.allclose((a @ b)(x, y), av @ bv)
    assert np.allclose(a.bracket(b)(x, y), av @ bv - bv @ av)
    assert np.allclose((a - b)(x, y), av - bv)
    assert np.allclose(a.scale(X)(x, y), x * av)
    assert np.allclose(a.dagger()(x, y), av.conj().T)
    # mixed exact/numeric arithmetic falls back to the numeric path
    mixed = a.numeric() + b
    assert not mixed.exact
    assert np.allclose(mixed(x, y), av + bv)


def test_dimension_mismatch():
    with pytest.raises(ContractViolationError):
        holomorphic() + FieldSampler.identity(3)
    with pytest.raises(ContractViolationError):
        holomorphic().partial("z")


def test_strict_evaluation_reports_location():
    f = FieldSampler.from_expr(sp.Matrix([[1 / X, 0], [0, 1]]), "inv")
    with pytest.raises(FieldEvaluationError) as info:
        f(np.array([1.0, 0.0]), np.array([0.0, 2.0]))
    assert info.value.location == (0.0, 2.0, 0.0)
    values = f.evaluate(np.array([1.0, 0.0]), np.zeros(2), strict=False)
    assert np.isfinite(values[0]).all()
    assert not np.isfinite(values[1]).all()


def test_shift_t():
    f = FieldSampler.from_expr(sp.eye(2) * T, "t")
    assert np.allclose(f.shift_t(0.5)(0.0, 0.0, 1.0), 1.5 * np.eye(2))
    assert np.allclose(f.numeric().shift_t(0.5)(0.0, 0.0, 1.0), 1.5 * np.eye(2))


def test_map_chunks_keeps_order():
    xs = np.arange(10.0)
    ys = -np.arange(10.0)
    out = map_chunks(lambda a, b: a + 2 * b, xs, ys, workers=4, chunk=3)
    assert np.array_equal(out, xs + 2 * ys)
    first, second = map_chunks(lambda a, b: (a, b), xs, ys, workers=2, chunk=4)
    assert np.array_equal(first, xs)
    assert np.array_equal(second, ys)


def test_real_partials_of_projector(cp1):
    P0 = cp1[0]
    x, y = 0.7, -1.3
    px, py = partial_x(P0, x, y), partial_y(P0, x, y)
    d, dbar = wirtinger(P0, x, y)
    np.testing.assert_allclose(px, d + dbar, atol=1e-13)
    np.testing.assert_allclose(py, 1j * (d - dbar), atol=1e-13)
    np.testing.assert_allclose(px, central_difference(P0, "x", x, y, 0.0, 1e-3), atol=1e-9)
    np.testing.assert_allclose(py, central_difference(P0, "y", x, y, 0.0, 1e-3), atol=1e-9)
    # P0 is Hermitian, so are its real partials
    np.testing.assert_allclose(px, px.conj().T, atol=1e-14)


def test_rebuilt_fields_share_compiled_evaluator():
    m = sp.Matrix([[X * Y / (1 + X**2), Z], [ZBAR, (X**2 - 1) / (X - 1)]])
    a = FieldSampler.from_expr(m, "a", simplify=True)
    b = FieldSampler.from_expr(m, "b", simplify=True)
    assert a is not b
    assert a.expr[1, 1] == X + 1
    before = expression_cache_info()["compile"].hits
    assert a._evaluator is b._evaluator
    assert expression_cache_info()["compile"].hits > before
    assert a.d().expr == b.d().expr
    np.testing.assert_allclose(a.bracket(a.d())(0.4, 0.2, 1.0), b.bracket(b.d())(0.4, 0.2, 1.0))
