import numpy as np
import pytest

from soliton_surfaces.closed_forms import (
    DISPLAYS,
    PARAMETRIC,
    DisplayComparison,
    compare_display,
    compare_parametric,
    display_registry,
    fit_alignment,
    in_row_gauge,
    printed_f0,
    printed_p0,
    row_gauge,
)
from soliton_surfaces.diffops import T, FieldSampler
from soliton_surfaces.linear_spectral import wavefunction_determinant

POINTS = [(0.3, 0.4, 0.5), (-1.2, 0.7, 1.0), (2.5, -3.1, 2.0), (0.05, -0.02, 0.25)]

GATING = [d for d in DISPLAYS if d.gating]


@pytest.mark.parametrize("display", GATING, ids=lambda d: d.name)
def test_gating_tables(cp1, display):
    result = compare_display(display, cp1, POINTS)
    assert result.gating
    assert result.passed(1e-10), f"{display.name}: {result.deviation:.3e}"


def test_non_gating_tables_are_reported(cp1):
    for display in DISPLAYS:
        if display.gating:
            continue
        result = compare_display(display, cp1, POINTS)
        assert np.isfinite(result.deviation)
        assert result.note


def test_registry():
    registry = display_registry()
    assert len(registry) == len(DISPLAYS)
    assert registry["S1^FG"].note == "S1^FG = S0^FG"


def test_comparison_threshold():
    result = DisplayComparison("x", 1e-9, True, "")
    assert result.passed(1e-8)
    assert not result.passed(1e-10)


def test_printed_projector_at_origin():
    assert np.allclose(printed_p0(0j), [[1, 0], [0, 0]])
    assert np.allclose(printed_f0(0j) @ printed_f0(0j), -0.25 * np.eye(2))


@pytest.mark.parametrize("k", [0, 1])
def test_row_gauge(k):
    R, R_inv = row_gauge(k)
    t = 0.7
    assert np.allclose(R(0.0, 0.0, t) @ R_inv(0.0, 0.0, t), np.eye(2))
    det = complex(wavefunction_determinant(k).subs(T, t))
    assert R(0.0, 0.0, t)[0, 0] * det == pytest.approx(1.0)
    assert np.allclose(in_row_gauge(FieldSampler.identity(2), k)(1.0, 2.0, t), np.eye(2))


def test_fit_alignment_recovers_reflection():
    rng = np.random.default_rng(7)
    A = rng.normal(size=(20, 3))
    c = np.array([0.5, -1.0, 2.0])
    fit = fit_alignment(A, -A + c)
    assert fit.sign == -1
    assert np.allclose(fit.constant, c)
    assert fit.residual < 1e-12
    assert fit.procrustes_residual < 1e-12
    assert fit.scale == pytest.approx(1.0)


def test_fit_alignment_is_minimax():
    # one outlying offset: the midrange halves it, a mean would not
    A = np.zeros((10, 3))
    B = A.copy()
    B[0, 0] = 1.0
    fit = fit_alignment(A, B)
    assert fit.residual == pytest.approx(0.5)
    assert np.allclose(fit.constant, [0.5, 0.0, 0.0])


def test_fit_alignment_rotation():
    rng = np.random.default_rng(8)
    A = rng.normal(size=(15, 3))
    theta = 0.4
    rot = np.array([[np.cos(theta), -np.sin(theta), 0], [np.sin(theta), np.cos(theta), 0], [0, 0, 1]])
    fit = fit_alignment(A, 2 * A @ rot)
    assert fit.residual > 1e-3
    assert fit.scale == pytest.approx(2.0)


@pytest.mark.parametrize("display", PARAMETRIC, ids=lambda d: d.name)
@pytest.mark.slow
def test_parametric_fit_runs(cp1, display):
    rng = np.random.default_rng(3)
    x, y = rng.uniform(-2, 2, 12), rng.uniform(-2, 2, 12)
    fit = compare_parametric(display, cp1, x, y, 0.5)
    assert fit.sign in (-1, 1)
    assert np.isfinite(fit.procrustes_residual)
