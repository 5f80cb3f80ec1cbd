import numpy as np
import pytest

from soliton_surfaces.diffops import FieldSampler
from soliton_surfaces.errors import ContractViolationError, MappingUndefinedError
from soliton_surfaces.gauges import (
    Family,
    GaugeField,
    MappingDirection,
    action_for,
    compatibility_residual,
    conformal_action,
    gauge_c,
    gauge_fg,
    gauge_g,
    gauge_invariants,
    gauge_st,
    generalized_action,
    induced_characteristics,
    linearization_residual,
    mapping_consistency,
    mapping_m,
    mixed_equation_residual,
    printed_generalized_characteristics,
    prop1_residual,
    prop2_residual,
    scaling_action,
    st_action,
)
from soliton_surfaces.linear_spectral import potentials, wavefunction

SYMMETRIES = [Family.G_SCALING, Family.C_CONFORMAL, Family.FG_GENERALIZED]


@pytest.mark.parametrize("k", [0, 1])
def test_prop1_for_spectral_gauge(cp1, points, k):
    xs, ys, ts = points
    gauge = gauge_st(cp1, k)
    assert gauge.family is Family.ST
    assert np.max(prop1_residual(gauge, potentials(cp1, k), xs, ys, ts)) < 1e-8


@pytest.mark.parametrize("family", SYMMETRIES)
@pytest.mark.parametrize("k", [0, 1])
def test_prop2_for_symmetries(cp1, points, family, k):
    xs, ys, ts = points
    action = action_for(family, cp1, k)
    U = potentials(cp1, k)
    assert np.max(prop2_residual(action.gauge, U, action.characteristics, xs, ys, ts)) < 1e-8
    assert np.max(compatibility_residual(action.gauge, U, xs, ys, ts)) < 1e-8
    assert np.max(linearization_residual(action, wavefunction(cp1, k), xs, ys, ts)) < 1e-8


def test_linearization_spectral(cp1, points):
    xs, ys, ts = points
    action = st_action(cp1, 0)
    assert np.max(linearization_residual(action, wavefunction(cp1, 0, "su"), xs, ys, ts)) < 1e-8


@pytest.mark.slow
def test_prop2_cp2(cp2, points):
    xs, ys, ts = points
    for k in range(3):
        U = potentials(cp2, k)
        for family in SYMMETRIES:
            action = action_for(family, cp2, k)
            assert np.max(prop2_residual(action.gauge, U, action.characteristics, xs, ys, ts)) < 1e-8


def test_gauges_are_traceless(cp1, points):
    xs, ys, ts = points
    for gauge in (gauge_st(cp1, 0), gauge_g(cp1, 0), gauge_c(cp1, 0), gauge_fg(cp1, 0)):
        tr, _ = gauge_invariants(gauge, xs, ys, ts)
        assert np.max(tr) < 1e-10


def test_induced_characteristics_match_scaling(cp1, points):
    xs, ys, ts = points
    action = scaling_action(cp1, 0)
    A1, A2 = induced_characteristics(action.gauge, action.potentials)
    assert np.allclose(A1(xs, ys, ts), action.characteristics[0](xs, ys, ts), atol=1e-10)
    assert np.allclose(A2(xs, ys, ts), action.characteristics[1](xs, ys, ts), atol=1e-10)


def test_conformal_constant_minus_one_is_potential_sum(cp1):
    action = conformal_action(cp1, 0, g=-1)
    U = potentials(cp1, 0)
    x, y, t = 0.6, -0.8, 0.5
    assert np.allclose(action.gauge(x, y, t), (U.U1 + U.U2)(x, y, t), atol=1e-12)


def test_printed_characteristics_differ(cp1):
    U = potentials(cp1, 0)
    fg = generalized_action(cp1, 0)
    printed = printed_generalized_characteristics(U)
    x, y, t = 0.9, 0.4, 0.5
    assert len(printed) == 2
    residual = prop2_residual(fg.gauge, U, printed, x, y, t)
    assert np.isfinite(residual)


@pytest.mark.parametrize("k", [0, 1])
def test_mapping_matrix(cp1, k):
    st, fg = st_action(cp1, k), generalized_action(cp1, k)
    psi = wavefunction(cp1, k, "su")
    for x, y, t in ((1.0, 1.0, 1.0), (0.3, -0.7, 0.5), (-1.6, 0.2, 2.0)):
        gauge_res, wave_res = mapping_consistency(st, fg, psi, x, y, t)
        assert gauge_res < 1e-8
        assert wave_res < 1e-8
        M = mapping_m(st.gauge, fg.gauge, x, y, t)
        M_inv = mapping_m(st.gauge, fg.gauge, x, y, t, MappingDirection.ST_TO_FG)
        assert np.allclose(M.M @ M_inv.M, np.eye(2), atol=1e-8)
        assert np.allclose(M.inverse(), M_inv.M, atol=1e-8)


def test_mapping_undefined_for_singular_gauge(cp1):
    singular = GaugeField(FieldSampler.zero(2), Family.FG_GENERALIZED)
    with pytest.raises(MappingUndefinedError):
        mapping_m(gauge_st(cp1, 0), singular, 0.5, 0.5, 1.0)


def test_mixed_equation_is_finite(cp1):
    st, fg = st_action(cp1, 0), generalized_action(cp1, 0)
    value = mixed_equation_residual(st, fg, wavefunction(cp1, 0, "su"), 0.4, 0.7, 1.0)
    assert np.isfinite(value)


def test_action_for_rejects_non_symmetries(cp1):
    assert action_for(Family.ST, cp1, 0).family is Family.ST
    with pytest.raises(ContractViolationError):
        action_for(Family.GWFI, cp1, 0)
