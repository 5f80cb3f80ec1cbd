import math

import pytest

from soliton_surfaces.config import Tolerances
from soliton_surfaces.surface_io import GridSpec, export_json
from soliton_surfaces.verification import (
    VerificationCheck,
    VerificationConfig,
    VerificationReport,
    _Battery,
    _curvature_checks,
    run_verification_suite,
)

GRID = GridSpec(-2.0, 2.0, -2.0, 2.0, 9, 9)


def quick_config(**overrides):
    options = dict(grid=GRID, samples=12, fixture_samples=6, euler_n=400, curvature=False, euler=False)
    options.update(overrides)
    return VerificationConfig(**options)


@pytest.fixture(scope="module")
def full_report():
    return run_verification_suite(quick_config(curvature=True, euler=True))


@pytest.mark.slow
def test_all_gating_checks_pass(full_report):
    failed = [f"{c.name}: {c.max_residual:.3e} ({c.note})" for c in full_report.failures()]
    assert full_report.all_gating_passed, failed


@pytest.mark.slow
def test_report_contents(full_report):
    names = {c.name for c in full_report.checks}
    for expected in ("zcc[0]", "zcc[1]", "lsp.su[1]", "prop1.st[0]", "mapping.gauge[1]", "euler[0]",
                     "curvature.st.K[0]", "sphere.radius[1]", "table.P0"):
        assert expected in names
    assert full_report.get("sphere.radius[0]").passed
    env = full_report.environment
    assert env["N"] == 2
    assert env["k_values"] == [0, 1]
    summary = full_report.to_dict()["summary"]
    assert summary["gating_passed"] is True
    assert summary["total"] == len(full_report.checks)


@pytest.mark.slow
def test_non_gating_checks_are_listed(full_report):
    printed = full_report.get("prop2.fg.printed_characteristics[0]")
    assert not printed.gating
    assert printed.note


def test_deterministic():
    first = export_json(run_verification_suite(quick_config(seed=5)))
    second = export_json(run_verification_suite(quick_config(seed=5)))
    assert first == second


def test_tight_tolerance_fails():
    report = run_verification_suite(quick_config(tolerances=Tolerances().with_residual(1e-30)))
    assert not report.all_gating_passed
    assert not report.get("zcc.fd[0]").passed
    assert report.failures()


@pytest.mark.slow
def test_cp2_subset():
    report = run_verification_suite(quick_config(N=3, k_values=(1,), samples=8))
    assert report.environment["k_values"] == [1]
    assert report.all_gating_passed, [c.name for c in report.failures()]
    assert not any(c.name.startswith("table.") for c in report.checks)


def test_battery_records_errors():
    battery = _Battery(Tolerances())

    def boom():
        raise ValueError("bad input")

    battery.run("boom", boom, 1e-8)
    check = battery.checks[0]
    assert not check.passed
    assert check.note == "ValueError: bad input"
    nan = battery.add("nan", [1e-12, math.nan], 1e-8)
    assert nan.max_residual == math.inf
    empty = battery.add("empty", [], 1e-8)
    assert empty.samples == 0 and not empty.passed


def test_pass_flag_follows_tolerance():
    check = VerificationCheck("c", 1e-9, 1e-10, 4, 1e-8)
    assert check.passed
    assert check.to_dict()["pass"] is True
    report = VerificationReport([check, VerificationCheck("d", 1.0, 1.0, 1, 1e-8, gating=False)])
    assert report.all_gating_passed
    assert [c.name for c in report.failures(gating_only=False)] == ["d"]
    with pytest.raises(KeyError):
        report.get("missing")


def test_ovaloid_claims_are_reported_not_gated(cp1):
    battery = _Battery(Tolerances())
    _curvature_checks(battery, cp1, (0,), quick_config(curvature=True))
    report = VerificationReport(battery.checks)
    for family in ("c", "fg"):
        check = report.get(f"curvature.{family}.K_nonpositive_fraction")
        assert check.gating is False
        assert check.tolerance == 1e-12
        assert check.samples == 1
        assert 0.0 <= check.max_residual < 1.0
        label, value = check.note.rsplit(" ", 1)
        assert label == "positive fraction"
        assert float(value) == pytest.approx(1.0 - check.max_residual, abs=1e-6)
    # the round ST surface stays gated
    assert report.get("curvature.st.K[0]").gating
    assert report.all_gating_passed, [c.name for c in report.failures()]
