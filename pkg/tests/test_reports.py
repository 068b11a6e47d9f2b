"""Report contract: stable keys, exemption semantics, ratio sentinels."""

import numpy as np
import pytest

from willmore_lab import immersion as im
from willmore_lab import reports as rp
from willmore_lab.diskgrid import Grid

G65 = Grid(0.5, 65)


@pytest.fixture(scope="module")
def sphere_report():
    return rp.residual_report(im.make_surface("sphere", G65, rho=1.0))


def test_all_contract_keys_present(sphere_report):
    for key in rp.REPORT_KEYS:
        assert key in sphere_report, key
    for key in ("gradn_energy", "conformal_defect", "willmore_energy"):
        assert key in sphere_report


def test_report_accepts_bundle_or_patch(sphere_report):
    bundle = im.make_bundle(im.make_surface("sphere", G65, rho=1.0))
    again = rp.residual_report(bundle)
    for key in rp.REPORT_KEYS:
        assert again[key] == pytest.approx(sphere_report[key], rel=1e-12, abs=1e-300)


def test_sphere_passes_default_thresholds(sphere_report):
    assert rp.check_report(sphere_report, "sphere") == {}


def test_cylinder_exemptions():
    report = rp.residual_report(im.make_surface("cylinder", G65, rho=1.0))
    assert report["divQ_inf"] == pytest.approx(0.25, rel=1e-2)
    assert rp.check_report(report, "cylinder") == {}
    # without the exemption the same report fails on the expected-nonzero keys
    failures = rp.check_report(report, "unknown-surface")
    assert "divQ_inf" in failures and "L_defect" in failures


def test_informational_keys_never_fail(sphere_report):
    tight = {k: 1e-300 for k in rp.INFORMATIONAL_KEYS}
    assert rp.check_report(sphere_report, "sphere", thresholds=tight) == {}


def test_nonfinite_value_fails():
    report = {"a4_resid": float("nan")}
    failures = rp.check_report(report, "sphere", thresholds={"a4_resid": 1.0})
    assert "a4_resid" in failures


def test_expected_f_metadata():
    info = rp.SURFACE_INFO["cylinder"]
    assert info.expected_f({"rho": 2.0}) == pytest.approx(0.125)
    assert rp.SURFACE_INFO["sphere"].expected_f is None


def test_refinement_ratios_with_floor_sentinel():
    coarse = {k: 0.0 for k in rp.REPORT_KEYS}
    fine = {k: 0.0 for k in rp.REPORT_KEYS}
    coarse["a4_resid"], fine["a4_resid"] = 4e-4, 1e-4
    rows = rp.refinement_ratios([coarse, fine])
    assert rows[0]["a4_resid"] == pytest.approx(4.0)
    assert rows[0]["codazzi_resid"] == rp.FLOOR


def test_willmore_flags():
    assert rp.SURFACE_INFO["clifford_torus_patch"].willmore
    assert not rp.SURFACE_INFO["cylinder"].willmore
    assert set(im.WILLMORE_SURFACES) == {
        k for k, v in rp.SURFACE_INFO.items() if v.willmore
    }
