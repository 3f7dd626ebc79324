import numpy as np
import pytest

from att_tomo.config.settings import SMOKE_SETTINGS
from tomo_app.acceptance import (
    AcceptanceResult,
    check_continuity,
    check_doppler,
    check_fbp,
    check_forward_closed_form,
    check_holomorphization,
    check_integrating_factors,
    check_invariant_distributions,
    check_j_kp,
    verify,
)


@pytest.fixture(scope="module")
def smoke_disc():
    return SMOKE_SETTINGS.discretization()


def test_result_verdict():
    assert AcceptanceResult(1, "x", 0.5, 1.0).passed
    assert not AcceptanceResult(1, "x", 1.5, 1.0).passed
    assert not AcceptanceResult(1, "x", float("nan"), 1.0).passed


def test_j_kp_item():
    res = check_j_kp(k_max=3)
    assert res.item == 4
    assert res.passed


def test_forward_closed_form_item(smoke_disc):
    res = check_forward_closed_form(smoke_disc, k_max=3)
    assert res.value < 1e-10


def test_integrating_factor_item_runs(smoke_disc):
    res = check_integrating_factors(smoke_disc)
    assert res.item == 5
    assert res.value >= 0.0
    assert "chordwise" in res.detail


def test_verify_table():
    table = verify(SMOKE_SETTINGS, [4])
    assert list(table["item"]) == [4]
    assert bool(table["passed"].all())
    assert {"value", "tol", "seconds", "detail"} <= set(table.columns)
    with pytest.raises(ValueError, match="Unknown acceptance items"):
        verify(SMOKE_SETTINGS, [13])


def test_fbp_item_checks_refinement(smoke_disc):
    res = check_fbp(smoke_disc, k_max=2)
    assert res.item == 3
    assert np.isfinite(res.value)
    assert "under refinement" in res.detail


def test_holomorphization_item_reports_both_cases(smoke_disc):
    res = check_holomorphization(smoke_disc)
    assert res.tol == 1e-5
    assert "negative modes" in res.detail
    assert "<u_0>/2" in res.detail


def test_continuity_item(smoke_disc):
    res = check_continuity(smoke_disc, n_fields=3)
    assert res.item == 11
    assert res.passed


def test_doppler_item_reports_the_potential_leak(smoke_disc):
    res = check_doppler(smoke_disc)
    assert res.item == 12
    assert "-af (a=0)" in res.detail


def test_invariant_distribution_item(smoke_disc):
    res = check_invariant_distributions(smoke_disc, k_max=2)
    assert res.item == 6
    assert "moments worst" in res.detail
