import json

import numpy as np
import pytest

from att_tomo.analytic import gaussian, polynomial, vanishing_on_boundary
from att_tomo.fields import DiscField, FiberField
from att_tomo.gauge import GaugeRepresentative
from att_tomo.reconstruction import (
    ReconstructionReport,
    doppler_recon,
    fbp_unattenuated,
    peel_cascade,
    recon_bulk,
    recon_full,
    recon_residual,
)
from att_tomo.special_solutions import hif_build
from att_tomo.transport import xray, xray_attenuated, xray_perp

A_CONST = 0.3 + 0.2j
G0 = polynomial({(0, 0): 1.0, (1, 1): -0.5, (1, 0): 0.3})
GS = vanishing_on_boundary(polynomial({(0, 0): 0.5, (0, 1): 0.2j}))


def _rel(got, want, radius=0.9):
    return (got - want).norm(radius) / want.norm(radius)


def test_zero_data_gives_zero_representative(disc):
    rep, report = recon_full(xray(0.0, disc), 2, A_CONST, disc)
    assert rep.m == 2
    assert rep.norm() < 1e-14
    assert not report.peel_diverged
    assert [k for k, _ in report.peel_norms] == [2, 1]
    assert set(report.timings) == {"integrating_factors", "peel", "bulk"}


def test_report_serializes(disc):
    rep, report = recon_full(xray(0.0, disc), 1, None, disc)
    report.compare(rep, GaugeRepresentative.zeros(disc.grid, 1), 0.9, tol=0.05)
    assert report.passed
    payload = json.loads(json.dumps(report.to_dict()))
    assert payload["config"]["m"] == "1"
    assert payload["bulk"]["gs_mode"] == "formula"
    frame = report.to_frame()
    assert list(frame.columns) == ["component", "rel_l2", "rel_l2_interior", "verdict"]
    assert set(frame["verdict"]) == {"PASS"}


def test_argument_checks(disc):
    data = xray(1.0, disc)
    with pytest.raises(ValueError, match=">= 1"):
        recon_residual(data, 0, grid=disc.grid)
    with pytest.raises(ValueError, match="PolarGrid"):
        recon_residual(data, 1)
    with pytest.raises(ValueError, match="gs_mode"):
        recon_bulk(data, None, disc, gs_mode="guess")
    with pytest.raises(ValueError, match="non-negative"):
        peel_cascade(data, -1, None, disc)
    with pytest.raises(ValueError, match="FBP kind"):
        fbp_unattenuated(data, "rcI2", disc)
    with pytest.raises(ValueError, match="Sinogram or BoundaryField"):
        fbp_unattenuated(np.zeros(4), "rcI0", disc)


def test_fbp_of_a_function(disc):
    f = DiscField.from_analytic(disc.grid, G0)
    got = fbp_unattenuated(xray(f, disc), "rcI0", disc)
    assert _rel(got, f) < 5e-2


def test_fbp_of_a_solenoidal_potential(disc):
    h = DiscField.from_analytic(disc.grid, GS)
    got = fbp_unattenuated(xray_perp(h, disc=disc), "rcIperp", disc)
    assert _rel(got, h) < 5e-2


def test_residual_of_a_holomorphic_degree_one_field(disc):
    g_plus = DiscField.from_analytic(disc.grid, polynomial({(0, 0): 0.5, (1, 0): 1.0}))
    g = FiberField.from_modes(disc.grid, 1, {1: g_plus})
    got_plus, got_minus = recon_residual(xray(g, disc), 1, grid=disc.grid)
    assert _rel(got_plus, g_plus) < 5e-2
    assert got_minus.norm(0.9) < 5e-2 * g_plus.norm(0.9)


def test_bulk_recovery_without_attenuation(disc):
    g0 = DiscField.from_analytic(disc.grid, G0)
    gs = DiscField.from_analytic(disc.grid, GS)
    data = xray(g0, disc) + xray_perp(gs, disc=disc)
    got_g0, got_gs, diag = recon_bulk(data, None, disc)
    assert _rel(got_g0, g0) < 5e-2
    assert _rel(got_gs, gs) < 5e-2
    assert diag.gs_mode == "formula"


def test_doppler_without_attenuation_sees_only_the_solenoidal_part(disc):
    out = doppler_recon(xray_perp(GS, None, disc), None, disc)
    gs = DiscField.from_analytic(disc.grid, GS)
    assert not out.mask.any()
    assert np.abs(out.f.values).max() == 0.0
    assert _rel(out.g, gs) < 5e-2
    assert out.minus_af.norm(0.9) < 5e-2 * gs.norm(0.9)
    assert out.curl.name == "curl"


# --- attenuated residual peeling ---

A_GAUSS = gaussian(0.15 - 0.1j, 0.45, 0.5 + 0.3j) + 0.1
RESIDUALS = {
    2: (polynomial({(0, 0): 0.4, (1, 0): 0.3j}), polynomial({(0, 1): 0.5})),
    1: (polynomial({(0, 0): -0.2 + 0.1j, (2, 0): 0.6}), polynomial({(0, 0): 0.3, (0, 2): 0.2j})),
}


@pytest.fixture(scope="module")
def attenuated(disc):
    a = DiscField.from_analytic(disc.grid, A_GAUSS, "a")
    modes = {}
    for k, (plus, minus) in RESIDUALS.items():
        modes[k], modes[-k] = plus, minus
    g = FiberField.from_modes(disc.grid, 2, modes, "g")
    factors = (hif_build(a, disc), hif_build(a, disc, conjugate=True))
    return a, xray_attenuated(g, a, disc, m=2), factors


def _truth(disc, k):
    plus, minus = RESIDUALS[k]
    return DiscField.from_analytic(disc.grid, plus), DiscField.from_analytic(disc.grid, minus)


def test_top_residual_under_attenuation(disc, attenuated):
    _, data, (factor, conj_factor) = attenuated
    got = recon_residual(data, 2, factor, conj_factor, disc.grid)
    for g, want in zip(got, _truth(disc, 2)):
        assert _rel(g, want) < 1e-4


def test_fast_and_slow_residuals_agree(disc, attenuated):
    _, data, (factor, conj_factor) = attenuated
    fast = recon_residual(data, 2, factor, conj_factor, disc.grid, fast=True)
    slow = recon_residual(data, 2, factor, conj_factor, disc.grid, fast=False)
    for f, s in zip(fast, slow):
        assert (f - s).norm() <= 1e-9 * f.norm()


def test_residuals_must_be_peeled_from_the_top(disc, attenuated):
    _, data, (factor, conj_factor) = attenuated
    # g_1 taken before g_2 is removed from the data
    early = recon_residual(data, 1, factor, conj_factor, disc.grid)
    errors = [_rel(g, want) for g, want in zip(early, _truth(disc, 1))]
    assert max(errors) > 1e-2


def test_peel_cascade_under_attenuation(disc, attenuated):
    a, data, factors = attenuated
    state = peel_cascade(data, 2, a, disc, factors=factors)
    assert sorted(state.gk) == [1, 2]
    for k in (1, 2):
        for g, want in zip(state.gk[k], _truth(disc, k)):
            assert _rel(g, want) < 1e-4
    assert [k for k, _ in state.stage_norms] == [2, 1]
    assert not state.diverged
    assert state.data.norm() < 1e-4 * data.norm()


def test_full_reconstruction_under_attenuation(disc, attenuated):
    a, data, _ = attenuated
    rep, report = recon_full(data, 2, a, disc)
    assert rep.m == 2
    for k in (1, 2):
        for g, want in zip(rep.gk[k], _truth(disc, k)):
            assert _rel(g, want) < 1e-4
    scale = data.norm()
    assert rep.g0.norm(0.9) < 1e-2 * scale
    assert rep.gs.norm(0.9) < 1e-2 * scale
    assert set(report.timings) == {"integrating_factors", "peel", "bulk"}


def test_bulk_agrees_with_filtered_backprojection(disc):
    g0 = DiscField.from_analytic(disc.grid, G0)
    data = xray(g0, disc)
    bulk, _, _ = recon_bulk(data, None, disc)
    fbp = fbp_unattenuated(data, "rcI0", disc)
    assert _rel(bulk, fbp) < 1e-3
