import json

import numpy as np
import pytest

from att_tomo.config import ExperimentConfig, preset
from att_tomo.config.settings import SMOKE_SETTINGS
from att_tomo.fields import BoundaryGrid, DiscField
from tomo_app.experiments import (
    convergence_study,
    forward_convergence,
    ground_truth,
    halved,
    interior_rel_error,
    run_experiment,
    simulate,
    spectrum_table,
)


def _smoke(**kwargs) -> ExperimentConfig:
    return ExperimentConfig(settings=SMOKE_SETTINGS, **kwargs)


def test_spectrum_table():
    table = spectrum_table(BoundaryGrid(64, 64), ("P+", "C+"), max_abs=2)
    assert set(table["operator"]) == {"P+", "C+"}
    assert table["discrepancy"].max() < 1e-9
    assert {"coeff_re", "coeff_im", "image"} <= set(table.columns)
    with pytest.raises(ValueError, match="Unknown operators"):
        spectrum_table(BoundaryGrid(64, 64), ("Q",))


def test_forward_convergence_is_exact_for_low_degree():
    table = forward_convergence(3, levels=2, config=_smoke())
    assert list(table["level"]) == [0, 1]
    assert table["error"].max() < 1e-10
    assert np.isnan(table["order"].iloc[0])


def test_convergence_study_arguments():
    with pytest.raises(ValueError, match="Unknown study"):
        convergence_study(_smoke(), study="backward")
    with pytest.raises(ValueError, match="at least 2"):
        convergence_study(_smoke(), levels=1)


def test_halved():
    cfg = halved(preset("smoke"))
    assert cfg.name == "smoke-half"
    s = cfg.settings
    assert (s.n_rho, s.n_beta, s.N_beta, s.N_alpha) == (8, 16, 32, 32)
    assert s.n_theta >= 2 * s.K + 1
    assert s.h_t == pytest.approx(2 * SMOKE_SETTINGS.h_t)
    s.discretization()


def test_interior_rel_error(grid):
    one = DiscField.constant(grid, 1.0)
    zero = DiscField.zeros(grid)
    assert interior_rel_error(one, one, 0.9) == 0.0
    assert interior_rel_error(one, zero, 0.9) == pytest.approx(one.norm(0.9))


def test_simulation_and_ground_truth():
    cfg = _smoke(phantom="poly_zk", m=1, k=2, attenuation="constant", a_amplitude=0.4 + 0j)
    phantom, sino = simulate(cfg)
    assert sino.m == 1
    assert sino.a_inf == pytest.approx(0.4)
    truth = ground_truth(phantom)
    assert truth.m == 1
    assert truth.component_names() == ["g0", "gs", "g1+", "g1-"]


def test_zero_experiment_writes_artifacts(tmp_path):
    cfg = _smoke(name="zero", phantom="zero", m=1, attenuation="none", output_dir=str(tmp_path))
    report = run_experiment(cfg)
    assert report.passed
    out = tmp_path / "zero"
    for name in ("config.txt", "sinogram.atf", "sinogram.json", "report.json", "errors.csv",
                 "truth/manifest.json", "reconstruction/manifest.json"):
        assert (out / name).exists(), name
    payload = json.loads((out / "report.json").read_text())
    assert payload["config"]["phantom"] == "zero"
    assert set(payload["verdicts"]) == {"g0", "gs", "g1+", "g1-"}
    assert any((out / "plots").iterdir())


def test_degree_zero_experiment_scores_fbp():
    report = run_experiment(_smoke(phantom="gaussian_bump", m=0, attenuation="none"), write=False)
    assert "fbp_rcI0" in report.interior_errors
    assert "fbp_rcI0" in report.verdicts
    assert set(report.timings) >= {"simulate", "gauge", "peel", "bulk"}
