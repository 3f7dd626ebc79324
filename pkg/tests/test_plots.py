import numpy as np
import pandas as pd
import pytest

from att_tomo.analytic import monomial
from att_tomo.fields import DiscField
from tomo_app.plots import cartesian_samples, convergence_chart, field_frame, field_heatmap


def test_cartesian_samples_mask_the_outside(grid):
    xs, vals = cartesian_samples(DiscField.from_analytic(grid, monomial(1, 0)), n=21)
    assert xs.shape == (21,)
    assert np.isnan(vals[0, 0])
    assert vals[10, 10] == pytest.approx(0.0)
    assert vals[10, 20] == pytest.approx(1.0)


def test_field_frame(grid):
    frame = field_frame(DiscField.from_analytic(grid, monomial(1, 1)))
    assert len(frame) == grid.n_rho * grid.n_beta
    np.testing.assert_allclose(frame["re"], frame["x"] ** 2 + frame["y"] ** 2, atol=1e-13)


def test_heatmap_arguments(grid, tmp_path):
    f = DiscField.zeros(grid)
    with pytest.raises(ValueError, match="quantity"):
        field_heatmap(f, tmp_path / "f", "phase")
    with pytest.raises(ValueError, match="reference"):
        field_heatmap(f, tmp_path / "f", "error")


def test_heatmap_is_written(grid, tmp_path):
    f = DiscField.from_analytic(grid, monomial(2, 0), "z^2")
    path = field_heatmap(f, tmp_path / "maps" / "z2", "arg")
    assert path.exists()
    assert path.suffix in (".png", ".html")


def test_convergence_chart(tmp_path):
    table = pd.DataFrame({"level": [0, 1, 0, 1], "error": [1e-2, 2.5e-3, 0.0, 1e-4],
                          "component": ["g0", "g0", "gs", "gs"]})
    path = convergence_chart(table, tmp_path / "conv")
    assert path.suffix == ".html"
    assert path.exists()
