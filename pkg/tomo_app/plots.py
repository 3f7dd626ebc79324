"""Heatmaps of disc fields (plotly) and convergence charts (altair)."""
from __future__ import annotations

import logging
from pathlib import Path

import altair as alt
import numpy as np
import pandas as pd
import plotly.express as px

from att_tomo.fields import DiscField

from .config import COLOR_LINES, COLOR_SCALE_ABS, COLOR_SCALE_ARG, COLOR_SCALE_ERR, PLOT_RESOLUTION

logger = logging.getLogger("att_tomo")

QUANTITIES = ("abs", "arg", "error")


def cartesian_samples(f: DiscField, n: int = PLOT_RESOLUTION) -> tuple[np.ndarray, np.ndarray]:
    """Values on an n x n Cartesian mesh of [-1, 1]^2, NaN outside the disc."""
    xs = np.linspace(-1.0, 1.0, n)
    X, Y = np.meshgrid(xs, xs)
    Z = X + 1j * Y
    inside = np.abs(Z) <= 1.0
    vals = np.full(Z.shape, np.nan + 0j)
    vals[inside] = f(Z[inside])
    return xs, vals


def field_frame(f: DiscField) -> pd.DataFrame:
    """Long table of the grid samples: rho, beta, x, y, re, im, abs, arg."""
    g = f.grid
    R, B = np.meshgrid(g.rho, g.beta, indexing="ij")
    v = f.values
    return pd.DataFrame({
        "rho": R.ravel(), "beta": B.ravel(),
        "x": (R * np.cos(B)).ravel(), "y": (R * np.sin(B)).ravel(),
        "re": v.real.ravel(), "im": v.imag.ravel(),
        "abs": np.abs(v).ravel(), "arg": np.angle(v).ravel(),
    })


def field_heatmap(f: DiscField, path: str | Path, quantity: str = "abs", reference: DiscField | None = None,
                  title: str = "") -> Path:
    """PNG when a static export engine is available, HTML plus a CSV of the samples otherwise."""
    if quantity not in QUANTITIES:
        raise ValueError(f"Unknown quantity {quantity!r} (expected one of {QUANTITIES})")
    if quantity == "error":
        if reference is None:
            raise ValueError("An error map needs a reference field")
        f = (f - reference).grid_only()
    xs, vals = cartesian_samples(f)
    if quantity == "arg":
        img, scale = np.angle(vals), COLOR_SCALE_ARG
        img[np.isnan(vals)] = np.nan
    else:
        img, scale = np.abs(vals), COLOR_SCALE_ABS if quantity == "abs" else COLOR_SCALE_ERR

    fig = px.imshow(img, x=xs, y=xs, origin="lower", color_continuous_scale=scale, aspect="equal",
                    labels={"x": "x", "y": "y", "color": quantity})
    fig.update_layout(title=title or f"{quantity} of {f.name}", height=500, width=560)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        fig.write_image(path.with_suffix(".png"))
        return path.with_suffix(".png")
    except (ValueError, ImportError, RuntimeError) as e:
        logger.warning("Static image export unavailable (%s), writing HTML and CSV for %s", e, path.stem)
        fig.write_html(path.with_suffix(".html"))
        field_frame(f).to_csv(path.with_suffix(".csv"), index=False)
        return path.with_suffix(".html")


def convergence_chart(table: pd.DataFrame, path: str | Path, x: str = "level", y: str = "error",
                      color: str = "component") -> Path:
    data = table.dropna(subset=[x, y])
    data = data[data[y] > 0]
    encoding = dict(
        x=alt.X(x, title=x),
        y=alt.Y(y, title=y, scale=alt.Scale(type="log")),
        tooltip=[x, alt.Tooltip(y, format=".2e")],
    )
    if color in data.columns:
        encoding["color"] = alt.Color(color, title=color)
    chart = alt.Chart(data).mark_line(point=True, color=COLOR_LINES).encode(**encoding).properties(
        title="Convergence", width=480, height=320)
    path = Path(path).with_suffix(".html")
    path.parent.mkdir(parents=True, exist_ok=True)
    chart.save(str(path))
    return path
