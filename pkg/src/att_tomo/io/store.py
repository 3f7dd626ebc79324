"""
Persistence of sinograms, disc fields and gauge representatives.

Every object is one or more ATF1 arrays next to a JSON manifest holding the grids and scalars
needed to rebuild it.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from ..fields import BoundaryField, BoundaryGrid, DiscField, PolarGrid
from ..gauge import GaugeRepresentative
from ..transport import Sinogram
from .atf_io import ATF_SUFFIX, read_atf, write_atf

logger = logging.getLogger("att_tomo")

MANIFEST = "manifest.json"


def _write_manifest(path: Path, payload: dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    return path


def _read_manifest(path: Path, kind: str) -> dict[str, Any]:
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    if payload.get("kind") != kind:
        raise ValueError(f"{path} describes a {payload.get('kind')!r}, expected {kind!r}")
    return payload


def _manifest_path(path: Path) -> Path:
    return path.with_suffix(".json")


def _polar(payload: dict) -> PolarGrid:
    g = payload["grid"]
    return PolarGrid(int(g["n_rho"]), int(g["n_beta"]), int(g.get("radial_stencil", 0)))


def _polar_dict(grid: PolarGrid) -> dict:
    return {"n_rho": grid.n_rho, "n_beta": grid.n_beta, "radial_stencil": grid.radial_stencil}


# --- sinograms ---

def save_sinogram(path: str | Path, sino: Sinogram) -> Path:
    path = Path(path)
    write_atf(path, sino.samples)
    _write_manifest(_manifest_path(path), {
        "kind": "sinogram",
        "name": sino.name,
        "N_beta": sino.grid.n_beta,
        "N_alpha": sino.grid.n_alpha,
        "a_inf": sino.a_inf,
        "m": sino.m,
    })
    logger.info("Saved sinogram '%s' to %s", sino.name, path)
    return path


def load_sinogram(path: str | Path) -> Sinogram:
    path = Path(path)
    meta = _read_manifest(_manifest_path(path), "sinogram")
    bgrid = BoundaryGrid(int(meta["N_beta"]), int(meta["N_alpha"]))
    plus = read_atf(path)
    if plus.shape != (bgrid.n_beta, bgrid.n_alpha // 2):
        raise ValueError(f"Sinogram {path} has shape {plus.shape}, manifest says {bgrid}")
    samples = np.zeros((bgrid.n_beta, bgrid.n_alpha), dtype=np.complex128)
    samples[:, bgrid.plus_slice] = plus
    return Sinogram(BoundaryField(bgrid, samples, meta.get("name", "")), float(meta["a_inf"]),
                    int(meta["m"]), meta.get("name", ""))


# --- disc fields ---

def save_disc_field(path: str | Path, f: DiscField) -> Path:
    path = Path(path)
    write_atf(path, f.values)
    _write_manifest(_manifest_path(path), {"kind": "disc_field", "name": f.name, "grid": _polar_dict(f.grid)})
    return path


def load_disc_field(path: str | Path) -> DiscField:
    path = Path(path)
    meta = _read_manifest(_manifest_path(path), "disc_field")
    return DiscField(_polar(meta), read_atf(path), meta.get("name", ""))


# --- gauge representatives ---

def save_representative(directory: str | Path, g: GaugeRepresentative) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {}
    for key in g.component_names():
        fname = f"{key.replace('+', 'p').replace('-', 'm')}{ATF_SUFFIX}"
        write_atf(directory / fname, g.component(key).values)
        files[key] = fname
    _write_manifest(directory / MANIFEST, {
        "kind": "gauge_representative",
        "name": g.name,
        "m": g.m,
        "grid": _polar_dict(g.grid),
        "components": files,
    })
    logger.info("Saved representative '%s' (order %d) to %s", g.name, g.m, directory)
    return directory


def load_representative(directory: str | Path) -> GaugeRepresentative:
    directory = Path(directory)
    meta = _read_manifest(directory / MANIFEST, "gauge_representative")
    grid = _polar(meta)
    parts = {key: DiscField(grid, read_atf(directory / fname), key) for key, fname in meta["components"].items()}
    m = int(meta["m"])
    gk = {k: (parts[f"g{k}+"], parts[f"g{k}-"]) for k in range(1, m + 1)}
    return GaugeRepresentative(parts["g0"], parts["gs"], gk, m, meta.get("name", "g"))
