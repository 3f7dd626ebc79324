"""
Experiment runs: simulate, reduce to the gauge representative, invert and score.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from att_tomo.boundary_ops import ORACLE_FAMILIES, basis_field, canonical_indices, compositional, spectral_oracle
from att_tomo.config.settings import ExperimentConfig
from att_tomo.discretization import Discretization
from att_tomo.fields import BoundaryGrid, DiscField
from att_tomo.gauge import GaugeRepresentative, gauge_reduce
from att_tomo.geometry import RayQuadrature
from att_tomo.io.store import save_representative, save_sinogram
from att_tomo.reconstruction import ReconstructionReport, fbp_unattenuated, recon_full
from att_tomo.special_solutions import svd_triplet
from att_tomo.transport import Sinogram, xray, xray_attenuated

from .config import REPORT_NAME, TABLE_NAME
from .phantoms import Phantom, PhantomSpec, phantom_make
from .plots import convergence_chart, field_heatmap

logger = logging.getLogger("att_tomo")

STUDIES = ("pipeline", "forward", "fbp")


def output_dir(config: ExperimentConfig) -> Path:
    return Path(config.output_dir) / config.name


def simulate(config: ExperimentConfig, disc: Optional[Discretization] = None) -> tuple[Phantom, Sinogram]:
    disc = disc or config.settings.discretization()
    phantom = phantom_make(PhantomSpec.from_config(config), disc.grid, disc.K)
    sino = xray_attenuated(phantom.f, phantom.a, disc, m=phantom.m, name=f"I_a({config.phantom})")
    logger.info("Simulated '%s': ||I_a f||=%.4e, a_inf=%.3f", config.name, sino.norm(), sino.a_inf)
    return phantom, sino


def ground_truth(phantom: Phantom) -> GaugeRepresentative:
    """The phantom's own representative when it has one, gauge_reduce(f, a) otherwise."""
    if phantom.truth is not None:
        return phantom.truth
    return gauge_reduce(phantom.f, phantom.a, phantom.m)


def run_experiment(config: ExperimentConfig, write: bool = True) -> ReconstructionReport:
    disc = config.settings.discretization()
    t0 = time.perf_counter()
    phantom, sino = simulate(config, disc)
    t_sim = time.perf_counter() - t0

    t0 = time.perf_counter()
    truth = ground_truth(phantom)
    t_gauge = time.perf_counter() - t0

    rep, report = recon_full(sino, truth.m, phantom.a, disc, config.gs_mode, config.fast)
    report.timings = {"simulate": t_sim, "gauge": t_gauge, **report.timings}
    report.config = {**report.config, "name": config.name, "phantom": config.phantom, "seed": config.seed,
                     "attenuation": config.attenuation}
    report.compare(rep, truth, disc.interior_radius, config.tol)

    if phantom.a is None and truth.m == 0:
        fbp = fbp_unattenuated(sino, "rcI0", disc)
        want = truth.g0
        scale = want.norm(disc.interior_radius)
        err = (fbp - want).norm(disc.interior_radius)
        report.interior_errors["fbp_rcI0"] = err / scale if scale > 0 else err
        report.errors["fbp_rcI0"] = (fbp - want).norm() / max(want.norm(), 1e-300)
        report.verdicts["fbp_rcI0"] = report.interior_errors["fbp_rcI0"] <= config.tol

    logger.info("Experiment '%s': %s", config.name, "PASS" if report.passed else "FAIL")
    if write:
        write_artifacts(config, sino, truth, rep, report)
    return report


def write_artifacts(config: ExperimentConfig, sino: Sinogram, truth: GaugeRepresentative,
                    rep: GaugeRepresentative, report: ReconstructionReport) -> Path:
    out = output_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(config.to_text(), encoding="utf-8")
    save_sinogram(out / "sinogram.atf", sino)
    save_representative(out / "truth", truth)
    save_representative(out / "reconstruction", rep)
    (out / REPORT_NAME).write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
    report.to_frame().to_csv(out / TABLE_NAME, index=False)
    for key in truth.component_names():
        field_heatmap(rep.component(key), out / "plots" / f"{_slug(key)}_abs", "abs")
        field_heatmap(rep.component(key), out / "plots" / f"{_slug(key)}_err", "error",
                      reference=truth.component(key))
    logger.info("Artifacts of '%s' written to %s", config.name, out)
    return out


def _slug(key: str) -> str:
    return key.replace("+", "p").replace("-", "m")


# ---------------------------------------------------------------------------
# Convergence
# ---------------------------------------------------------------------------

def _orders(table: pd.DataFrame, x: str) -> pd.DataFrame:
    """Empirical orders log(e_prev / e) / log(x_prev / x) per component."""
    out = []
    for _, group in table.groupby("component", sort=False):
        group = group.sort_values("level").copy()
        e = group["error"].to_numpy()
        h = group[x].to_numpy(dtype=float)
        order = np.full(e.shape, np.nan)
        with np.errstate(divide="ignore", invalid="ignore"):
            order[1:] = np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])
        group["order"] = order
        out.append(group)
    return pd.concat(out, ignore_index=True) if out else table


def forward_convergence(k: int = 5, levels: int = 4, h_t: float = 0.5, config: Optional[ExperimentConfig] = None
                        ) -> pd.DataFrame:
    """Relative error of I_0 Z_k against its closed form while the chord panels are halved."""
    base = (config or ExperimentConfig()).settings.discretization()
    zk, sigma, closed = svd_triplet(k)
    rows = []
    for level in range(levels):
        quad = RayQuadrature(h_t / 2**level, base.quad.order)
        disc = replace(base, quad=quad)
        got = xray(zk, disc).data
        B, A = disc.bgrid.mesh
        want = np.where(np.cos(A) >= 0, sigma * closed(B, A), 0.0)
        err = np.linalg.norm(got.samples - want) / np.linalg.norm(want)
        rows.append({"level": level, "h_t": quad.h_t, "component": f"I0 Z_{k}", "error": float(err)})
    return _orders(pd.DataFrame(rows), "h_t")


def convergence_study(config: ExperimentConfig, levels: int = 2, study: str = "pipeline",
                      write: bool = True) -> pd.DataFrame:
    """Errors against (N_beta, N_alpha, h_t, K) over `levels` refinements with empirical orders."""
    if study not in STUDIES:
        raise ValueError(f"Unknown study {study!r} (expected one of {STUDIES})")
    if levels < 2:
        raise ValueError(f"A convergence study needs at least 2 levels, got {levels}")

    if study == "forward":
        table = forward_convergence(config.k if config.k > 0 else 5, levels, config=config)
    else:
        rows = []
        for level in range(levels):
            settings = config.settings.refined(2**level) if level else config.settings
            cfg = replace(config, settings=settings)
            grid_info = {"level": level, "N_beta": settings.N_beta, "N_alpha": settings.N_alpha,
                         "h_t": settings.h_t, "K": settings.K}
            if study == "fbp":
                disc = settings.discretization()
                phantom, sino = simulate(replace(cfg, phantom="gaussian_bump", m=0, attenuation="none"), disc)
                want = phantom.f.mode(0)
                got = fbp_unattenuated(sino, "rcI0", disc)
                err = (got - want).norm(disc.interior_radius) / want.norm(disc.interior_radius)
                rows.append({**grid_info, "component": "fbp_rcI0", "error": err})
            else:
                report = run_experiment(cfg, write=False)
                for key, err in report.interior_errors.items():
                    rows.append({**grid_info, "component": key, "error": err})
        table = _orders(pd.DataFrame(rows), "h_t")

    logger.info("Convergence study '%s' (%s):\n%s", config.name, study, table.to_string(index=False))
    if write:
        out = output_dir(config)
        out.mkdir(parents=True, exist_ok=True)
        table.to_csv(out / f"convergence_{study}.csv", index=False)
        convergence_chart(table, out / f"convergence_{study}")
    return table


def halved(config: ExperimentConfig) -> ExperimentConfig:
    """The same experiment on grids with half the resolution."""
    s = config.settings
    K = max(s.K // 2, config.m, 1)
    settings = replace(s, n_rho=max(s.n_rho // 2, 8), n_beta=max(s.n_beta // 2, 16), K=K,
                       n_theta=max(s.n_theta // 2, 2 * K + 1),
                       N_beta=max(s.N_beta // 2, 32), N_alpha=max(s.N_alpha // 2, 32), h_t=s.h_t * 2)
    return replace(config, settings=settings, name=f"{config.name}-half")


def sinogram_error(f, a, disc: Discretization, g: GaugeRepresentative) -> float:
    """||I_a f - I_a g|| / ||I_a f||."""
    data_f = xray_attenuated(f, a, disc)
    data_g = xray_attenuated(g.fiber_field(max(g.m, 1)), a, disc)
    norm = data_f.norm()
    return (data_f - data_g).norm() / norm if norm > 0 else (data_f - data_g).norm()


def interior_rel_error(got: DiscField, want: DiscField, radius: float) -> float:
    scale = want.norm(radius)
    err = (got - want).norm(radius)
    return err / scale if scale > 0 else err


# ---------------------------------------------------------------------------
# Boundary-operator tables
# ---------------------------------------------------------------------------

def spectrum_table(grid: BoundaryGrid, operators: Optional[tuple[str, ...]] = None, max_abs: int = 4) -> pd.DataFrame:
    """One row per (operator, canonical basis element): table coefficient, image index, discrepancy."""
    operators = tuple(ORACLE_FAMILIES) if operators is None else tuple(operators)
    unknown = [w for w in operators if w not in ORACLE_FAMILIES]
    if unknown:
        raise ValueError(f"Unknown operators {unknown} (expected some of {tuple(ORACLE_FAMILIES)})")
    rows = []
    for which in operators:
        for idx in canonical_indices(ORACLE_FAMILIES[which][0], max_abs):
            coeff, out = spectral_oracle(idx, which)
            got = compositional(which, basis_field(grid, idx)).plus_samples
            want = coeff * basis_field(grid, out).plus_samples
            rows.append({"operator": which, "family": idx.family, "p": idx.p, "q": idx.q,
                         "coeff_re": float(np.real(coeff)), "coeff_im": float(np.imag(coeff)),
                         "image": f"{out.family}_{out.p},{out.q}",
                         "discrepancy": float(np.abs(got - want).max())})
    logger.info("Spectrum table: %d entries over %s", len(rows), ", ".join(operators))
    return pd.DataFrame(rows)
