"""
Property-based acceptance suite.

Each item returns an AcceptanceResult: the measured value against its tolerance. Items that
combine several measurements report the worst measurement divided by its own tolerance, so
their tol is 1.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional

import numpy as np
import pandas as pd

from att_tomo.analytic import gaussian, monomial, polynomial
from att_tomo.boundary_ops import oracle_discrepancy
from att_tomo.config.settings import ExperimentConfig, Settings, preset
from att_tomo.discretization import Discretization
from att_tomo.fields import BoundaryGrid, DiscField, FiberField
from att_tomo.gauge import gauge_reduce, stability_check
from att_tomo.geometry import RayQuadrature
from att_tomo.reconstruction import doppler_recon, fbp_unattenuated, recon_full
from att_tomo.special_solutions import (
    hif_build,
    holomorphized_solution,
    invariant_moment,
    j_kp_expected,
    j_kp_oracle,
    svd_triplet,
    wk_over_cos,
    z_k,
)
from att_tomo.transport import (
    backproject,
    chordwise_residual,
    continuity_check,
    transport_solve,
    xray,
    xray_attenuated,
    xray_perp,
)

from .experiments import halved, interior_rel_error, run_experiment, sinogram_error
from .phantoms import PhantomSpec, phantom_make

logger = logging.getLogger("att_tomo")

SPECTRAL_OPERATORS = ("P+", "P-", "C+", "P+*", "P-*", "A+*HA+")


@dataclass(frozen=True)
class AcceptanceResult:
    item: int
    name: str
    value: float
    tol: float
    detail: str = ""
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tol)


def _rel(got: np.ndarray, want: np.ndarray) -> float:
    scale = np.linalg.norm(want)
    err = np.linalg.norm(got - want)
    return float(err / scale) if scale > 0 else float(err)


def _plus_mesh(disc: Discretization) -> tuple[np.ndarray, np.ndarray]:
    return np.meshgrid(disc.bgrid.beta, disc.bgrid.alpha_plus, indexing="ij")


def _gaussian_attenuation(grid) -> DiscField:
    return DiscField.from_analytic(grid, gaussian(0.15 - 0.1j, 0.45, 0.5 + 0.3j) + 0.1, "a")


def _polynomial_rays(disc: Discretization) -> Discretization:
    """Panels of length 2/64, enough for cubic phantoms under smooth attenuation."""
    return replace(disc, quad=RayQuadrature(max(disc.quad.h_t, 2.0 / 64), disc.quad.order))


# ---------------------------------------------------------------------------
# Items
# ---------------------------------------------------------------------------

def check_spectral_tables(disc: Discretization, max_abs: int = 8) -> AcceptanceResult:
    worst = {which: oracle_discrepancy(disc.bgrid, which, max_abs) for which in SPECTRAL_OPERATORS}
    detail = ", ".join(f"{k}: {v:.1e}" for k, v in worst.items())
    return AcceptanceResult(1, "spectral tables", max(worst.values()), 1e-10, detail)


def check_forward_closed_form(disc: Discretization, k_max: int = 10) -> AcceptanceResult:
    B, A = _plus_mesh(disc)
    errors = []
    for k in range(k_max + 1):
        zk, sigma, closed = svd_triplet(k)
        errors.append(_rel(xray(zk, disc).samples, sigma * closed(B, A)))
    return AcceptanceResult(2, "I0 Z_k closed form", max(errors), 1e-6, f"worst k={int(np.argmax(errors))}")


def check_fbp(disc: Discretization, k_max: int = 5) -> AcceptanceResult:
    r = disc.interior_radius
    bump = DiscField.from_analytic(disc.grid, gaussian(0.2 + 0.1j, 0.25), "bump")
    errors = {"rcI0 bump": interior_rel_error(fbp_unattenuated(xray(bump, disc), "rcI0", disc), bump, r)}
    b = disc.bgrid
    coarse = replace(disc, bgrid=BoundaryGrid(b.n_beta // 2, b.n_alpha // 2),
                     quad=RayQuadrature(2 * disc.quad.h_t, disc.quad.order))
    coarse_error = interior_rel_error(fbp_unattenuated(xray(bump, coarse), "rcI0", coarse), bump, r)
    fields = [DiscField.from_analytic(disc.grid, polynomial({(0, 0): 1.0, (1, 1): -1.0}), "1-|z|^2")]
    fields += [DiscField.from_analytic(disc.grid, monomial(k, 0), f"z^{k}") for k in range(1, k_max + 1)]
    for h in fields:
        got = fbp_unattenuated(xray_perp(h, None, disc), "rcIperp", disc)
        errors[f"rcIperp {h.name}"] = interior_rel_error(got, h, r)
    worst = max(errors, key=errors.get)
    value = errors[worst] if errors["rcI0 bump"] < coarse_error else np.inf
    detail = f"worst {worst}, rcI0 bump {coarse_error:.1e} -> {errors['rcI0 bump']:.1e} under refinement"
    return AcceptanceResult(3, "FBP identities", value, 1e-2, detail)


def check_j_kp(k_max: int = 6, n_theta: int = 2048, seed: int = 0) -> AcceptanceResult:
    rng = np.random.default_rng(seed)
    x = 0.9 * np.sqrt(rng.uniform(size=32)) * np.exp(2j * np.pi * rng.uniform(size=32))
    worst = 0.0
    for k in range(k_max + 1):
        for p in range(k + 1):
            worst = max(worst, float(np.abs(j_kp_oracle(k, p, x, n_theta) - j_kp_expected(k, p, x)).max()))
    return AcceptanceResult(4, "J_(k,p) oracle", worst, 1e-8)


def check_integrating_factors(disc: Discretization, c: complex = 0.3 + 0.2j) -> AcceptanceResult:
    grid = disc.grid
    factor = hif_build(c, disc)
    B, A = _plus_mesh(disc)
    rho_err = float(np.abs(factor.rho.plus_samples - c * np.exp(1j * A)).max())
    want = FiberField.from_modes(grid, disc.K, {1: monomial(0, 1, -c)})
    w_err = (factor.w - want).norm() / want.norm()

    a = gaussian(0.1 - 0.2j, 0.4, 0.6 + 0.3j)
    coarse = chordwise_residual(hif_build(a, disc).w, a)
    fine = chordwise_residual(hif_build(a, disc.refined()).w, a)
    value = max(rho_err / 1e-8, w_err / 1e-6, 0.0 if fine < coarse else np.inf)
    detail = f"rho {rho_err:.1e}, w {w_err:.1e}, chordwise {coarse:.1e} -> {fine:.1e}"
    return AcceptanceResult(5, "integrating factors", value, 1.0, detail)


def check_invariant_distributions(disc: Discretization, k_max: int = 8) -> AcceptanceResult:
    r = disc.interior_radius
    errors = []
    for k in range(k_max + 1):
        got = backproject(wk_over_cos(k), "I0star", disc, divided=True)
        errors.append(interior_rel_error(got, DiscField.from_analytic(disc.grid, z_k(k)), r))
    moments = [abs(invariant_moment(wk_over_cos(p), m, k, disc))
               for p in range(3) for m in (1, 2) for k in (1, 2, 3)]
    value = max(max(errors) / 1e-3, max(moments) / 1e-6)
    detail = f"I0* W_k worst {max(errors):.1e}, moments worst {max(moments):.1e}"
    return AcceptanceResult(6, "invariant distributions", value, 1.0, detail)


def check_gauge_soundness(disc: Discretization, n_fields: int = 20) -> AcceptanceResult:
    disc = _polynomial_rays(disc)
    a = _gaussian_attenuation(disc.grid)
    sino_errors, ratios = [], []
    for seed in range(n_fields):
        spec = PhantomSpec("tensor_mix", m=seed % 4, seed=seed)
        f = phantom_make(spec, disc.grid, disc.K).f
        g = gauge_reduce(f, a, spec.m)
        sino_errors.append(sinogram_error(f, a, disc, g))
        ratios.append(stability_check(f, g, a).ratio)
    value = max(max(sino_errors) / 1e-5, max(ratios))
    detail = f"sinogram worst {max(sino_errors):.1e}, budget ratio worst {max(ratios):.3f}"
    return AcceptanceResult(7, "gauge soundness", value, 1.0, detail)


def check_kernel(disc: Discretization) -> AcceptanceResult:
    spec = PhantomSpec("kernel", m=1, center=0.1 + 0.2j, sigma=0.35, attenuation="gaussian",
                       a_amplitude=0.5 + 0.3j, a_offset=0.1, a_center=0.15 - 0.1j, a_sigma=0.45)
    ph = phantom_make(spec, disc.grid, disc.K)
    data = xray_attenuated(ph.f, ph.a, disc, m=1)
    rep, _ = recon_full(data, 1, ph.a, disc)
    value = max(data.norm() / (1e-6 * ph.f.norm()), rep.norm() / 1e-4)
    return AcceptanceResult(8, "kernel Xh+ah", value, 1.0,
                            f"||I_a f||={data.norm():.1e}, ||g_rec||={rep.norm():.1e}")


def check_pipeline(settings: Settings, config: Optional[ExperimentConfig] = None) -> AcceptanceResult:
    config = config or replace(preset("m2-complex-a"), settings=settings)
    fine = run_experiment(config, write=False)
    coarse = run_experiment(halved(config), write=False)
    worst_fine = max(fine.interior_errors.values())
    decreasing = all(fine.interior_errors[k] <= coarse.interior_errors[k] for k in fine.interior_errors)
    value = max(worst_fine / config.tol, 0.0 if decreasing else np.inf)
    detail = f"worst {worst_fine:.2e} (half grid {max(coarse.interior_errors.values()):.2e})"
    return AcceptanceResult(9, "m=2 pipeline", value, 1.0, detail)


def _holomorphized(disc: Discretization, modes: dict) -> tuple[FiberField, FiberField]:
    f = FiberField.from_modes(disc.grid, disc.K, modes, "f")
    u = transport_solve(f, None, disc)
    return u, holomorphized_solution(u, xray(f, disc).data, "forward", disc)


def check_holomorphization(disc: Discretization, seed: int = 3) -> AcceptanceResult:
    """
    f with modes >= -1: the holomorphized solution has no negative modes. With f_{-1} = 0 its
    fiber average is the constant half boundary mean of u_0, the part P^dagger does not see.
    """
    rng = np.random.default_rng(seed)

    def coeffs():
        return polynomial({(p, q): complex(*rng.normal(size=2)) for p in range(2) for q in range(2)})

    u, fixed = _holomorphized(disc, {k: coeffs() for k in (-1, 0, 1)})
    negative = fixed.select(lambda k: k < 0).norm() / u.norm()

    u, fixed = _holomorphized(disc, {k: coeffs() for k in (0, 1)})
    half_mean = 0.5 * u.mode(0).ring.mean()
    average = float(np.abs(fixed.mode(0).values - half_mean).max())
    value = max(negative, average)
    detail = f"negative modes {negative:.1e}, |u~_0 - <u_0>/2| {average:.1e}"
    return AcceptanceResult(10, "holomorphization", value, 1e-5, detail)


def check_continuity(disc: Discretization, n_fields: int = 50, seed: int = 11) -> AcceptanceResult:
    disc = _polynomial_rays(disc)
    rng = np.random.default_rng(seed)
    ratios = []
    for i in range(n_fields):
        spec = PhantomSpec("tensor_mix", m=i % 3, seed=seed + i)
        f = phantom_make(spec, disc.grid, disc.K).f
        center = complex(*rng.uniform(-0.5, 0.5, 2))
        a = DiscField.from_analytic(disc.grid, gaussian(center, rng.uniform(0.2, 0.6),
                                                        complex(*rng.uniform(-1.0, 1.0, 2))))
        ratios.append(continuity_check(f, a, disc))
    return AcceptanceResult(11, "continuity", max(ratios), 1.05, f"{n_fields} fields")


def check_doppler(disc: Discretization, tol: float = 0.05) -> AcceptanceResult:
    r = disc.interior_radius
    spec = PhantomSpec("doppler", m=1, center=0.2 - 0.1j, sigma=0.3, attenuation="gaussian",
                       a_amplitude=0.3 + 0.1j, a_offset=0.5, a_center=0.1j, a_sigma=0.5)
    ph = phantom_make(spec, disc.grid, disc.K)
    out = doppler_recon(xray_attenuated(ph.f, ph.a, disc, m=1), ph.a, disc)
    err_f = interior_rel_error(out.f, ph.parts["f"], r)
    err_g = interior_rel_error(out.g, ph.parts["g"], r)

    unatt = phantom_make(replace(spec, attenuation="none"), disc.grid, disc.K)
    out0 = doppler_recon(xray(unatt.f, disc), None, disc)
    err_g0 = interior_rel_error(out0.g, unatt.parts["g"], r)
    # a = 0: the potential part must not leak into the output
    leak = out0.minus_af.norm(r) / unatt.parts["g"].norm(r)
    value = max(err_f, err_g, err_g0, leak) / tol
    detail = f"f {err_f:.2e}, g {err_g:.2e}, g (a=0) {err_g0:.2e}, -af (a=0) {leak:.2e}"
    return AcceptanceResult(12, "Doppler", value, 1.0, detail)


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

def _items(settings: Settings) -> dict[int, Callable[[], AcceptanceResult]]:
    disc = settings.discretization()
    return {
        1: lambda: check_spectral_tables(disc),
        2: lambda: check_forward_closed_form(disc),
        3: lambda: check_fbp(disc),
        4: lambda: check_j_kp(),
        5: lambda: check_integrating_factors(disc),
        6: lambda: check_invariant_distributions(disc),
        7: lambda: check_gauge_soundness(disc),
        8: lambda: check_kernel(disc),
        9: lambda: check_pipeline(settings),
        10: lambda: check_holomorphization(disc),
        11: lambda: check_continuity(disc),
        12: lambda: check_doppler(disc),
    }


def verify(settings: Optional[Settings] = None, items: Optional[Iterable[int]] = None) -> pd.DataFrame:
    """Run the selected items (all by default) and tabulate them, one row per item."""
    settings = settings or Settings()
    checks = _items(settings)
    selected = sorted(checks) if items is None else sorted(set(items))
    unknown = [i for i in selected if i not in checks]
    if unknown:
        raise ValueError(f"Unknown acceptance items {unknown} (expected 1..{len(checks)})")

    rows = []
    for i in selected:
        t0 = time.perf_counter()
        try:
            res = checks[i]()
        except Exception as exc:
            logger.exception("Acceptance item %d failed to run", i)
            res = AcceptanceResult(i, f"item {i}", float("nan"), 0.0, f"error: {exc}")
        res = replace(res, seconds=time.perf_counter() - t0)
        logger.info("[%2d] %-24s %s  value=%.3e tol=%.1e  %s", res.item, res.name,
                    "PASS" if res.passed else "FAIL", res.value, res.tol, res.detail)
        rows.append({"item": res.item, "name": res.name, "value": res.value, "tol": res.tol,
                     "passed": res.passed, "seconds": res.seconds, "detail": res.detail})
    return pd.DataFrame(rows)
