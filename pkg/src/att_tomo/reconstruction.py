"""
Inversion of the attenuated transform for gauge representatives.

Residual degrees are peeled from the top, k = m..1:

    g_{k,+} = (-1)^k int_{d+SM} e^{-rho_abar} I_k e^{-ik(beta+alpha)} G dbeta dalpha
    g_{k,-} = (-1)^k int_{d+SM} e^{-rho_a}    I_k e^{ ik(beta+alpha)} conj(G) dbeta dalpha
    I_{k-1} = I_k - I_a(g_k)

and the bulk pair (g0, gs) is recovered from the holomorphized solutions D> and D<. The unattenuated
filtered backprojections and the Doppler specialization live here as well.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import pandas as pd

from .analytic import holomorphic_series
from .boundary_ops import op_A_plus_star_H_A_minus, op_P_dagger
from .complex_calculus import cauchy_extend, laplacian, poisson_dirichlet, wirtinger
from .discretization import Discretization
from .fields import BoundaryField, DiscField, FiberField, as_disc_field, extend_by_zero
from .gauge import GaugeRepresentative
from .geometry import FanBeamPoint, flow_extend_samples
from .special_solutions import IntegratingFactor, green_kernel, hif_build, holomorphize
from .transport import Sinogram, backproject, xray_attenuated
from .utils.conversions import TWO_PI, resample_periodic

logger = logging.getLogger("att_tomo")

FBP_KINDS = ("rcI0", "rcIperp", "rcI0_hilbert", "rcIperp_hilbert")
GS_MODES = ("formula", "projection")

_SLOW_POINT_CHUNK = 64


def _as_data(data: Union[Sinogram, BoundaryField]) -> BoundaryField:
    if isinstance(data, Sinogram):
        return data.data
    if isinstance(data, BoundaryField):
        return extend_by_zero(data)
    raise ValueError(f"Expected d+SM data as Sinogram or BoundaryField, got {type(data).__name__}")


def _rho_samples(rho, bgrid) -> np.ndarray:
    if rho is None:
        return np.zeros((bgrid.n_beta, bgrid.n_alpha), dtype=np.complex128)
    if isinstance(rho, IntegratingFactor):
        rho = rho.rho
    return rho.restrict_plus().samples


# ---------------------------------------------------------------------------
# Kernel integrals over d+SM
# ---------------------------------------------------------------------------

def _kernel_series(H: BoundaryField, n_terms: int) -> np.ndarray:
    """c_n with int H G dbeta dalpha = sum_n c_n z^n (alpha integral once per beta, then FFT in beta)."""
    g = H.grid
    plus = H.restrict_plus().samples
    sym = 0.5 * (plus + g.pullback(plus, "SA") * g.plus_mask[None, :])
    q = (sym * np.exp(1j * g.alpha)[None, :]).sum(axis=1) * g.d_alpha
    qhat = np.fft.fft(q) / g.n_beta
    n = np.arange(n_terms)
    return (n + 1) * qhat[:n_terms] / np.pi


def _kernel_quadrature(H: BoundaryField, z: np.ndarray) -> np.ndarray:
    """Direct d+SM quadrature of H G at points |z| < 1."""
    g = H.grid
    B, A = g.mesh
    B = B[:, g.plus_slice][None]
    A = A[:, g.plus_slice][None]
    plus = H.plus_samples[None]
    flat = np.asarray(z, dtype=np.complex128).ravel()
    out = np.empty(flat.shape, dtype=np.complex128)
    for start in range(0, flat.size, _SLOW_POINT_CHUNK):
        zz = flat[start:start + _SLOW_POINT_CHUNK][:, None, None]
        G = green_kernel(zz, FanBeamPoint(B, A), "closed")
        out[start:start + _SLOW_POINT_CHUNK] = np.sum(plus * G, axis=(1, 2)) * g.d_beta * g.d_alpha
    return out.reshape(np.shape(z))


def _kernel_field(H: BoundaryField, grid, fast: bool, n_terms: int, name: str) -> DiscField:
    coeffs = _kernel_series(H, n_terms)
    series = DiscField.from_analytic(grid, holomorphic_series(coeffs), name)
    if fast:
        return series
    # the closed kernel has its pole on the circle: the ring keeps the series values
    values = series.values.copy()
    inside = grid.rho < 1.0 - 1e-12
    values[inside] = _kernel_quadrature(H, grid.z[inside])
    return DiscField(grid, values, name)


def _twisted(data: BoundaryField, k: int, rho: np.ndarray, sign: int) -> BoundaryField:
    """(-1)^k e^{-rho} I e^{-i sign k (beta + alpha)} on d+SM."""
    B, A = data.grid.mesh
    s = (-1) ** k * np.exp(-rho) * data.restrict_plus().samples * np.exp(-1j * sign * k * (B + A))
    return BoundaryField(data.grid, s * data.grid.plus_mask[None, :])


def recon_residual(data, k: int, rho_a=None, rho_abar=None, grid=None, fast: bool = True,
                   n_terms: Optional[int] = None) -> tuple[DiscField, DiscField]:
    """(g_{k,+}, g_{k,-}) from I_k; rho_a and rho_abar are the d+SM traces of w_a and conj(w_{conj a})."""
    if k < 1:
        raise ValueError(f"Residual degree must be >= 1, got {k}")
    if grid is None:
        raise ValueError("recon_residual needs the PolarGrid to reconstruct on")
    d = _as_data(data)
    bgrid = d.grid
    n_terms = n_terms or bgrid.n_beta // 2

    h_plus = _twisted(d, k, _rho_samples(rho_abar, bgrid), 1)
    g_plus = _kernel_field(h_plus, grid, fast, n_terms, f"g{k}+")
    h_minus = _twisted(d, k, _rho_samples(rho_a, bgrid), -1).conj()
    g_minus = _kernel_field(h_minus, grid, fast, n_terms, f"g{k}-").conj().with_name(f"g{k}-")
    return g_plus, g_minus


# ---------------------------------------------------------------------------
# Peeling
# ---------------------------------------------------------------------------

@dataclass
class PeelState:
    data: Sinogram
    gk: dict[int, tuple[DiscField, DiscField]] = field(default_factory=dict)
    factor: Optional[IntegratingFactor] = None
    conj_factor: Optional[IntegratingFactor] = None
    stage_norms: list[tuple[int, float]] = field(default_factory=list)   # (k, ||I_{k-1}||)
    diverged: bool = False


def _factors(a, disc: Discretization) -> tuple[Optional[IntegratingFactor], Optional[IntegratingFactor]]:
    if a is None:
        return None, None
    return hif_build(a, disc), hif_build(a, disc, conjugate=True)


def peel_cascade(data, m: int, a=None, disc: Optional[Discretization] = None, fast: bool = True,
                 factors: Optional[tuple] = None) -> PeelState:
    """Recover g_m..g_1 and return I_0 = I_a(g0 + X_perp gs) in state.data."""
    if m < 0:
        raise ValueError(f"Order m must be non-negative, got {m}")
    disc = disc or Discretization()
    grid = disc.grid
    factor, conj_factor = factors if factors is not None else _factors(a, disc)
    current = data if isinstance(data, Sinogram) else Sinogram(_as_data(data))
    state = PeelState(current, factor=factor, conj_factor=conj_factor)
    previous = current.norm()

    for k in range(m, 0, -1):
        g_plus, g_minus = recon_residual(state.data, k, factor, conj_factor, grid, fast)
        state.gk[k] = (g_plus, g_minus)
        gk = FiberField.from_modes(grid, k, {k: g_plus, -k: g_minus}, f"g{k}")
        forward = xray_attenuated(gk, a, disc, m=k)
        diff = state.data - forward
        state.data = diff.with_data(diff.data, f"I_{k - 1}")
        norm = state.data.norm()
        state.stage_norms.append((k, norm))
        logger.info("Peel stage k=%d: ||g_k+||=%.3e ||g_k-||=%.3e, ||I_%d||=%.3e",
                    k, g_plus.norm(), g_minus.norm(), k - 1, norm)
        if norm > previous * (1.0 + 1e-6) and norm > 1e-12:
            state.diverged = True
            logger.warning("Peel stage k=%d increased the residual data norm %.3e -> %.3e", k, previous, norm)
        previous = norm
    state.gk = dict(sorted(state.gk.items()))
    return state


# ---------------------------------------------------------------------------
# Bulk recovery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BulkDiagnostics:
    dropped_plus: float          # relative norm of the trace modes lost by the Cauchy extensions
    dropped_minus: float
    gs_boundary_max: float
    gs_mode: str


def _full_trace(b: BoundaryField, factor: Optional[IntegratingFactor]) -> np.ndarray:
    """e^{w} (b)_psi on all of dSM for b on d+SM: outgoing nodes take b at the incoming end."""
    g = b.grid
    plus = b.restrict_plus().samples
    psi = plus + g.pullback(plus, "S") * (~g.plus_mask)[None, :]
    if factor is None:
        return psi
    return np.exp(factor.boundary_trace().samples) * psi


def _weighted(d: BoundaryField, factor: Optional[IntegratingFactor]) -> BoundaryField:
    """I e^{-rho} on d+SM."""
    return BoundaryField(d.grid, d.restrict_plus().samples * np.exp(-_rho_samples(factor, d.grid)),
                         f"{d.name}e^-rho")


def _solution(b: BoundaryField, factor: Optional[IntegratingFactor], disc: Discretization) -> FiberField:
    grid = disc.grid
    n_theta = disc.n_theta
    samples = flow_extend_samples(b, grid, n_theta)
    if factor is not None:
        samples = factor.exp_samples(n_theta) * samples
    return FiberField.from_samples(grid, samples, disc.K)


def recon_bulk(data, a=None, disc: Optional[Discretization] = None, gs_mode: str = "formula",
               factors: Optional[tuple] = None) -> tuple[DiscField, DiscField, BulkDiagnostics]:
    """(g0, gs) from I = I_a(g0 + X_perp gs)."""
    if gs_mode not in GS_MODES:
        raise ValueError(f"Unknown gs_mode {gs_mode!r} (expected one of {GS_MODES})")
    disc = disc or Discretization()
    grid = disc.grid
    d = _as_data(data)
    bgrid = d.grid
    a_field = as_disc_field(a, grid, "a")
    factor, conj_factor = factors if factors is not None else _factors(a, disc)

    fwd = holomorphize(_weighted(d, factor), "forward")
    bwd = holomorphize(_weighted(d, conj_factor), "backward")
    D_fwd = _solution(fwd, factor, disc)
    D_bwd = _solution(bwd, conj_factor, disc)

    # fiber averages of u - D on the circle, u being the zero-extended data
    u_full = d.restrict_plus().samples
    trace_plus = resample_periodic((u_full - _full_trace(fwd, factor)).mean(axis=1), grid.n_beta)
    trace_minus = resample_periodic((u_full - _full_trace(bwd, conj_factor)).mean(axis=1), grid.n_beta)
    ext_plus = cauchy_extend(trace_plus, "holo", grid)
    ext_minus = cauchy_extend(trace_minus, "antiholo", grid)
    h_plus, h_minus = ext_plus.field, ext_minus.field

    D0_fwd, D0_bwd = D_fwd.mode(0), D_bwd.mode(0)
    q = (D0_fwd - D0_bwd) * (-0.5j)
    if gs_mode == "formula":
        gs = (h_minus - h_plus) * 0.5j + q
    else:
        gs = poisson_dirichlet(laplacian(q))
    gs = gs.grid_only().with_name("gs")

    g0 = (-wirtinger(D_fwd.mode(-1), "del") - wirtinger(D_bwd.mode(1), "dbar")
          - a_field * (D0_fwd + D0_bwd + h_plus + h_minus) * 0.5)
    g0 = g0.grid_only().with_name("g0")

    diag = BulkDiagnostics(ext_plus.relative_dropped, ext_minus.relative_dropped,
                           float(np.abs(gs.ring).max()), gs_mode)
    logger.info("recon_bulk: ||g0||=%.3e ||gs||=%.3e, max |gs| on circle %.2e", g0.norm(), gs.norm(),
                diag.gs_boundary_max)
    if max(diag.dropped_plus, diag.dropped_minus) > 1e-3:
        logger.warning("recon_bulk: inconsistent Cauchy traces (dropped %.2e / %.2e)",
                       diag.dropped_plus, diag.dropped_minus)
    return g0, gs, diag


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------

@dataclass
class ReconstructionReport:
    """Timings, stage diagnostics and (when a truth is known) per-component errors of one inversion."""

    timings: dict[str, float] = field(default_factory=dict)
    peel_norms: list[tuple[int, float]] = field(default_factory=list)
    peel_diverged: bool = False
    bulk: Optional[BulkDiagnostics] = None
    errors: dict[str, float] = field(default_factory=dict)            # full disc
    interior_errors: dict[str, float] = field(default_factory=dict)   # rho <= interior radius
    verdicts: dict[str, bool] = field(default_factory=dict)
    config: dict[str, object] = field(default_factory=dict)

    def compare(self, got: GaugeRepresentative, truth: GaugeRepresentative, interior_radius: float,
                tol: Optional[float] = None):
        self.errors = got.relative_errors(truth)
        self.interior_errors = got.relative_errors(truth, interior_radius)
        if tol is not None:
            self.verdicts = {k: v <= tol for k, v in self.interior_errors.items()}
        return self

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for key in sorted(set(self.errors) | set(self.interior_errors)):
            rows.append({
                "component": key,
                "rel_l2": self.errors.get(key, np.nan),
                "rel_l2_interior": self.interior_errors.get(key, np.nan),
                "verdict": {True: "PASS", False: "FAIL"}.get(self.verdicts.get(key), ""),
            })
        return pd.DataFrame(rows, columns=["component", "rel_l2", "rel_l2_interior", "verdict"])

    def to_dict(self) -> dict:
        return {
            "timings": dict(self.timings),
            "peel_norms": [[k, n] for k, n in self.peel_norms],
            "peel_diverged": self.peel_diverged,
            "bulk": None if self.bulk is None else vars(self.bulk).copy(),
            "errors": dict(self.errors),
            "interior_errors": dict(self.interior_errors),
            "verdicts": {k: bool(v) for k, v in self.verdicts.items()},
            "config": {k: str(v) for k, v in self.config.items()},
        }


def recon_full(data, m: int, a=None, disc: Optional[Discretization] = None, gs_mode: str = "formula",
               fast: bool = True) -> tuple[GaugeRepresentative, ReconstructionReport]:
    disc = disc or Discretization()
    report = ReconstructionReport(config={"m": m, "gs_mode": gs_mode, "fast": fast, "grid": disc.grid,
                                          "bgrid": disc.bgrid, "K": disc.K, "n_theta": disc.n_theta})
    t0 = time.perf_counter()
    factors = _factors(a, disc)
    report.timings["integrating_factors"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    state = peel_cascade(data, m, a, disc, fast, factors)
    report.timings["peel"] = time.perf_counter() - t0
    report.peel_norms = list(state.stage_norms)
    report.peel_diverged = state.diverged

    t0 = time.perf_counter()
    g0, gs, diag = recon_bulk(state.data, a, disc, gs_mode, factors)
    report.timings["bulk"] = time.perf_counter() - t0
    report.bulk = diag

    rep = GaugeRepresentative(g0, gs, state.gk, m, "g_rec")
    logger.info("recon_full: order %d in %.2fs", m, sum(report.timings.values()))
    return rep, report


# ---------------------------------------------------------------------------
# Unattenuated filtered backprojection
# ---------------------------------------------------------------------------

def fbp_unattenuated(data, kind: str = "rcI0", disc: Optional[Discretization] = None) -> DiscField:
    """
    rcI0             f = -(1/2 pi) I_perp# P-^dagger I_0 f
    rcIperp          h =  (1/2 pi) I_0# P+^dagger I_perp h
    rcI0_hilbert     f =  (1/8 pi) I_perp# A+^* H A- I_0 f
    rcIperp_hilbert  h = -(1/8 pi) I_0# A+^* H A- I_perp h   (h vanishing on the circle)
    """
    if kind not in FBP_KINDS:
        raise ValueError(f"Unknown FBP kind {kind!r} (expected one of {FBP_KINDS})")
    disc = disc or Discretization()
    d = _as_data(data)
    if kind == "rcI0":
        out = backproject(op_P_dagger(d, "minus"), "Iperpsharp", disc) * (-1.0 / TWO_PI)
    elif kind == "rcIperp":
        out = backproject(op_P_dagger(d, "plus"), "I0sharp", disc) * (1.0 / TWO_PI)
    elif kind == "rcI0_hilbert":
        out = backproject(op_A_plus_star_H_A_minus(d), "Iperpsharp", disc) * (1.0 / (4.0 * TWO_PI))
    else:
        out = backproject(op_A_plus_star_H_A_minus(d), "I0sharp", disc) * (-1.0 / (4.0 * TWO_PI))
    return out.with_name(f"{kind}({d.name})")


# ---------------------------------------------------------------------------
# Doppler fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DopplerReconstruction:
    minus_af: DiscField
    g: DiscField
    f: DiscField              # -minus_af / a on the mask, 0 elsewhere
    mask: np.ndarray          # |a| >= threshold
    curl: DiscField           # Laplacian of g


def doppler_recon(data, a=None, disc: Optional[Discretization] = None, threshold: float = 1e-3,
                  gs_mode: str = "formula") -> DopplerReconstruction:
    """For I_a V with V = X f + X_perp g: recon_bulk returns (-a f, g); f is exposed where |a| >= threshold."""
    disc = disc or Discretization()
    grid = disc.grid
    minus_af, g, _ = recon_bulk(data, a, disc, gs_mode)
    a_vals = as_disc_field(a, grid, "a").values
    mask = np.abs(a_vals) >= threshold
    f_vals = np.zeros_like(minus_af.values)
    f_vals[mask] = -minus_af.values[mask] / a_vals[mask]
    if not mask.all():
        logger.info("doppler_recon: |a| < %.1e on %d of %d nodes, f left at 0 there",
                    threshold, int((~mask).sum()), mask.size)
    curl = laplacian(g).with_name("curl")
    return DopplerReconstruction(minus_af.with_name("-af"), g.with_name("g"), DiscField(grid, f_vals, "f"),
                                 mask, curl)
