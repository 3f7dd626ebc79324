"""
Complex calculus on the disc.

Per angular mode n the Wirtinger operators act radially as
    d    : f_n e^{in beta} -> 1/2 (D + n/rho) f_n  e^{i(n-1) beta}
    dbar : f_n e^{in beta} -> 1/2 (D - n/rho) f_n  e^{i(n+1) beta}
so 4 dbar d on mode n is (D - (n-1)/rho)(D + n/rho) and 4 d dbar is (D + (n+1)/rho)(D - n/rho).
Poisson problems are solved by collocation per mode, rows scaled by rho^2 and the rho = 1 row
replaced by the boundary condition.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np
import scipy.linalg
from scipy import optimize, special

from .analytic import holomorphic_series
from .fields import DiscField, FiberField, PolarGrid, fiber_hilbert
from .utils.conversions import nyquist_mask

logger = logging.getLogger("att_tomo")

_ORDERINGS = ("dbar_del", "del_dbar")


def _check_which(which: str):
    if which not in ("del", "dbar"):
        raise ValueError(f"Unknown Wirtinger operator {which!r} (expected 'del' or 'dbar')")


# ---------------------------------------------------------------------------
# Wirtinger operators
# ---------------------------------------------------------------------------

def _radial_factor(grid: PolarGrid, n: int, sign: int) -> np.ndarray:
    """D + sign * n / rho."""
    return grid.diff_matrix + sign * n * np.diag(1.0 / grid.rho)


def _spectral_wirtinger(grid: PolarGrid, values: np.ndarray, which: str) -> np.ndarray:
    n = grid.frequencies
    keep = nyquist_mask(grid.n_beta)
    modes = np.fft.fft(values, axis=1) / grid.n_beta
    modes[:, ~keep] = 0.0
    dm = grid.diff_matrix @ modes
    inv_rho = (1.0 / grid.rho)[:, None]
    if which == "del":
        r = 0.5 * (dm + n[None, :] * inv_rho * modes)
        shift = -1
    else:
        r = 0.5 * (dm - n[None, :] * inv_rho * modes)
        shift = 1
    r[:, ~keep] = 0.0
    out = np.roll(r, shift, axis=1)
    out[:, ~keep] = 0.0
    return np.fft.ifft(out, axis=1) * grid.n_beta


def wirtinger(f: DiscField, which: str) -> DiscField:
    """d = 1/2(dx - i dy) or dbar = 1/2(dx + i dy); exact for analytic fields with known derivatives."""
    _check_which(which)
    name = f"{which}({f.name})"
    if f.analytic is not None:
        d = f.analytic.wirtinger(which)
        if d is not None:
            return DiscField.from_analytic(f.grid, d, name)
    return DiscField(f.grid, _spectral_wirtinger(f.grid, f.values, which), name)


def laplacian(f: DiscField, ordering: str = "dbar_del") -> DiscField:
    if ordering not in _ORDERINGS:
        raise ValueError(f"Unknown ordering {ordering!r} (expected one of {_ORDERINGS})")
    g = f.grid
    first, second = ("del", "dbar") if ordering == "dbar_del" else ("dbar", "del")
    vals = 4.0 * _spectral_wirtinger(g, _spectral_wirtinger(g, f.values, first), second)
    return DiscField(g, vals, f"lap({f.name})")


def dirichlet_energy(v: DiscField) -> float:
    """||grad v||^2 = 2(||d v||^2 + ||dbar v||^2)."""
    return 2.0 * (wirtinger(v, "del").norm() ** 2 + wirtinger(v, "dbar").norm() ** 2)


# ---------------------------------------------------------------------------
# Poisson problems
# ---------------------------------------------------------------------------

def _mode_laplacian(grid: PolarGrid, n: int, ordering: str) -> np.ndarray:
    if ordering == "dbar_del":
        return _radial_factor(grid, n - 1, -1) @ _radial_factor(grid, n, 1)
    return _radial_factor(grid, n + 1, 1) @ _radial_factor(grid, n, -1)


@lru_cache(maxsize=512)
def _dirichlet_factor(grid: PolarGrid, n: int, ordering: str):
    A = (grid.rho**2)[:, None] * _mode_laplacian(grid, n, ordering)
    A[-1, :] = 0.0
    A[-1, -1] = 1.0
    try:
        return scipy.linalg.lu_factor(A, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as e:
        raise RuntimeError(f"Dirichlet solve failed for angular mode {n}: {e}") from e


def _ring_modes(boundary, grid: PolarGrid) -> np.ndarray:
    if boundary is None:
        return np.zeros(grid.n_beta, dtype=np.complex128)
    if isinstance(boundary, DiscField):
        ring = boundary.ring
    else:
        ring = np.asarray(boundary, dtype=np.complex128)
        if ring.shape != (grid.n_beta,):
            raise ValueError(f"Boundary samples have shape {ring.shape}, expected ({grid.n_beta},)")
    return np.fft.fft(ring) / grid.n_beta


def poisson_dirichlet(rhs: DiscField, boundary=None, ordering: str = "dbar_del") -> DiscField:
    """v with Laplacian(v) = rhs and v = boundary (default 0) on the unit circle."""
    if ordering not in _ORDERINGS:
        raise ValueError(f"Unknown ordering {ordering!r} (expected one of {_ORDERINGS})")
    grid = rhs.grid
    keep = nyquist_mask(grid.n_beta)
    modes = rhs.modes()
    bmodes = _ring_modes(boundary, grid)
    sol = np.zeros_like(modes)
    rho2 = grid.rho**2
    for idx, n in enumerate(grid.frequencies):
        if not keep[idx]:
            continue
        b = rho2 * modes[:, idx]
        b[-1] = bmodes[idx]
        sol[:, idx] = scipy.linalg.lu_solve(_dirichlet_factor(grid, int(n), ordering), b)
    if not np.all(np.isfinite(sol)):
        raise RuntimeError("Dirichlet solve produced non-finite values")
    return DiscField(grid, np.fft.ifft(sol, axis=1) * grid.n_beta, f"poisson({rhs.name})")


def poisson_neumann(rhs: DiscField, flux: np.ndarray) -> tuple[DiscField, float]:
    """
    h with Laplacian(h) = rhs, d_rho h = flux on the unit circle and zero boundary mean.
    Returns the field and the least-squares defect of the mode-0 compatibility condition,
    relative to the size of all the data.
    """
    grid = rhs.grid
    keep = nyquist_mask(grid.n_beta)
    modes = rhs.modes()
    fmodes = _ring_modes(np.asarray(flux), grid)
    sol = np.zeros_like(modes)
    rho2 = grid.rho**2
    scale = np.linalg.norm(rho2[:, None] * modes[:, keep]) + np.linalg.norm(fmodes[keep])
    defect = 0.0
    for idx, n in enumerate(grid.frequencies):
        if not keep[idx]:
            continue
        A = rho2[:, None] * _mode_laplacian(grid, int(n), "dbar_del")
        A[-1, :] = grid.diff_matrix[-1, :]
        b = rho2 * modes[:, idx]
        b[-1] = fmodes[idx]
        if n == 0:
            x, *_ = np.linalg.lstsq(A, b, rcond=None)
            defect = float(np.linalg.norm(A @ x - b) / scale) if scale > 0 else 0.0
            x = x - x[-1]
        else:
            try:
                x = np.linalg.solve(A, b)
            except np.linalg.LinAlgError as e:
                raise RuntimeError(f"Neumann solve failed for angular mode {n}: {e}") from e
        sol[:, idx] = x
    return DiscField(grid, np.fft.ifft(sol, axis=1) * grid.n_beta, f"neumann({rhs.name})"), defect


# ---------------------------------------------------------------------------
# Decompositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EllipticSplit:
    """f = d v + g (del) or f = dbar v + g (dbar), v vanishing on the circle."""

    which: str
    v: DiscField
    g: DiscField
    residual: float       # ||dbar g|| / ||f|| (del) or ||d g|| / ||f|| (dbar)
    norm_defect: float    # | ||f||^2 - ||d v||^2 - ||g||^2 | / ||f||^2


def elliptic_split(f: DiscField, which: str) -> EllipticSplit:
    _check_which(which)
    other = "dbar" if which == "del" else "del"
    ordering = "dbar_del" if which == "del" else "del_dbar"

    rhs = wirtinger(f, other) * 4.0
    v = poisson_dirichlet(rhs, ordering=ordering).with_name(f"v[{f.name}]")
    dv = wirtinger(v, which)
    g = (f - dv).grid_only().with_name(f"g[{f.name}]")

    f_norm = f.norm()
    if f_norm == 0.0:
        return EllipticSplit(which, v, g, 0.0, 0.0)
    residual = wirtinger(g, other).norm() / f_norm
    defect = abs(f_norm**2 - dv.norm() ** 2 - g.norm() ** 2) / f_norm**2
    logger.debug("elliptic_split(%s) of '%s': residual %.2e, norm defect %.2e",
                 which, f.name, residual, defect)
    return EllipticSplit(which, v, g, residual, defect)


@dataclass(frozen=True)
class HodgeDecomposition:
    """V = X g + X_perp h with g vanishing on the circle and h of zero boundary mean."""

    g: DiscField
    h: DiscField
    residual: float
    compatibility_defect: float


def hodge_decompose(V: FiberField, tol: float = 1e-6) -> HodgeDecomposition:
    extra = [k for k in V.active_modes() if abs(k) != 1]
    if extra:
        raise ValueError(f"hodge_decompose expects modes +-1 only, got active modes {extra}")
    grid = V.grid
    v1, vm1 = V.mode(1), V.mode(-1)
    d_v1, d_vm1 = wirtinger(v1, "dbar"), wirtinger(vm1, "del")

    g = poisson_dirichlet((d_v1 + d_vm1) * 2.0).with_name("g")
    rhs_h = (d_v1 - d_vm1) * 2.0j

    dg, dbg = wirtinger(g, "del"), wirtinger(g, "dbar")
    e = np.exp(1j * grid.beta)
    flux = e * 1j * (v1.ring - dg.ring) + np.conj(e) * (-1j) * (vm1.ring - dbg.ring)
    h, defect = poisson_neumann(rhs_h, flux)
    h = h.with_name("h")

    recon = x_op(FiberField.from_modes(grid, 1, {0: g})) + x_perp_scalar(h)
    v_norm = V.norm()
    residual = (V - recon).norm() / v_norm if v_norm > 0 else 0.0
    if residual > tol:
        logger.warning("Hodge decomposition residual %.3e above tolerance %.1e", residual, tol)
    return HodgeDecomposition(g, h, residual, defect)


@dataclass(frozen=True)
class CauchyExtension:
    field: DiscField
    dropped_norm: float      # L2(d beta / 2 pi) norm of the discarded trace modes
    relative_dropped: float


def cauchy_extend(b: Union[DiscField, np.ndarray], which: str, grid: Optional[PolarGrid] = None) -> CauchyExtension:
    """
    Holomorphic (sum_{k>=0} b_k z^k) or antiholomorphic (sum_{k<=0} b_k conj(z)^|k|) extension of a
    trace on the unit circle given at uniform angles 2 pi j / n.
    """
    if which not in ("holo", "antiholo"):
        raise ValueError(f"Unknown extension {which!r} (expected 'holo' or 'antiholo')")
    if isinstance(b, DiscField):
        grid = grid or b.grid
        samples = b.ring
    else:
        samples = np.asarray(b, dtype=np.complex128)
        if grid is None:
            raise ValueError("cauchy_extend needs a PolarGrid for raw boundary samples")
    n = samples.shape[0]
    c = np.fft.fft(samples) / n
    half = n // 2
    if which == "holo":
        kept = c[:half]
        series = holomorphic_series(kept)
    else:
        kept = np.concatenate([c[:1], c[::-1][:half - 1]])
        series = holomorphic_series(kept, antiholomorphic=True)
    total = float(np.sqrt(np.sum(np.abs(c) ** 2)))
    dropped = float(np.sqrt(max(total**2 - np.sum(np.abs(kept) ** 2), 0.0)))
    rel = dropped / total if total > 0 else 0.0
    if rel > 1e-3:
        logger.warning("cauchy_extend(%s): dropped trace modes carry %.2e of the trace norm", which, rel)
    field = DiscField.from_analytic(grid, series, f"cauchy_{which}")
    return CauchyExtension(field, dropped, rel)


def poincare_constant() -> float:
    """C_P = 1 / j_{0,1}^2, the inverse first Dirichlet eigenvalue of the unit disc."""
    j01 = optimize.brentq(special.j0, 2.0, 3.0, xtol=1e-15)
    return 1.0 / j01**2


# ---------------------------------------------------------------------------
# Vector fields on SM
# ---------------------------------------------------------------------------

def _shift_modes(u: FiberField, which: str, shift: int) -> FiberField:
    out: dict[int, DiscField] = {}
    for k in u.active_modes():
        d = wirtinger(u.mode(k), which)
        target = k + shift
        out[target] = d if target not in out else out[target] + d
    return FiberField.from_modes(u.grid, u.K + 1, out, u.name)


def eta_plus(u: FiberField) -> FiberField:
    """eta+ = e^{i theta} d: mode k receives d u_{k-1}."""
    return _shift_modes(u, "del", 1).with_name(f"eta+({u.name})")


def eta_minus(u: FiberField) -> FiberField:
    """eta- = e^{-i theta} dbar: mode k receives dbar u_{k+1}."""
    return _shift_modes(u, "dbar", -1).with_name(f"eta-({u.name})")


def x_op(u: FiberField) -> FiberField:
    return (eta_plus(u) + eta_minus(u)).with_name(f"X({u.name})")


def x_perp(u: FiberField) -> FiberField:
    return ((eta_plus(u) - eta_minus(u)) * (-1j)).with_name(f"Xperp({u.name})")


def x_perp_scalar(h: DiscField, K: int = 1) -> FiberField:
    """X_perp h = (1/i)(e^{i theta} d h - e^{-i theta} dbar h) for a function of x."""
    modes = {1: wirtinger(h, "del") * (-1j), -1: wirtinger(h, "dbar") * 1j}
    return FiberField.from_modes(h.grid, max(K, 1), modes, f"Xperp({h.name})")


def commutator_residual(u: FiberField) -> float:
    """|| [H, X] u - X_perp u_0 - (X_perp u)_0 || / ||u||."""
    lhs = fiber_hilbert(x_op(u)) - x_op(fiber_hilbert(u))
    u0 = FiberField.from_modes(u.grid, u.K, {0: u.mode(0)})
    rhs = x_perp(u0) + FiberField.from_modes(u.grid, u.K, {0: x_perp(u).mode(0)})
    norm = u.norm()
    return (lhs - rhs).norm() / norm if norm > 0 else 0.0
