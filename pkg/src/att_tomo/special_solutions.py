"""
Closed-form kernels and special transport solutions on the unit disc.

    Z_k = sqrt((k+1) / 2 pi^2) z^k                        orthonormal basis of ker dbar in L2(SM)
    W_k = (-1)^k sqrt(k+1) / 2 u'_{k,k}                   I_0^* W_k = Z_k
    G(z; beta, alpha) = sum_k conj(W_k) Z_k               reconstruction kernel
    w_a = 2 pi i (Id + iH) n_psi,  n = -P-^* I_0 a / 8 pi  holomorphic odd solution of Xw = -a
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .analytic import AnalyticFunction, monomial
from .boundary_ops import (
    BoundaryBasisIndex,
    a_extend,
    a_restrict,
    op_P_dagger,
    op_P_star,
)
from .complex_calculus import wirtinger
from .discretization import Discretization
from .fields import (
    BoundaryField,
    DiscField,
    FiberField,
    as_disc_field,
    fiber_hilbert,
    holomorphic_projection,
    theta_nodes,
)
from .geometry import FanBeamPoint, flow_extend_grid, flow_extend_samples, footpoint, scattering_angles
from .transport import Sinogram, xray, xray_perp
from .utils.conversions import TWO_PI

logger = logging.getLogger("att_tomo")

BASIS_KINDS = ("Zk", "Wk", "ukk_over_cos")
KERNEL_MODES = ("closed", "series", "separable")


def _check_k(k: int):
    if k < 0:
        raise ValueError(f"Basis index k must be non-negative, got {k}")


# ---------------------------------------------------------------------------
# Bases
# ---------------------------------------------------------------------------

def z_k(k: int) -> AnalyticFunction:
    _check_k(k)
    return monomial(k, 0, math.sqrt((k + 1) / (2.0 * np.pi**2)))


def w_k(k: int) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    _check_k(k)
    c = (-1) ** k * math.sqrt(k + 1) / 2.0
    idx = BoundaryBasisIndex("u'", k, k)
    return lambda beta, alpha: c * idx.evaluate(beta, alpha)


def ukk_over_cos(k: int) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """u'_{k,k} / cos(alpha) as the finite sum (sqrt 2 / pi) e^{ik beta} (-1)^k sum_p (-1)^p e^{2ip alpha}."""
    _check_k(k)
    signs = (-1.0) ** np.arange(k + 1)

    def evaluate(beta, alpha):
        beta = np.asarray(beta, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        e2 = np.exp(2j * alpha)
        total = np.zeros(np.broadcast(beta, alpha).shape, dtype=np.complex128)
        for p in range(k + 1):
            total += signs[p] * e2**p
        return (math.sqrt(2.0) / np.pi) * (-1) ** k * np.exp(1j * k * beta) * total

    return evaluate


def wk_over_cos(k: int) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    c = (-1) ** k * math.sqrt(k + 1) / 2.0
    base = ukk_over_cos(k)
    return lambda beta, alpha: c * base(beta, alpha)


def basis_eval(kind: str, k: int, point) -> np.ndarray:
    """Zk at complex points z; Wk and ukk_over_cos at FanBeamPoints."""
    if kind not in BASIS_KINDS:
        raise ValueError(f"Unknown basis kind {kind!r} (expected one of {BASIS_KINDS})")
    if kind == "Zk":
        return z_k(k)(point)
    if not isinstance(point, FanBeamPoint):
        raise ValueError(f"{kind} is evaluated at FanBeamPoints, got {type(point).__name__}")
    fn = w_k(k) if kind == "Wk" else ukk_over_cos(k)
    return fn(point.beta, point.alpha)


def svd_triplet(k: int) -> tuple[AnalyticFunction, float, Callable[[np.ndarray, np.ndarray], np.ndarray]]:
    """(Z_k, sqrt(2 / (k+1)), (-1)^k u'_{k,k} / sqrt 2): I_0 Z_k = sigma_k times the third entry."""
    _check_k(k)
    idx = BoundaryBasisIndex("u'", k, k)
    c = (-1) ** k / math.sqrt(2.0)
    return z_k(k), math.sqrt(2.0 / (k + 1)), lambda beta, alpha: c * idx.evaluate(beta, alpha)


# ---------------------------------------------------------------------------
# Kernel
# ---------------------------------------------------------------------------

def _half_kernel(z, beta, alpha) -> np.ndarray:
    """e^{i alpha} / (2 pi^2 (1 - z e^{-i beta})^2)."""
    return np.exp(1j * alpha) / (2.0 * np.pi**2 * (1.0 - z * np.exp(-1j * beta)) ** 2)


def green_kernel(z, p: FanBeamPoint, mode: str = "closed", n_terms: int = 200) -> np.ndarray:
    """G(z; beta, alpha) by the closed form, the W_k / Z_k series or the S_A-symmetrised half kernel."""
    if mode not in KERNEL_MODES:
        raise ValueError(f"Unknown kernel mode {mode!r} (expected one of {KERNEL_MODES})")
    z = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(z) >= 1.0):
        raise ValueError(f"Kernel evaluated at |z| = {np.abs(z).max():.6g} >= 1 (pole on the circle)")
    beta = np.asarray(p.beta, dtype=float)
    alpha = np.asarray(p.alpha, dtype=float)

    if mode == "closed":
        first = np.exp(-1j * alpha) / (1.0 + z * np.exp(-1j * (beta + 2.0 * alpha))) ** 2
        second = np.exp(1j * alpha) / (1.0 - z * np.exp(-1j * beta)) ** 2
        return (first + second) / (4.0 * np.pi**2)
    if mode == "separable":
        b2, a2 = scattering_angles(beta, alpha, antipodal=True)
        return 0.5 * (_half_kernel(z, beta, alpha) + _half_kernel(z, b2, a2))

    out = np.zeros(np.broadcast(z, beta, alpha).shape, dtype=np.complex128)
    for k in range(n_terms):
        out += np.conj(w_k(k)(beta, alpha)) * z_k(k)(z)
    return out


# ---------------------------------------------------------------------------
# Invariant distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class InvariantDistribution:
    """W_f on d+SM with I_0^* W_f = f, for f in ker dbar."""

    W: BoundaryField
    divided: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]]   # W_f / cos alpha
    coefficients: np.ndarray                                             # <f, Z_k>_SM
    method: str


def z_coefficients(f: DiscField, n_terms: int) -> np.ndarray:
    """<f, Z_k>_{L2(SM)} = 2 pi <f, Z_k>_M for k < n_terms."""
    out = np.zeros(n_terms, dtype=np.complex128)
    for k in range(n_terms):
        out[k] = TWO_PI * f.inner(DiscField.from_analytic(f.grid, z_k(k)))
    return out


def _series_evaluators(coeffs: np.ndarray):
    active = [(k, c) for k, c in enumerate(coeffs) if c != 0]

    def W(beta, alpha):
        out = np.zeros(np.broadcast(np.asarray(beta), np.asarray(alpha)).shape, dtype=np.complex128)
        for k, c in active:
            out += c * w_k(k)(beta, alpha)
        return out

    def divided(beta, alpha):
        out = np.zeros(np.broadcast(np.asarray(beta), np.asarray(alpha)).shape, dtype=np.complex128)
        for k, c in active:
            out += c * wk_over_cos(k)(beta, alpha)
        return out

    return W, divided


def _kernel_profile(f: DiscField) -> np.ndarray:
    """b_k = (k+1) int_0^1 rho^{k+1} fhat_k(rho) d rho for k >= 0 (angular integral of the kernel in Fourier space)."""
    grid = f.grid
    modes = f.modes()
    n_pos = grid.n_beta // 2
    ks = np.arange(n_pos)
    radial = grid.rho[:, None] ** (ks[None, :] + 1) * modes[:, :n_pos]
    return (ks + 1) * (grid.radial_weights @ radial)


def invariant_from_function(f, disc: Optional[Discretization] = None, method: str = "series",
                            n_terms: Optional[int] = None, tol: float = 1e-6) -> InvariantDistribution:
    """
    W_f = sum_k <f, Z_k> W_k ("series") or W_f = 2 pi int_M f conj(G) ("kernel"); the kernel path
    integrates the separable half kernel angle by angle in Fourier space and symmetrises with S_A.
    """
    if method not in ("series", "kernel"):
        raise ValueError(f"Unknown method {method!r} (expected 'series' or 'kernel')")
    disc = disc or Discretization()
    f = as_disc_field(f, disc.grid, "f")
    f_norm = f.norm()
    if f_norm > 0:
        defect = wirtinger(f, "dbar").norm() / f_norm
        if defect > tol:
            logger.warning("invariant_from_function: ||dbar f|| / ||f|| = %.2e, only the ker dbar part is represented",
                           defect)

    n_terms = n_terms or disc.K
    if method == "series":
        coeffs = z_coefficients(f, n_terms)
        W, divided = _series_evaluators(coeffs)
        field = BoundaryField.from_function(disc.bgrid, W, f"W[{f.name}]", plus_only=True).restrict_plus()
        return InvariantDistribution(field, divided, coeffs, method)

    b = _kernel_profile(f)
    ks = np.arange(b.size)

    def half(beta, alpha):
        beta = np.asarray(beta, dtype=float)
        series = np.zeros(beta.shape, dtype=np.complex128)
        for k in np.flatnonzero(np.abs(b) > 0):
            series = series + b[k] * np.exp(1j * ks[k] * beta)
        return 2.0 * np.exp(-1j * np.asarray(alpha)) * series

    def W(beta, alpha):
        beta, alpha = np.broadcast_arrays(np.asarray(beta, dtype=float), np.asarray(alpha, dtype=float))
        b2, a2 = scattering_angles(beta, alpha, antipodal=True)
        return 0.5 * (half(beta, alpha) + half(b2, a2))

    # int_M f conj(z)^k = 2 pi b_k / (k+1)
    coeffs = np.array([TWO_PI**2 * math.sqrt((k + 1) / (2.0 * np.pi**2)) * b[k] / (k + 1)
                       for k in range(min(n_terms, b.size))])
    field = BoundaryField.from_function(disc.bgrid, W, f"W[{f.name}]", plus_only=True).restrict_plus()
    return InvariantDistribution(field, None, coeffs, method)


def invariant_moment(divided: Callable[[np.ndarray, np.ndarray], np.ndarray], m: int, k: int,
                     disc: Optional[Discretization] = None, n_theta: Optional[int] = None) -> complex:
    """<(h / cos alpha)_psi, e^{im theta} Z_k>_SM for h / cos alpha given in closed form."""
    disc = disc or Discretization()
    grid = disc.grid
    n_theta = n_theta or max(disc.n_theta, disc.bgrid.n_alpha)
    hv = flow_extend_samples(divided, grid, n_theta)
    th = theta_nodes(n_theta)[:, None, None]
    test = np.exp(1j * m * th) * z_k(k)(grid.z)[None]
    return complex(np.sum(hv * np.conj(test) * grid.weights[None]) * TWO_PI / n_theta)


def j_kp_oracle(k: int, p: int, x, n_theta: int = 2048) -> np.ndarray:
    """J_{k,p}(x) = (1/2 pi) int (e^{ik beta} e^{2ip alpha})_psi(x, theta) d theta by the trapezoid rule."""
    if not 0 <= p <= k:
        raise ValueError(f"J_(k,p) needs 0 <= p <= k, got k={k}, p={p}")
    x = np.asarray(x, dtype=np.complex128)
    th = theta_nodes(n_theta).reshape((n_theta,) + (1,) * x.ndim)
    fp = footpoint(np.broadcast_to(x, th.shape[:1] + x.shape), np.broadcast_to(th, th.shape[:1] + x.shape))
    vals = np.exp(1j * (k * fp.beta + 2 * p * fp.alpha))
    return vals.mean(axis=0)


def j_kp_expected(k: int, p: int, x) -> np.ndarray:
    """1 for k = 0; z^k / 2 at p = 0, (-1)^k z^k / 2 at p = k, else 0."""
    x = np.asarray(x, dtype=np.complex128)
    if k == 0:
        return np.ones(x.shape, dtype=np.complex128)
    if p == 0:
        return 0.5 * x**k
    if p == k:
        return 0.5 * (-1) ** k * x**k
    return np.zeros(x.shape, dtype=np.complex128)


# ---------------------------------------------------------------------------
# Holomorphic integrating factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IntegratingFactor:
    """w with Xw = -a, odd and fiberwise holomorphic (antiholomorphic when conjugate); rho = w on d+SM."""

    w: FiberField
    rho: BoundaryField
    attenuation: DiscField
    conjugate: bool = False
    i0a: Optional[BoundaryField] = None
    pm_star_i0a: Optional[BoundaryField] = None

    @property
    def negative_mode_norm(self) -> float:
        """Norm of the modes on the wrong side (negative for w_a, positive for the conjugate variant)."""
        wrong = (lambda k: k > 0) if self.conjugate else (lambda k: k < 0)
        return self.w.select(wrong).norm()

    @property
    def parity_defect(self) -> float:
        norm = self.w.norm()
        even = self.w.select(lambda k: k % 2 == 0).norm()
        return even / norm if norm > 0 else 0.0

    def boundary_trace(self) -> BoundaryField:
        """w on all of dSM: A- I_0 a / 2 - (i/4) A+ P-^* I_0 a (conjugated for the conjugate variant)."""
        if self.i0a is None or self.pm_star_i0a is None:
            raise ValueError("Integrating factor was built without its boundary data")
        trace = a_extend(self.i0a, -1) * 0.5 - a_extend(self.pm_star_i0a, 1) * 0.25j
        return trace.conj() if self.conjugate else trace

    def exp_samples(self, n_theta: int, sign: float = 1.0) -> np.ndarray:
        return np.exp(sign * self.w.samples(n_theta))


def hif_build(a, disc: Optional[Discretization] = None, conjugate: bool = False) -> IntegratingFactor:
    """w_a (or conj(w_{conj a}) when conjugate) on the SM grid with its d+SM trace rho."""
    disc = disc or Discretization()
    grid = disc.grid
    a_field = as_disc_field(a, grid, "a")
    source = a_field.conj() if conjugate else a_field

    i0a = xray(source, disc).data
    pm = op_P_star(i0a, "minus")
    n = pm * (-1.0 / (8.0 * np.pi))
    w = holomorphic_projection(flow_extend_grid(n, grid, disc.K, disc.n_theta)) * (TWO_PI * 1j)
    rho = (i0a * 0.5 - pm * 0.25j).restrict_plus()
    w = w.with_name(f"w[{a_field.name}]")
    if conjugate:
        w = w.conj().with_name(f"wbar[{a_field.name}]")
        rho = rho.conj()
    factor = IntegratingFactor(w, rho.with_name(f"rho[{a_field.name}]"), a_field, conjugate, i0a, pm)
    logger.debug("hif_build(%s, conjugate=%s): ||w||=%.3e, parity defect %.1e",
                 a_field.name, conjugate, w.norm(), factor.parity_defect)
    if factor.parity_defect > 1e-6:
        logger.warning("Integrating factor for '%s' has even-mode content %.2e", a_field.name, factor.parity_defect)
    return factor


# ---------------------------------------------------------------------------
# Holomorphic special solutions
# ---------------------------------------------------------------------------

def special_primitive(f0, fs, disc: Optional[Discretization] = None) -> FiberField:
    """u = -i (Id + iH)(P^dagger I(f0 + X_perp fs))_psi: Xu = -f0 - X_perp fs and u_0 = -i fs."""
    disc = disc or Discretization()
    grid = disc.grid
    f0 = as_disc_field(f0, grid, "f0")
    fs = as_disc_field(fs, grid, "fs")
    data = xray(f0, disc).data + xray_perp(fs, None, disc).data
    h = op_P_dagger(data, "all")
    u = holomorphic_projection(flow_extend_grid(h, grid, disc.K, disc.n_theta)) * (-1j)
    return u.with_name(f"u[{f0.name},{fs.name}]")


def holomorphize(trace: Union[BoundaryField, Sinogram], direction: str = "forward") -> BoundaryField:
    """
    forward:  B h = 1/2 [(Id - iH) h + i (Id + iH) A+ P^dagger A-^* (Id - iH) h] on d+SM
    backward: conj(B conj(h))
    """
    if direction not in ("forward", "backward"):
        raise ValueError(f"Unknown direction {direction!r} (expected 'forward' or 'backward')")
    h = trace.data if isinstance(trace, Sinogram) else trace
    if direction == "backward":
        return holomorphize(h.conj(), "forward").conj().with_name(f"B<({h.name})")

    minus = h - fiber_hilbert(h) * 1j
    inner = a_extend(op_P_dagger(a_restrict(minus, -1), "all"), 1)
    plus = inner + fiber_hilbert(inner) * 1j
    return ((minus + plus * 1j) * 0.5).restrict_plus().with_name(f"B>({h.name})")


def holomorphized_solution(u: FiberField, trace: BoundaryField, direction: str = "forward",
                           disc: Optional[Discretization] = None) -> FiberField:
    """u - (B(u on dSM))_psi; holomorphic when Xu = -f with f = O(>= -1) (antiholomorphic backward)."""
    disc = disc or Discretization()
    b = holomorphize(trace, direction)
    n_theta = max(disc.n_theta, 2 * u.K + 1)
    samples = u.samples(n_theta) - flow_extend_samples(b, u.grid, n_theta)
    return FiberField.from_samples(u.grid, samples, u.K, f"{u.name}~")
