"""
Attenuated X-ray transform, transport solver and backprojections.

    I_a f(beta, alpha) = int_0^{2 cos alpha} f(phi_t) exp(int_0^t a(phi_s) ds) dt     on d+SM
    u(x, theta)        = int_0^{tau(x, theta)} f(phi_t) exp(int_0^t a) dt          (Xu + au = -f, u = 0 on d-SM)

Sinograms are stored as torus fields that vanish on d-SM.
"""
from __future__ import annotations

import logging
import math
import numbers
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .complex_calculus import x_perp, x_perp_scalar
from .discretization import Discretization
from .fields import (
    BoundaryField,
    DiscField,
    FiberField,
    as_disc_field,
    extend_by_zero,
    sup_norm,
    theta_nodes,
)
from .geometry import (
    as_sm_integrand,
    exit_time,
    flow_extend_samples,
    footpoint,
    integrate_rays,
)
from .utils.conversions import TWO_PI

logger = logging.getLogger("att_tomo")

BACKPROJECTIONS = ("I0sharp", "Iperpsharp", "I0star")

_GLANCING_COS = 1e-10


@dataclass(frozen=True, eq=False)
class Sinogram:
    """I_a f on d+SM together with sup |a| and the integrand order m."""

    data: BoundaryField
    a_inf: float = 0.0
    m: int = 0
    name: str = ""

    def __post_init__(self):
        if not np.all(np.isfinite(self.data.samples)):
            raise ValueError(f"Sinogram '{self.name}' has non-finite samples")

    @property
    def grid(self):
        return self.data.grid

    @property
    def samples(self) -> np.ndarray:
        """d+SM samples, shape (N_beta, N_alpha / 2)."""
        return self.data.plus_samples

    def norm(self) -> float:
        return self.data.norm_plus()

    def continuity_bound(self, f_norm: float) -> float:
        """sqrt(2) e^{2 a_inf} ||f||_{L2(SM)}."""
        return math.sqrt(2.0) * math.exp(2.0 * self.a_inf) * f_norm

    def continuity_ratio(self, f_norm: float) -> float:
        bound = self.continuity_bound(f_norm)
        return self.norm() / bound if bound > 0 else 0.0

    def with_data(self, data: BoundaryField, name: Optional[str] = None) -> "Sinogram":
        return Sinogram(extend_by_zero(data), self.a_inf, self.m, self.name if name is None else name)

    def __sub__(self, other: "Sinogram") -> "Sinogram":
        return Sinogram(self.data - other.data, max(self.a_inf, other.a_inf), max(self.m, other.m),
                        f"({self.name}-{other.name})")

    def __add__(self, other: "Sinogram") -> "Sinogram":
        return Sinogram(self.data + other.data, max(self.a_inf, other.a_inf), max(self.m, other.m),
                        f"({self.name}+{other.name})")


def _order_of(f) -> int:
    if isinstance(f, FiberField):
        return f.order()
    return 0


def _attenuation_sup(a, disc: Discretization) -> float:
    if a is None or isinstance(a, numbers.Number):
        return sup_norm(a)
    return sup_norm(a, disc.grid)


# ---------------------------------------------------------------------------
# Forward transforms
# ---------------------------------------------------------------------------

def xray_attenuated(f, a=None, disc: Optional[Discretization] = None, m: Optional[int] = None,
                    name: str = "") -> Sinogram:
    """Chordwise quadrature of f exp(cumulative a) over every incoming grid point."""
    disc = disc or Discretization()
    bgrid = disc.bgrid
    integrand = as_sm_integrand(f)
    z0 = np.exp(1j * bgrid.beta)
    plus = np.zeros((bgrid.n_beta, bgrid.n_alpha // 2), dtype=np.complex128)
    for j, alpha in enumerate(bgrid.alpha_plus):
        length = 2.0 * math.cos(alpha)
        plus[:, j] = integrate_rays(z0, bgrid.beta + np.pi + alpha, length, integrand, a, disc.quad)

    label = name or f"I_a({getattr(f, 'name', '') or getattr(f, 'label', 'f')})"
    a_inf = _attenuation_sup(a, disc)
    order = _order_of(f) if m is None else m
    logger.debug("xray_attenuated '%s': %d x %d rays, a_inf=%.3g, m=%d",
                 label, bgrid.n_beta, bgrid.n_alpha // 2, a_inf, order)
    return Sinogram(extend_by_zero(plus, bgrid), a_inf, order, label)


def xray(f, disc: Optional[Discretization] = None, name: str = "") -> Sinogram:
    """Unattenuated I = I_0 on functions of x, I on fiber fields."""
    return xray_attenuated(f, None, disc, name=name or f"I({getattr(f, 'name', 'f')})")


def xray_perp(h, a=None, disc: Optional[Discretization] = None, name: str = "") -> Sinogram:
    """I_perp h := I_a(X_perp h) for a function h of x."""
    disc = disc or Discretization()
    hf = as_disc_field(h, disc.grid, getattr(h, "label", "h"))
    integrand = x_perp_scalar(hf)
    return xray_attenuated(integrand, a, disc, m=1, name=name or f"I_perp({hf.name})")


# ---------------------------------------------------------------------------
# Transport
# ---------------------------------------------------------------------------

def transport_solve(f, a=None, disc: Optional[Discretization] = None, K: Optional[int] = None) -> FiberField:
    """u with Xu + au = -f on SM and u = 0 on d-SM, harmonically projected to |k| <= K."""
    disc = disc or Discretization()
    K = K or disc.K
    grid = disc.grid
    n_theta = max(disc.n_theta, 2 * K + 1)
    th = theta_nodes(n_theta)[:, None, None]
    z = np.broadcast_to(grid.z[None], (n_theta,) + grid.z.shape)
    theta = np.broadcast_to(th, z.shape)
    tau = exit_time(z, theta)

    samples = integrate_rays(z.ravel(), theta.ravel(), tau.ravel(), f, a, disc.quad).reshape(z.shape)
    name = f"u[{getattr(f, 'name', '') or getattr(f, 'label', 'f')}]"
    logger.debug("transport_solve '%s': %d rays, K=%d", name, z.size, K)
    return FiberField.from_samples(grid, samples, K, name)


# ---------------------------------------------------------------------------
# Backprojections
# ---------------------------------------------------------------------------

def _backprojection_nodes(disc: Discretization, n_theta: Optional[int]) -> int:
    return n_theta or max(disc.n_theta, disc.bgrid.n_alpha)


def _as_boundary(h, disc: Discretization) -> BoundaryField:
    if isinstance(h, Sinogram):
        return h.data
    if isinstance(h, BoundaryField):
        return h
    if callable(h):
        return BoundaryField.from_function(disc.bgrid, h, getattr(h, "__name__", "h"), plus_only=True)
    raise ValueError(f"Cannot backproject objects of type {type(h).__name__}")


def _divided_by_cos(h: BoundaryField, grid, n_theta: int) -> np.ndarray:
    th = theta_nodes(n_theta)[:, None, None]
    z = np.broadcast_to(grid.z[None], (n_theta,) + grid.z.shape)
    p = footpoint(z, np.broadcast_to(th, z.shape))
    cos = np.cos(p.alpha)
    vals = h.evaluate(p.beta, p.alpha)
    glancing = cos < _GLANCING_COS
    if np.any(glancing):
        logger.warning("I0star: %d glancing footpoints (cos alpha < %.0e) excluded from h / cos alpha",
                       int(glancing.sum()), _GLANCING_COS)
    return np.where(glancing, 0.0, vals / np.where(glancing, 1.0, cos))


def backproject(h, kind: str = "I0sharp", disc: Optional[Discretization] = None,
                divided: bool = False, n_theta: Optional[int] = None) -> DiscField:
    """
    I0sharp h    = 2 pi (h_psi)_0
    Iperpsharp h = -2 pi (X_perp h_psi)_0
    I0star h     = ((h / cos alpha)_psi)_0; pass divided=True when h already is h / cos alpha.
    """
    if kind not in BACKPROJECTIONS:
        raise ValueError(f"Unknown backprojection {kind!r} (expected one of {BACKPROJECTIONS})")
    disc = disc or Discretization()
    grid = disc.grid
    bh = _as_boundary(h, disc)
    n_theta = _backprojection_nodes(disc, n_theta)

    if kind == "I0sharp":
        samples = flow_extend_samples(bh, grid, n_theta)
        return DiscField(grid, TWO_PI * samples.mean(axis=0), f"I0#({bh.name})")

    if kind == "Iperpsharp":
        h_psi = FiberField.from_samples(grid, flow_extend_samples(bh, grid, n_theta), 1, f"({bh.name})_psi")
        out = x_perp(h_psi).mode(0) * (-TWO_PI)
        return out.grid_only().with_name(f"Iperp#({bh.name})")

    if divided:
        samples = flow_extend_samples(bh, grid, n_theta)
    else:
        samples = _divided_by_cos(bh, grid, n_theta)
    return DiscField(grid, samples.mean(axis=0), f"I0*({bh.name})")


# ---------------------------------------------------------------------------
# Identities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityCheck:
    lhs: complex
    rhs: complex

    @property
    def relative_error(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return abs(self.lhs - self.rhs) / scale if scale > 0 else 0.0


def santalo_adjoint_check(f, h: BoundaryField, disc: Optional[Discretization] = None) -> IdentityCheck:
    """<I_0 f, h>_{d+SM} against 2 pi <f, I_0^* h>_M (h given in closed form)."""
    disc = disc or Discretization()
    fd = as_disc_field(f, disc.grid)
    lhs = xray(fd, disc).data.inner_plus(h)
    rhs = TWO_PI * fd.inner(backproject(h, "I0star", disc))
    return IdentityCheck(lhs, rhs)


def ibp_check(f, h: BoundaryField, a, w: FiberField, rho: BoundaryField,
              disc: Optional[Discretization] = None) -> IdentityCheck:
    """<e^{-w} f, h_psi>_SM against <e^{-rho} I_a f, h cos alpha>_{d+SM}, for Xw = -a with w = rho on d+SM."""
    disc = disc or Discretization()
    grid, bgrid = disc.grid, disc.bgrid
    n_theta = _backprojection_nodes(disc, None)
    th = theta_nodes(n_theta)[:, None, None]
    z = np.broadcast_to(grid.z[None], (n_theta,) + grid.z.shape)
    theta = np.broadcast_to(th, z.shape)

    fv = as_sm_integrand(f)(z, theta)
    wv = w(z, theta)
    hv = flow_extend_samples(h, grid, n_theta)
    lhs = np.sum(np.exp(-wv) * fv * np.conj(hv) * grid.weights[None]) * TWO_PI / n_theta

    data = xray_attenuated(f, a, disc).samples
    B, A = np.meshgrid(bgrid.beta, bgrid.alpha_plus, indexing="ij")
    weight = np.exp(-rho.evaluate(B, A)) * np.conj(h.evaluate(B, A)) * np.cos(A)
    rhs = np.sum(data * weight) * bgrid.d_beta * bgrid.d_alpha
    return IdentityCheck(complex(lhs), complex(rhs))


def continuity_check(f: FiberField, a=None, disc: Optional[Discretization] = None) -> float:
    """||I_a f|| / (sqrt 2 e^{2 a_inf} ||f||); at most 1 up to quadrature error."""
    sino = xray_attenuated(f, a, disc)
    return sino.continuity_ratio(f.norm())


def chordwise_residual(u, f=None, a=None, n_chords: int = 100, seed: int = 0,
                       step: float = 1e-3) -> float:
    """
    max |Xu + au + f| / scale at random interior points, X taken as a centred difference of
    step along each chord; scale is max(|f| + |a u|, max |u|) over the same points.
    """
    rng = np.random.default_rng(seed)
    r = 0.85 * np.sqrt(rng.uniform(0.0, 1.0, n_chords))
    x = r * np.exp(1j * rng.uniform(0.0, TWO_PI, n_chords))
    theta = rng.uniform(0.0, TWO_PI, n_chords)
    d = np.exp(1j * theta)
    u_fn = as_sm_integrand(u)
    xu = (u_fn(x + step * d, theta) - u_fn(x - step * d, theta)) / (2.0 * step)
    uv = u_fn(x, theta)
    au = 0.0 if a is None else as_sm_integrand(a)(x, theta) * uv
    fv = 0.0 if f is None else as_sm_integrand(f)(x, theta)
    res = np.abs(xu + au + fv)
    scale = max(float(np.max(np.abs(fv) + np.abs(au))), float(np.max(np.abs(uv))), 1e-300)
    return float(res.max() / scale)
