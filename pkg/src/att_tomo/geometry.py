"""
Fan-beam geometry of the unit disc.

A boundary point (beta, alpha) is the unit vector of direction theta = beta + pi + alpha based at
x(beta) = e^{i beta}; it points inward iff cos(alpha) >= 0. Chords are integrated with composite
Gauss-Legendre panels, the cumulative attenuation with the same panels.
"""
from __future__ import annotations

import logging
import math
import numbers
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np

from .analytic import AnalyticFunction
from .fields import BoundaryField, BoundaryGrid, DiscField, FiberField, PolarGrid, theta_nodes
from .utils.conversions import wrap_angle
from .utils.quadrature import gauss_legendre, panel_integration_matrix

logger = logging.getLogger("att_tomo")

SMFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]
DiscFunction = Callable[[np.ndarray], np.ndarray]

_RAY_CHUNK_POINTS = 400_000


@dataclass(frozen=True)
class FanBeamPoint:
    beta: Union[float, np.ndarray]
    alpha: Union[float, np.ndarray]

    @property
    def base_point(self):
        return np.exp(1j * np.asarray(self.beta))

    @property
    def theta(self):
        return np.asarray(self.beta) + np.pi + np.asarray(self.alpha)

    @property
    def is_incoming(self):
        return np.cos(self.alpha) >= 0


@dataclass(frozen=True)
class RayQuadrature:
    """Composite Gauss-Legendre rule with panels no longer than h_t."""

    h_t: float = 2.0 / 512
    order: int = 4

    def __post_init__(self):
        if self.h_t <= 0:
            raise ValueError(f"Panel length h_t must be positive, got {self.h_t}")
        if self.order < 1:
            raise ValueError(f"Gauss-Legendre order must be positive, got {self.order}")

    @cached_property
    def _rule(self) -> tuple[np.ndarray, np.ndarray]:
        return gauss_legendre(self.order)

    @property
    def nodes(self) -> np.ndarray:
        return self._rule[0]

    @property
    def weights(self) -> np.ndarray:
        return self._rule[1]

    @cached_property
    def integration_matrix(self) -> np.ndarray:
        return panel_integration_matrix(self.nodes)

    def panel_count(self, length: float) -> int:
        return max(1, math.ceil(length / self.h_t - 1e-9))

    def refined(self, factor: int = 2) -> "RayQuadrature":
        return RayQuadrature(self.h_t / factor, self.order)


def _check_in_disc(x: np.ndarray):
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise ValueError(f"Points must lie in the closed unit disc (max |x| = {np.abs(x).max():.6g})")


def exit_time(x, theta) -> np.ndarray:
    """tau(x, theta): first time x + t e^{i theta} reaches the unit circle."""
    x = np.asarray(x, dtype=np.complex128)
    _check_in_disc(x)
    d = np.exp(1j * np.asarray(theta, dtype=float))
    xd = (x * np.conj(d)).real
    rad = np.clip(xd**2 + 1.0 - np.abs(x) ** 2, 0.0, None)
    return np.clip(-xd + np.sqrt(rad), 0.0, None)


def scattering_angles(beta, alpha, antipodal: bool = False) -> tuple[np.ndarray, np.ndarray]:
    beta = np.asarray(beta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    b = wrap_angle(beta + np.pi + 2.0 * alpha)
    a = wrap_angle(-alpha if antipodal else np.pi - alpha)
    return b, a


def scattering(p: FanBeamPoint, antipodal: bool = False) -> FanBeamPoint:
    """S(beta, alpha) = (beta + pi + 2 alpha, pi - alpha); S_A replaces pi - alpha by -alpha."""
    return FanBeamPoint(*scattering_angles(p.beta, p.alpha, antipodal))


def footpoint(x, theta) -> FanBeamPoint:
    """d+SM coordinates of the line through (x, theta): beta in [0, 2 pi), alpha in [-pi/2, pi/2]."""
    x = np.asarray(x, dtype=np.complex128)
    _check_in_disc(x)
    theta = np.asarray(theta, dtype=float)
    s = np.clip((np.exp(-1j * theta) * x).imag, -1.0, 1.0)
    alpha = np.arcsin(s)
    beta = wrap_angle(theta - np.pi - alpha)
    return FanBeamPoint(beta, alpha)


# ---------------------------------------------------------------------------
# Chord integration
# ---------------------------------------------------------------------------

def as_sm_integrand(f) -> SMFunction:
    """Callable (z, theta) -> values for FiberFields, disc fields, evaluators and constants."""
    if isinstance(f, FiberField):
        return f
    if isinstance(f, (DiscField, AnalyticFunction)):
        return lambda z, theta: f(z)
    if isinstance(f, numbers.Number):
        c = complex(f)
        return lambda z, theta: np.full(np.shape(z), c, dtype=np.complex128)
    if callable(f):
        return f
    raise ValueError(f"Cannot integrate objects of type {type(f).__name__} along chords")


def as_disc_function(a) -> Optional[DiscFunction]:
    if a is None:
        return None
    if isinstance(a, numbers.Number):
        if a == 0:
            return None
        c = complex(a)
        return lambda z: np.full(np.shape(z), c, dtype=np.complex128)
    if isinstance(a, (DiscField, AnalyticFunction)) or callable(a):
        return a
    raise ValueError(f"Unsupported attenuation type: {type(a).__name__}")


def integrate_rays(z0, theta, length, integrand, attenuation=None,
                   quad: RayQuadrature = RayQuadrature()) -> np.ndarray:
    """
    int_0^L f(z0 + t e^{i theta}, theta) exp(int_0^t a) dt for a batch of rays.

    All rays share the panel count of the longest one; panels are stretched per ray.
    """
    z0 = np.atleast_1d(np.asarray(z0, dtype=np.complex128)).ravel()
    theta = np.broadcast_to(np.asarray(theta, dtype=float), z0.shape).ravel()
    length = np.broadcast_to(np.asarray(length, dtype=float), z0.shape).ravel()
    f = as_sm_integrand(integrand)
    a = as_disc_function(attenuation)

    out = np.zeros(z0.shape, dtype=np.complex128)
    if z0.size == 0 or length.max() <= 0:
        return out

    x, w = quad.nodes, quad.weights
    n_pan = quad.panel_count(float(length.max()))
    s = np.arange(n_pan)[:, None] + (x[None, :] + 1.0) / 2.0   # (n_pan, q) in panel units
    chunk = max(1, _RAY_CHUNK_POINTS // s.size)

    for start in range(0, z0.size, chunk):
        sl = slice(start, start + chunk)
        h = length[sl] / n_pan
        d = np.exp(1j * theta[sl])
        t = h[:, None, None] * s[None]
        pts = z0[sl, None, None] + t * d[:, None, None]
        vals = f(pts, np.broadcast_to(theta[sl, None, None], pts.shape))
        wt = (h / 2.0)[:, None, None] * w[None, None, :]
        if a is not None:
            av = a(pts)
            panel_total = np.sum(av * wt, axis=2)
            offsets = np.cumsum(panel_total, axis=1) - panel_total
            partial = (h / 2.0)[:, None, None] * np.einsum("ij,rpj->rpi", quad.integration_matrix, av)
            vals = vals * np.exp(offsets[:, :, None] + partial)
        out[sl] = np.sum(vals * wt, axis=(1, 2))
    return out


def santalo_integrate(f, bgrid: BoundaryGrid, quad: RayQuadrature = RayQuadrature()) -> complex:
    """int_SM f = int_{d+SM} cos(alpha) int_0^{2 cos alpha} f(phi_t) dt d beta d alpha."""
    f = as_sm_integrand(f)
    z0 = np.exp(1j * bgrid.beta)
    total = 0.0 + 0.0j
    for alpha in bgrid.alpha_plus:
        L = 2.0 * np.cos(alpha)
        col = integrate_rays(z0, bgrid.beta + np.pi + alpha, L, f, None, quad)
        total += np.cos(alpha) * col.sum()
    return complex(total * bgrid.d_beta * bgrid.d_alpha)


# ---------------------------------------------------------------------------
# Flow extension
# ---------------------------------------------------------------------------

BoundaryData = Union[BoundaryField, Callable[[np.ndarray, np.ndarray], np.ndarray]]


def _evaluate_boundary(h: BoundaryData, beta, alpha) -> np.ndarray:
    if isinstance(h, BoundaryField):
        return h.evaluate(beta, alpha)
    if isinstance(h, numbers.Number):
        return np.full(np.broadcast(beta, alpha).shape, complex(h), dtype=np.complex128)
    return np.asarray(h(beta, alpha), dtype=np.complex128)


def flow_extend(h: BoundaryData, x, theta) -> np.ndarray:
    """h_psi(x, theta) = h(footpoint(x, theta)), the first integral with influx values h."""
    p = footpoint(x, theta)
    return _evaluate_boundary(h, p.beta, p.alpha)


def flow_extend_samples(h: BoundaryData, grid: PolarGrid, n_theta: int) -> np.ndarray:
    """h_psi at theta_m = 2 pi m / n_theta over the polar grid, shape (n_theta, n_rho, n_beta)."""
    th = theta_nodes(n_theta)[:, None, None]
    z = np.broadcast_to(grid.z[None], (n_theta,) + grid.z.shape)
    return flow_extend(h, z, np.broadcast_to(th, z.shape))


def flow_extend_grid(h: BoundaryData, grid: PolarGrid, K: int, n_theta: Optional[int] = None) -> FiberField:
    n_theta = n_theta or 4 * K + 4
    name = getattr(h, "name", "h")
    return FiberField.from_samples(grid, flow_extend_samples(h, grid, n_theta), K, f"({name})_psi")


def chord_length(x, theta) -> np.ndarray:
    """Full length of the chord through x with direction theta."""
    return exit_time(x, theta) + exit_time(x, np.asarray(theta) + np.pi)
