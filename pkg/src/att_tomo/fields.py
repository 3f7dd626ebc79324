"""
Field representations on the disc M, its unit circle bundle SM and the boundary torus dSM.

- PolarGrid / DiscField: functions on M sampled on Gauss-Radau radii x uniform angles, optionally
  backed by an exact AnalyticFunction.
- FiberField: functions on SM stored as circular-harmonic coefficients u_k (k in [-K, K]) of
  u(x, theta) = sum_k u_k(x) e^{ik theta}.
- BoundaryGrid / BoundaryField: functions of the fan-beam coordinates (beta, alpha) on an aligned
  torus grid; fiber degree of the mode e^{i(p beta + n alpha)} is n since theta = beta + pi + alpha.
"""
from __future__ import annotations

import logging
import numbers
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Optional, Union

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .analytic import AnalyticFunction, constant
from .utils.conversions import TWO_PI, fft_frequencies, nyquist_mask, resample_periodic
from .utils.quadrature import (
    differentiation_matrix,
    fd_differentiation_matrix,
    interpolation_matrix,
    radau_nodes,
)

logger = logging.getLogger("att_tomo")

BoundaryEvaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]

_SPLINE_PAD = 6


def _periodic_spline(x: np.ndarray, period_axis: np.ndarray, table: np.ndarray,
                     bbox_x: tuple[float, float]) -> tuple[RectBivariateSpline, RectBivariateSpline]:
    """Quintic splines (real, imaginary) on x times a periodic axis padded by wrap-around copies."""
    pad = _SPLINE_PAD
    period = TWO_PI
    y = np.concatenate([period_axis[-pad:] - period, period_axis, period_axis[:pad] + period])
    vals = np.concatenate([table[:, -pad:], table, table[:, :pad]], axis=1)
    bbox = [bbox_x[0], bbox_x[1], y[0], y[-1]]
    re = RectBivariateSpline(x, y, vals.real, bbox=bbox, kx=5, ky=5, s=0)
    im = RectBivariateSpline(x, y, vals.imag, bbox=bbox, kx=5, ky=5, s=0)
    return re, im


# ---------------------------------------------------------------------------
# Disc
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolarGrid:
    """Tensor grid of Gauss-Radau radii (0, 1] times uniform angles on the unit disc."""

    n_rho: int = 40
    n_beta: int = 64
    radial_stencil: int = 0  # 0 = global spectral differentiation

    def __post_init__(self):
        if self.n_rho < 2:
            raise ValueError(f"n_rho must be at least 2, got {self.n_rho}")
        if self.n_beta < 4 or self.n_beta % 2:
            raise ValueError(f"n_beta must be even and at least 4, got {self.n_beta}")
        if self.radial_stencil and not 2 <= self.radial_stencil <= self.n_rho:
            raise ValueError(f"radial_stencil must be 0 or lie in [2, {self.n_rho}], "
                             f"got {self.radial_stencil}")

    @cached_property
    def _radau(self) -> tuple[np.ndarray, np.ndarray]:
        return radau_nodes(self.n_rho)

    @cached_property
    def rho(self) -> np.ndarray:
        return (self._radau[0] + 1.0) / 2.0

    @cached_property
    def radial_weights(self) -> np.ndarray:
        # weights of int_0^1 g(rho) d rho
        return self._radau[1] / 2.0

    @cached_property
    def beta(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_beta) / self.n_beta

    @property
    def d_beta(self) -> float:
        return TWO_PI / self.n_beta

    @cached_property
    def weights(self) -> np.ndarray:
        """Area weights, shape (n_rho, n_beta); they sum to pi."""
        w = self.radial_weights * self.rho * self.d_beta
        return np.repeat(w[:, None], self.n_beta, axis=1)

    @cached_property
    def z(self) -> np.ndarray:
        return self.rho[:, None] * np.exp(1j * self.beta)[None, :]

    @cached_property
    def frequencies(self) -> np.ndarray:
        return fft_frequencies(self.n_beta)

    @cached_property
    def diff_matrix(self) -> np.ndarray:
        """d/d rho on the radial nodes."""
        if self.radial_stencil:
            return fd_differentiation_matrix(self.rho, self.radial_stencil)
        return differentiation_matrix(self.rho)

    def radial_interpolation(self, targets) -> np.ndarray:
        return interpolation_matrix(self.rho, targets)

    def mask(self, radius: Optional[float] = None) -> np.ndarray:
        if radius is None:
            return np.ones((self.n_rho, self.n_beta), dtype=bool)
        return np.repeat((self.rho <= radius + 1e-12)[:, None], self.n_beta, axis=1)


@dataclass(frozen=True, eq=False)
class DiscField:
    """Complex function on the disc: grid samples plus an optional exact evaluator."""

    grid: PolarGrid
    values: np.ndarray
    name: str = ""
    analytic: Optional[AnalyticFunction] = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        expected = (self.grid.n_rho, self.grid.n_beta)
        if vals.shape != expected:
            raise ValueError(f"DiscField values have shape {vals.shape}, expected {expected}")
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"DiscField '{self.name}' has non-finite samples")
        object.__setattr__(self, "values", vals)

    # --- constructors ---

    @classmethod
    def from_analytic(cls, grid: PolarGrid, fn: AnalyticFunction, name: str = "") -> "DiscField":
        return cls(grid, fn(grid.z), name or fn.label, fn)

    @classmethod
    def zeros(cls, grid: PolarGrid, name: str = "0") -> "DiscField":
        return cls.from_analytic(grid, constant(0.0), name)

    @classmethod
    def constant(cls, grid: PolarGrid, c: complex, name: str = "") -> "DiscField":
        return cls.from_analytic(grid, constant(c), name or f"{complex(c):g}")

    def with_name(self, name: str) -> "DiscField":
        return DiscField(self.grid, self.values, name, self.analytic)

    def grid_only(self) -> "DiscField":
        return DiscField(self.grid, self.values, self.name)

    # --- spectral views ---

    def modes(self) -> np.ndarray:
        """Angular Fourier coefficients per radius, FFT order along axis 1."""
        return np.fft.fft(self.values, axis=1) / self.grid.n_beta

    @property
    def ring(self) -> np.ndarray:
        """Samples on the boundary circle rho = 1 at the grid angles."""
        return self.values[-1]

    def resample(self, rho_targets, n_beta_out: int) -> np.ndarray:
        """Exact polar interpolation onto (rho_targets x n_beta_out uniform angles)."""
        radial = self.grid.radial_interpolation(rho_targets) @ self.values
        return resample_periodic(radial, n_beta_out, axis=1)

    @cached_property
    def _spline(self):
        g = self.grid
        n_r = max(4 * g.n_rho, 96)
        n_b = max(4 * g.n_beta, 128)
        r = np.linspace(0.0, 1.0, n_r)
        b = TWO_PI * np.arange(n_b) / n_b
        return _periodic_spline(r, b, self.resample(r, n_b), (0.0, 1.0))

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        if self.analytic is not None:
            return self.analytic(z)
        re, im = self._spline
        r = np.clip(np.abs(z), 0.0, 1.0).ravel()
        b = np.mod(np.angle(z), TWO_PI).ravel()
        return (re.ev(r, b) + 1j * im.ev(r, b)).reshape(z.shape)

    # --- norms ---

    def inner(self, other: "DiscField", radius: Optional[float] = None) -> complex:
        self._check_grid(other)
        w = self.grid.weights * self.grid.mask(radius)
        return complex(np.sum(self.values * np.conj(other.values) * w))

    def norm(self, radius: Optional[float] = None) -> float:
        w = self.grid.weights * self.grid.mask(radius)
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2 * w)))

    def max_abs(self) -> float:
        return float(np.abs(self.values).max())

    # --- arithmetic ---

    def _check_grid(self, other: "DiscField"):
        if other.grid != self.grid:
            raise ValueError(f"Grid mismatch: {self.grid} vs {other.grid}")

    def _binary(self, other, op, label: str) -> "DiscField":
        if isinstance(other, numbers.Number):
            fn = None if self.analytic is None else op(self.analytic, complex(other))
            return DiscField(self.grid, op(self.values, complex(other)), self.name, fn)
        if not isinstance(other, DiscField):
            return NotImplemented
        self._check_grid(other)
        fn = None
        if self.analytic is not None and other.analytic is not None:
            fn = op(self.analytic, other.analytic)
        return DiscField(self.grid, op(self.values, other.values),
                         f"({self.name}{label}{other.name})", fn)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b, "+")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b, "-")

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b, "*")

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, numbers.Number):
            return NotImplemented
        return self * (1.0 / complex(other))

    def __neg__(self):
        return self * (-1.0)

    def conj(self) -> "DiscField":
        fn = None if self.analytic is None else self.analytic.conj()
        return DiscField(self.grid, np.conj(self.values), f"conj({self.name})", fn)


def as_disc_field(f: Union[DiscField, AnalyticFunction, numbers.Number, None],
                  grid: PolarGrid, name: str = "") -> DiscField:
    """Coerce attenuations and integrands given as scalars or evaluators to a DiscField on grid."""
    if f is None:
        return DiscField.zeros(grid, name or "0")
    if isinstance(f, DiscField):
        if f.grid != grid:
            if f.analytic is None:
                raise ValueError(f"Cannot move grid-backed field '{f.name}' to {grid}")
            return DiscField.from_analytic(grid, f.analytic, f.name)
        return f
    if isinstance(f, AnalyticFunction):
        return DiscField.from_analytic(grid, f, name)
    if isinstance(f, numbers.Number):
        return DiscField.constant(grid, f, name)
    raise ValueError(f"Unsupported disc field type: {type(f).__name__}")


# ---------------------------------------------------------------------------
# Circle bundle
# ---------------------------------------------------------------------------

def theta_nodes(n_theta: int) -> np.ndarray:
    return TWO_PI * np.arange(n_theta) / n_theta


@dataclass(frozen=True, eq=False)
class FiberField:
    """u(x, theta) = sum_{|k| <= K} u_k(x) e^{ik theta}."""

    grid: PolarGrid
    coeffs: np.ndarray
    analytic: Mapping[int, AnalyticFunction] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim != 3 or c.shape[0] % 2 == 0 or c.shape[1:] != (self.grid.n_rho, self.grid.n_beta):
            raise ValueError(f"FiberField coefficients have shape {c.shape}, expected "
                             f"(2K+1, {self.grid.n_rho}, {self.grid.n_beta})")
        K = (c.shape[0] - 1) // 2
        bad = [k for k in self.analytic if abs(k) > K]
        if bad:
            raise ValueError(f"Analytic modes {bad} outside [-{K}, {K}]")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "analytic", dict(self.analytic))

    @property
    def K(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    # --- constructors ---

    @classmethod
    def zeros(cls, grid: PolarGrid, K: int, name: str = "0") -> "FiberField":
        return cls(grid, np.zeros((2 * K + 1, grid.n_rho, grid.n_beta), dtype=np.complex128), {}, name)

    @classmethod
    def from_modes(cls, grid: PolarGrid, K: int,
                   modes: Mapping[int, Union[DiscField, AnalyticFunction]],
                   name: str = "") -> "FiberField":
        coeffs = np.zeros((2 * K + 1, grid.n_rho, grid.n_beta), dtype=np.complex128)
        analytic: dict[int, AnalyticFunction] = {}
        for k, mode in modes.items():
            if abs(k) > K:
                raise ValueError(f"Mode {k} outside [-{K}, {K}]")
            mode = as_disc_field(mode, grid)
            coeffs[k + K] += mode.values
            if mode.analytic is not None:
                analytic[k] = mode.analytic if k not in analytic else analytic[k] + mode.analytic
        return cls(grid, coeffs, analytic, name)

    @classmethod
    def from_samples(cls, grid: PolarGrid, samples: np.ndarray, K: int, name: str = "") -> "FiberField":
        """Harmonic projection of samples at theta_m = 2 pi m / n_theta, shape (n_theta, n_rho, n_beta)."""
        samples = np.asarray(samples)
        n_theta = samples.shape[0]
        if n_theta < 2 * K + 1:
            raise ValueError(f"{n_theta} angular samples cannot resolve K={K} (need >= {2 * K + 1})")
        spectrum = np.fft.fft(samples, axis=0) / n_theta
        ks = np.arange(-K, K + 1)
        return cls(grid, spectrum[ks % n_theta], {}, name)

    @classmethod
    def from_function(cls, grid: PolarGrid, fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                      K: int, n_theta: Optional[int] = None, name: str = "") -> "FiberField":
        n_theta = n_theta or 4 * K + 4
        th = theta_nodes(n_theta)
        samples = np.stack([np.broadcast_to(fn(grid.z, t), grid.z.shape) for t in th])
        return cls.from_samples(grid, samples, K, name)

    # --- access ---

    def _index(self, k: int) -> int:
        if abs(k) > self.K:
            raise ValueError(f"Harmonic index {k} outside [-{self.K}, {self.K}]")
        return k + self.K

    def mode(self, k: int) -> DiscField:
        return DiscField(self.grid, self.coeffs[self._index(k)], f"{self.name}[{k}]",
                         self.analytic.get(k))

    def active_modes(self) -> list[int]:
        return [k for k in range(-self.K, self.K + 1)
                if k in self.analytic or np.any(self.coeffs[k + self.K] != 0)]

    def order(self) -> int:
        active = self.active_modes()
        return max((abs(k) for k in active), default=0)

    def samples(self, n_theta: int) -> np.ndarray:
        """Values at theta_m = 2 pi m / n_theta, shape (n_theta, n_rho, n_beta)."""
        if n_theta < 2 * self.K + 1:
            raise ValueError(f"{n_theta} angular samples cannot hold K={self.K}")
        spectrum = np.zeros((n_theta,) + self.coeffs.shape[1:], dtype=np.complex128)
        ks = np.arange(-self.K, self.K + 1)
        spectrum[ks % n_theta] = self.coeffs
        return np.fft.ifft(spectrum, axis=0) * n_theta

    def __call__(self, z, theta) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        theta = np.broadcast_to(np.asarray(theta, dtype=float), z.shape)
        fields = self._active_fields
        out = np.zeros(z.shape, dtype=np.complex128)
        if not fields:
            return out
        top = max(abs(k) for k in fields)
        # e^{ik theta} for k = 0..top by repeated multiplication
        phase = np.exp(1j * theta)
        powers = [np.ones(z.shape, dtype=np.complex128)]
        for _ in range(top):
            powers.append(powers[-1] * phase)
        for k, fk in fields.items():
            out += fk(z) * (powers[k] if k >= 0 else np.conj(powers[-k]))
        return out

    @cached_property
    def _active_fields(self) -> dict[int, DiscField]:
        # one DiscField per mode so that off-grid splines are built once
        return {k: self.mode(k) for k in self.active_modes()}

    # --- reshaping ---

    def with_K(self, K: int) -> "FiberField":
        if K == self.K:
            return self
        out = np.zeros((2 * K + 1,) + self.coeffs.shape[1:], dtype=np.complex128)
        m = min(K, self.K)
        out[K - m:K + m + 1] = self.coeffs[self.K - m:self.K + m + 1]
        analytic = {k: f for k, f in self.analytic.items() if abs(k) <= K}
        return FiberField(self.grid, out, analytic, self.name)

    def truncate(self, m: int) -> "FiberField":
        """Keep modes |k| <= m (same K)."""
        return self.select(lambda k: abs(k) <= m)

    def select(self, keep: Callable[[int], bool]) -> "FiberField":
        out = self.coeffs.copy()
        for k in range(-self.K, self.K + 1):
            if not keep(k):
                out[k + self.K] = 0.0
        analytic = {k: f for k, f in self.analytic.items() if keep(k)}
        return FiberField(self.grid, out, analytic, self.name)

    def with_name(self, name: str) -> "FiberField":
        return FiberField(self.grid, self.coeffs, self.analytic, name)

    # --- arithmetic ---

    def _merged_analytic(self, other: "FiberField", sign: float) -> dict[int, AnalyticFunction]:
        act_a, act_b = set(self.active_modes()), set(other.active_modes())
        out = {}
        for k in act_a | act_b:
            fa = self.analytic.get(k)
            fb = other.analytic.get(k)
            if (k in act_a and fa is None) or (k in act_b and fb is None):
                continue
            if fa is None:
                out[k] = fb * sign
            elif fb is None:
                out[k] = fa
            else:
                out[k] = fa + fb * sign
        return out

    def _aligned(self, other: "FiberField") -> tuple["FiberField", "FiberField"]:
        if other.grid != self.grid:
            raise ValueError(f"Grid mismatch: {self.grid} vs {other.grid}")
        K = max(self.K, other.K)
        return self.with_K(K), other.with_K(K)

    def __add__(self, other):
        if not isinstance(other, FiberField):
            return NotImplemented
        a, b = self._aligned(other)
        return FiberField(a.grid, a.coeffs + b.coeffs, a._merged_analytic(b, 1.0), a.name)

    def __sub__(self, other):
        if not isinstance(other, FiberField):
            return NotImplemented
        a, b = self._aligned(other)
        return FiberField(a.grid, a.coeffs - b.coeffs, a._merged_analytic(b, -1.0), a.name)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            c = complex(other)
            return FiberField(self.grid, self.coeffs * c,
                              {k: f * c for k, f in self.analytic.items()}, self.name)
        if isinstance(other, DiscField):
            return self.multiply(other)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    def multiply(self, f: DiscField) -> "FiberField":
        """Pointwise product with a function of x only."""
        if f.grid != self.grid:
            raise ValueError(f"Grid mismatch: {self.grid} vs {f.grid}")
        analytic = {}
        if f.analytic is not None:
            for k in self.active_modes():
                if k in self.analytic:
                    analytic[k] = self.analytic[k] * f.analytic
                else:
                    analytic = {}
                    break
        return FiberField(self.grid, self.coeffs * f.values[None], analytic, self.name)

    def conj(self) -> "FiberField":
        return FiberField(self.grid, np.conj(self.coeffs[::-1]),
                          {-k: f.conj() for k, f in self.analytic.items()}, f"conj({self.name})")

    # --- norms ---

    def norm(self, radius: Optional[float] = None) -> float:
        return parseval_norm(self, radius=radius)

    def inner(self, other: "FiberField") -> complex:
        a, b = self._aligned(other)
        w = a.grid.weights
        return complex(TWO_PI * np.sum(a.coeffs * np.conj(b.coeffs) * w[None]))


# ---------------------------------------------------------------------------
# Boundary torus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryGrid:
    """Aligned fan-beam grid: beta_j = 2 pi j / N_beta, alpha_l = -pi + (l + 1/2) 2 pi / N_alpha."""

    n_beta: int = 256
    n_alpha: int = 256

    def __post_init__(self):
        if self.n_alpha < 12 or self.n_alpha % 4:
            raise ValueError(f"n_alpha must be a multiple of 4 and at least 12, got {self.n_alpha}")
        if self.n_beta % 2 or self.n_beta % self.n_alpha:
            raise ValueError(f"Misaligned boundary grid: n_beta={self.n_beta} must be an even "
                             f"multiple of n_alpha={self.n_alpha} for exact scattering maps")

    @property
    def d_beta(self) -> float:
        return TWO_PI / self.n_beta

    @property
    def d_alpha(self) -> float:
        return TWO_PI / self.n_alpha

    @cached_property
    def beta(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_beta) / self.n_beta

    @cached_property
    def alpha(self) -> np.ndarray:
        return -np.pi + (np.arange(self.n_alpha) + 0.5) * self.d_alpha

    @property
    def plus_slice(self) -> slice:
        return slice(self.n_alpha // 4, 3 * self.n_alpha // 4)

    @cached_property
    def plus_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_alpha, dtype=bool)
        mask[self.plus_slice] = True
        return mask

    @cached_property
    def alpha_plus(self) -> np.ndarray:
        return self.alpha[self.plus_slice]

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(BETA, ALPHA), each of shape (n_beta, n_alpha)."""
        return np.meshgrid(self.beta, self.alpha, indexing="ij")

    @cached_property
    def frequencies(self) -> tuple[np.ndarray, np.ndarray]:
        return fft_frequencies(self.n_beta), fft_frequencies(self.n_alpha)

    def scattering_index(self, which: str) -> tuple[np.ndarray, np.ndarray]:
        """Index maps (j', l') of S or S_A applied to every node (j, l)."""
        return self._scattering_maps[which]

    @cached_property
    def _scattering_maps(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        j = np.arange(self.n_beta)[:, None]
        l = np.arange(self.n_alpha)[None, :]
        ratio = self.n_beta // self.n_alpha
        jj = np.mod(j - self.n_beta // 2 + (2 * l + 1) * ratio, self.n_beta)
        l_s = np.mod(self.n_alpha // 2 - l - 1, self.n_alpha)
        l_a = self.n_alpha - l - 1
        shape = (self.n_beta, self.n_alpha)
        return {
            "S": (np.broadcast_to(jj, shape), np.broadcast_to(l_s, shape)),
            "SA": (np.broadcast_to(jj, shape), np.broadcast_to(l_a, shape)),
        }

    def pullback(self, samples: np.ndarray, which: str) -> np.ndarray:
        """(F o S)(node) or (F o S_A)(node) for torus samples F."""
        if which not in ("S", "SA"):
            raise ValueError(f"Unknown scattering relation {which!r} (expected 'S' or 'SA')")
        jj, ll = self.scattering_index(which)
        return samples[jj, ll]


@dataclass(frozen=True, eq=False)
class BoundaryField:
    """Function on dSM sampled on an aligned torus grid; data on d+SM vanish on d-SM."""

    grid: BoundaryGrid
    samples: np.ndarray
    name: str = ""
    evaluator: Optional[BoundaryEvaluator] = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        expected = (self.grid.n_beta, self.grid.n_alpha)
        if s.shape != expected:
            raise ValueError(f"BoundaryField samples have shape {s.shape}, expected {expected}")
        object.__setattr__(self, "samples", s)

    # --- constructors ---

    @classmethod
    def from_function(cls, grid: BoundaryGrid, fn: BoundaryEvaluator, name: str = "",
                      plus_only: bool = False) -> "BoundaryField":
        B, A = grid.mesh
        s = np.broadcast_to(np.asarray(fn(B, A), dtype=np.complex128), B.shape).copy()
        if plus_only:
            s[:, ~grid.plus_mask] = 0.0
        return cls(grid, s, name, fn)

    @classmethod
    def zeros(cls, grid: BoundaryGrid, name: str = "0") -> "BoundaryField":
        return cls(grid, np.zeros((grid.n_beta, grid.n_alpha), dtype=np.complex128), name,
                   lambda b, a: np.zeros(np.broadcast(b, a).shape, dtype=np.complex128))

    @classmethod
    def from_coefficients(cls, grid: BoundaryGrid, coeffs: np.ndarray, name: str = "") -> "BoundaryField":
        """Inverse of coefficients(); coeffs indexed p in [-P, P] (axis 0), n in [-N, N] (axis 1)."""
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        P, N = (coeffs.shape[0] - 1) // 2, (coeffs.shape[1] - 1) // 2
        if 2 * P + 1 > grid.n_beta or 2 * N + 1 > grid.n_alpha:
            raise ValueError(f"Coefficient block {coeffs.shape} exceeds grid {grid}")
        full = np.zeros((grid.n_beta, grid.n_alpha), dtype=np.complex128)
        ps = np.arange(-P, P + 1) % grid.n_beta
        ns = np.arange(-N, N + 1)
        phase = np.exp(1j * ns * grid.alpha[0])
        full[np.ix_(ps, ns % grid.n_alpha)] = coeffs * phase[None, :]
        samples = np.fft.ifft2(full) * grid.n_beta * grid.n_alpha
        return cls(grid, samples, name)

    def with_name(self, name: str) -> "BoundaryField":
        return BoundaryField(self.grid, self.samples, name, self.evaluator)

    # --- spectral view ---

    def coefficients(self, P: Optional[int] = None, N: Optional[int] = None) -> np.ndarray:
        """b[p, n] of sum b_{p,n} e^{i(p beta + n alpha)}, p in [-P, P], n in [-N, N]."""
        g = self.grid
        P = g.n_beta // 2 - 1 if P is None else P
        N = g.n_alpha // 2 - 1 if N is None else N
        if P > g.n_beta // 2 - 1 or N > g.n_alpha // 2 - 1:
            raise ValueError(f"Cutoffs P={P}, N={N} exceed grid {g}")
        F = np.fft.fft2(self.samples) / (g.n_beta * g.n_alpha)
        ps = np.arange(-P, P + 1) % g.n_beta
        ns = np.arange(-N, N + 1)
        phase = np.exp(-1j * ns * g.alpha[0])
        return F[np.ix_(ps, ns % g.n_alpha)] * phase[None, :]

    # --- restriction to d+SM ---

    @property
    def plus_samples(self) -> np.ndarray:
        return self.samples[:, self.grid.plus_slice]

    def restrict_plus(self) -> "BoundaryField":
        s = self.samples.copy()
        s[:, ~self.grid.plus_mask] = 0.0
        return BoundaryField(self.grid, s, self.name, self._plus_evaluator())

    def _plus_evaluator(self) -> Optional[BoundaryEvaluator]:
        if self.evaluator is None:
            return None
        fn = self.evaluator

        def restricted(beta, alpha):
            return np.where(np.cos(alpha) >= 0, fn(beta, alpha), 0.0)

        return restricted

    def pullback(self, which: str) -> "BoundaryField":
        return BoundaryField(self.grid, self.grid.pullback(self.samples, which),
                             f"{self.name}o{which}")

    # --- evaluation on d+SM ---

    @cached_property
    def _plus_spline(self):
        g = self.grid
        # splines run over (alpha, beta): alpha is the clamped axis, beta the periodic one
        return _periodic_spline(g.alpha_plus, g.beta, self.plus_samples.T,
                                (-np.pi / 2.0, np.pi / 2.0))

    def evaluate(self, beta, alpha) -> np.ndarray:
        """Values at arbitrary points of d+SM (exact when an evaluator is attached)."""
        beta = np.asarray(beta, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        shape = np.broadcast(beta, alpha).shape
        if self.evaluator is not None:
            return np.broadcast_to(self.evaluator(beta, alpha), shape).astype(np.complex128)
        b = np.broadcast_to(np.mod(beta, TWO_PI), shape).ravel()
        a = np.broadcast_to(np.clip(np.mod(alpha + np.pi, TWO_PI) - np.pi, -np.pi / 2, np.pi / 2),
                            shape).ravel()
        re, im = self._plus_spline
        return (re.ev(a, b) + 1j * im.ev(a, b)).reshape(shape)

    # --- inner products ---

    def inner_plus(self, other: "BoundaryField") -> complex:
        """<u, v> over d+SM with measure d beta d alpha."""
        s = self.grid.d_beta * self.grid.d_alpha
        return complex(np.sum(self.plus_samples * np.conj(other.plus_samples)) * s)

    def norm_plus(self) -> float:
        s = self.grid.d_beta * self.grid.d_alpha
        return float(np.sqrt(np.sum(np.abs(self.plus_samples) ** 2) * s))

    def norm(self) -> float:
        s = self.grid.d_beta * self.grid.d_alpha
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * s))

    # --- arithmetic ---

    def _binary(self, other, op) -> "BoundaryField":
        if isinstance(other, numbers.Number):
            c = complex(other)
            fn = None if self.evaluator is None else (lambda b, a, f=self.evaluator: op(f(b, a), c))
            return BoundaryField(self.grid, op(self.samples, c), self.name, fn)
        if not isinstance(other, BoundaryField):
            return NotImplemented
        if other.grid != self.grid:
            raise ValueError(f"Boundary grid mismatch: {self.grid} vs {other.grid}")
        fn = None
        if self.evaluator is not None and other.evaluator is not None:
            f, g = self.evaluator, other.evaluator
            fn = lambda b, a: op(f(b, a), g(b, a))  # noqa: E731
        return BoundaryField(self.grid, op(self.samples, other.samples), self.name, fn)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    def conj(self) -> "BoundaryField":
        fn = None
        if self.evaluator is not None:
            f = self.evaluator
            fn = lambda b, a: np.conj(f(b, a))  # noqa: E731
        return BoundaryField(self.grid, np.conj(self.samples), f"conj({self.name})", fn)

    def map(self, fn: Callable[[np.ndarray], np.ndarray], name: str = "") -> "BoundaryField":
        """Pointwise fn(samples), e.g. np.exp; the evaluator is composed when present."""
        ev = None
        if self.evaluator is not None:
            f = self.evaluator
            ev = lambda b, a: fn(f(b, a))  # noqa: E731
        return BoundaryField(self.grid, fn(self.samples), name or self.name, ev)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def harmonic_project(u: FiberField, k: int) -> DiscField:
    return u.mode(k)


def fiber_average(u: FiberField) -> DiscField:
    return u.mode(0)


def _parity_keep(freqs: np.ndarray, parity: str) -> np.ndarray:
    if parity == "all":
        return np.ones(freqs.shape, dtype=bool)
    if parity == "even":
        return freqs % 2 == 0
    if parity == "odd":
        return freqs % 2 != 0
    raise ValueError(f"Unknown parity {parity!r} (expected 'all', 'even' or 'odd')")


def fiber_hilbert(u, parity: str = "all"):
    """Fiberwise Hilbert transform: degree-k content times -i sgn(k); parity drops the other degrees."""
    if isinstance(u, FiberField):
        ks = np.arange(-u.K, u.K + 1)
        mult = -1j * np.sign(ks) * _parity_keep(ks, parity)
        analytic = {k: f * complex(mult[k + u.K]) for k, f in u.analytic.items() if mult[k + u.K] != 0}
        return FiberField(u.grid, u.coeffs * mult[:, None, None], analytic, f"H({u.name})")
    if isinstance(u, BoundaryField):
        n = fft_frequencies(u.grid.n_alpha)
        mult = -1j * np.sign(n) * _parity_keep(n, parity) * nyquist_mask(u.grid.n_alpha)
        out = np.fft.ifft(np.fft.fft(u.samples, axis=1) * mult[None, :], axis=1)
        return BoundaryField(u.grid, out, f"H({u.name})")
    raise ValueError(f"fiber_hilbert expects a FiberField or BoundaryField, got {type(u).__name__}")


def holomorphic_projection(u: FiberField) -> FiberField:
    """(Id + iH) u: doubles positive degrees, keeps degree 0, drops negative degrees."""
    return u + fiber_hilbert(u) * 1j


def parseval_norm(u: FiberField, kappa: Optional[float] = None, radius: Optional[float] = None) -> float:
    """||u||^2 = 2 pi sum_k ||u_k||_M^2, optionally weighted by kappa^|k|."""
    w = u.grid.weights * u.grid.mask(radius)
    per_mode = np.sum(np.abs(u.coeffs) ** 2 * w[None], axis=(1, 2))
    if kappa is not None:
        per_mode = per_mode * float(kappa) ** np.abs(np.arange(-u.K, u.K + 1))
    return float(np.sqrt(TWO_PI * per_mode.sum()))


def boundary_trace(u: FiberField, bgrid: BoundaryGrid) -> BoundaryField:
    """Samples u at (x(beta), theta = beta + pi + alpha) on the full torus grid."""
    grid = u.grid
    B, A = bgrid.mesh
    theta = B + np.pi + A
    ring_z = np.exp(1j * bgrid.beta)
    samples = np.zeros(B.shape, dtype=np.complex128)
    active = u.active_modes()
    for k in active:
        if k in u.analytic:
            ring = u.analytic[k](ring_z)
        else:
            ring = resample_periodic(u.coeffs[k + u.K, -1], bgrid.n_beta)
        samples += ring[:, None] * np.exp(1j * k * theta)

    evaluator = None
    if all(k in u.analytic for k in active):
        modes = {k: u.analytic[k] for k in active}

        def evaluator(beta, alpha):
            th = beta + np.pi + alpha
            zb = np.exp(1j * np.asarray(beta))
            out = np.zeros(np.broadcast(beta, alpha).shape, dtype=np.complex128)
            for k, fk in modes.items():
                out += fk(zb) * np.exp(1j * k * th)
            return out

    logger.debug("Boundary trace of '%s' on %dx%d torus (%d modes, grid %s)",
                 u.name, bgrid.n_beta, bgrid.n_alpha, len(active), grid)
    return BoundaryField(bgrid, samples, f"trace({u.name})", evaluator)


def extend_by_zero(data: Union[BoundaryField, np.ndarray], bgrid: Optional[BoundaryGrid] = None) -> BoundaryField:
    """d+SM data as a torus field vanishing on d-SM; accepts a BoundaryField or (N_beta, N_alpha/2) samples."""
    if isinstance(data, BoundaryField):
        return data.restrict_plus()
    if bgrid is None:
        raise ValueError("extend_by_zero needs a BoundaryGrid for raw samples")
    data = np.asarray(data, dtype=np.complex128)
    expected = (bgrid.n_beta, bgrid.n_alpha // 2)
    if data.shape != expected:
        raise ValueError(f"d+SM samples have shape {data.shape}, expected {expected}")
    s = np.zeros((bgrid.n_beta, bgrid.n_alpha), dtype=np.complex128)
    s[:, bgrid.plus_slice] = data
    return BoundaryField(bgrid, s)


def sup_norm(a, grid: Optional[PolarGrid] = None, refine: int = 4) -> float:
    """max |a| over a polar mesh `refine` times finer than grid; sample maxima underestimate sup |a|."""
    if a is None:
        return 0.0
    if isinstance(a, numbers.Number):
        return float(abs(a))
    if isinstance(a, DiscField):
        grid = grid or a.grid
    if grid is None:
        raise ValueError("sup_norm needs a PolarGrid for evaluators")
    r = np.linspace(0.0, 1.0, refine * grid.n_rho)
    nb = refine * grid.n_beta
    if isinstance(a, DiscField) and a.analytic is None:
        vals = a.resample(r, nb)
    else:
        b = TWO_PI * np.arange(nb) / nb
        vals = np.asarray(a(r[:, None] * np.exp(1j * b)[None, :]))
    return float(np.abs(vals).max())
