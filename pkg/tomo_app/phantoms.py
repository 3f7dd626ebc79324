"""
Synthetic integrands and attenuations.

Every phantom is built from AnalyticFunctions so that X, X_perp and the ray transforms see exact
derivatives; random kinds draw their coefficients from a seeded generator.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from att_tomo.analytic import AnalyticFunction, constant, gaussian, polynomial, vanishing_on_boundary
from att_tomo.complex_calculus import x_perp_scalar
from att_tomo.config.settings import ATTENUATION_KINDS, PHANTOM_KINDS, ExperimentConfig
from att_tomo.fields import DiscField, FiberField, PolarGrid
from att_tomo.gauge import GaugeRepresentative

logger = logging.getLogger("att_tomo")


@dataclass(frozen=True)
class PhantomSpec:
    kind: str = "gaussian_bump"
    m: int = 0
    seed: int = 7
    center: complex = 0.3 + 0j
    sigma: float = 0.2
    k: int = 2
    l: int = 0
    attenuation: str = "none"
    a_amplitude: complex = 0j
    a_offset: complex = 0j
    a_center: complex = 0j
    a_sigma: float = 0.5

    def __post_init__(self):
        if self.kind not in PHANTOM_KINDS:
            raise ValueError(f"Unknown phantom kind {self.kind!r} (expected one of {PHANTOM_KINDS})")
        if self.attenuation not in ATTENUATION_KINDS:
            raise ValueError(f"Unknown attenuation {self.attenuation!r} (expected one of {ATTENUATION_KINDS})")
        if self.m < 0:
            raise ValueError(f"Phantom order must be non-negative, got {self.m}")
        if self.sigma <= 0 or self.a_sigma <= 0:
            raise ValueError(f"Bump widths must be positive, got sigma={self.sigma}, a_sigma={self.a_sigma}")

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "PhantomSpec":
        return cls(config.phantom, config.m, config.seed, config.center, config.sigma, config.k, 0,
                   config.attenuation, config.a_amplitude, config.a_offset, config.a_center, config.a_sigma)


@dataclass(frozen=True, eq=False)
class Phantom:
    spec: PhantomSpec
    f: FiberField
    a: Optional[DiscField]
    truth: Optional[GaugeRepresentative] = None     # known gauge representative, when there is one
    parts: dict[str, DiscField] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.spec.m


# --- building blocks ---

def make_attenuation(spec: PhantomSpec) -> Optional[AnalyticFunction]:
    if spec.attenuation == "none":
        return None
    if spec.attenuation == "constant":
        return constant(spec.a_amplitude)
    return gaussian(spec.a_center, spec.a_sigma, spec.a_amplitude) + complex(spec.a_offset)


def zernike(n: int, l: int) -> AnalyticFunction:
    """R_n^|l|(r) e^{il phi} written as a polynomial in z and conj(z)."""
    if n < 0 or abs(l) > n or (n - abs(l)) % 2:
        raise ValueError(f"Zernike indices need |l| <= n and n - |l| even, got n={n}, l={l}")
    la = abs(l)
    terms = {}
    for s in range((n - la) // 2 + 1):
        c = ((-1) ** s * math.factorial(n - s)
             / (math.factorial(s) * math.factorial((n + la) // 2 - s) * math.factorial((n - la) // 2 - s)))
        power = n - 2 * s
        p, q = (power + l) // 2, (power - l) // 2
        terms[(p, q)] = terms.get((p, q), 0.0) + c
    return polynomial(terms)


def _random_polynomial(rng: np.random.Generator, degree: int = 3) -> AnalyticFunction:
    terms = {}
    for p in range(degree + 1):
        for q in range(degree + 1 - p):
            terms[(p, q)] = complex(rng.normal(), rng.normal()) / (1.0 + p + q)
    return polynomial(terms)


def _holo(rng: np.random.Generator, degree: int, anti: bool) -> AnalyticFunction:
    coeffs = [complex(rng.normal(), rng.normal()) * 0.5 / (1.0 + j) for j in range(degree + 1)]
    return polynomial({((0, j) if anti else (j, 0)): c for j, c in enumerate(coeffs)})


def _fiber(grid: PolarGrid, K: int, modes: dict[int, AnalyticFunction], name: str) -> FiberField:
    return FiberField.from_modes(grid, K, {k: DiscField.from_analytic(grid, fn) for k, fn in modes.items()}, name)


# --- phantom kinds ---

def _gauge_mix(spec: PhantomSpec, grid: PolarGrid, K: int) -> tuple[FiberField, GaugeRepresentative]:
    rng = np.random.default_rng(spec.seed)
    g0 = DiscField.from_analytic(grid, gaussian(spec.center, spec.sigma), "g0")
    gs = DiscField.from_analytic(grid, vanishing_on_boundary(gaussian(-0.2 + 0.25j, 0.3, 0.8)), "gs")
    gk = {}
    for k in range(1, spec.m + 1):
        gk[k] = (DiscField.from_analytic(grid, _holo(rng, 2, False), f"g{k}+"),
                 DiscField.from_analytic(grid, _holo(rng, 2, True), f"g{k}-"))
    truth = GaugeRepresentative(g0, gs, gk, spec.m, "g_true")
    return truth.fiber_field(K).with_name(f"gauge_mix(m={spec.m})"), truth


def phantom_make(spec: PhantomSpec, grid: PolarGrid, K: int) -> Phantom:
    """(f, a) for spec on grid; K bounds the stored fiber harmonics."""
    if spec.m > K:
        raise ValueError(f"Phantom order {spec.m} exceeds the harmonic cutoff K={K}")
    a_fn = make_attenuation(spec)
    a = None if a_fn is None else DiscField.from_analytic(grid, a_fn, "a")
    truth = None
    parts: dict[str, DiscField] = {}

    if spec.kind == "zero":
        f = FiberField.zeros(grid, K, "0")
        truth = GaugeRepresentative.zeros(grid, spec.m)
    elif spec.kind == "gaussian_bump":
        if spec.m != 0:
            raise ValueError(f"gaussian_bump is a degree-0 phantom, got m={spec.m}")
        f = _fiber(grid, K, {0: gaussian(spec.center, spec.sigma)}, "bump")
    elif spec.kind == "poly_zk":
        f = _fiber(grid, K, {spec.m: polynomial({(spec.k, 0): 1.0})}, f"e^{{i{spec.m}theta}} z^{spec.k}")
    elif spec.kind == "zernike":
        f = _fiber(grid, K, {spec.m: zernike(spec.k, spec.l)}, f"zernike({spec.k},{spec.l})")
    elif spec.kind == "tensor_mix":
        rng = np.random.default_rng(spec.seed)
        modes = {j: _random_polynomial(rng) for j in range(-spec.m, spec.m + 1)}
        f = _fiber(grid, K, modes, f"tensor_mix(m={spec.m}, seed={spec.seed})")
    elif spec.kind == "gauge_mix":
        f, truth = _gauge_mix(spec, grid, K)
    elif spec.kind == "kernel":
        h = vanishing_on_boundary(gaussian(spec.center, spec.sigma))
        modes = {1: h.wirtinger("del"), -1: h.wirtinger("dbar")}
        if a_fn is not None:
            modes[0] = a_fn * h
        f = _fiber(grid, max(K, 1), modes, "Xh+ah")
        parts["h"] = DiscField.from_analytic(grid, h, "h")
        truth = GaugeRepresentative.zeros(grid, 1)
    else:  # doppler
        pot = DiscField.from_analytic(grid, vanishing_on_boundary(gaussian(spec.center, spec.sigma)), "f")
        sol = DiscField.from_analytic(grid, vanishing_on_boundary(gaussian(-0.25 - 0.1j, 0.3, 0.7)), "g")
        potential = _fiber(grid, max(K, 1), {1: pot.analytic.wirtinger("del"), -1: pot.analytic.wirtinger("dbar")}, "Xf")
        f = (potential + x_perp_scalar(sol, max(K, 1))).with_name("V=Xf+Xperp g")
        parts.update({"f": pot, "g": sol})
        minus_af = DiscField.zeros(grid, "-af") if a is None else (a * pot * -1.0).with_name("-af")
        truth = GaugeRepresentative(minus_af, sol, {}, 0, "g_true")

    logger.debug("phantom_make(%s): order %d, ||f||=%.3e, attenuation %s", spec.kind, spec.m, f.norm(),
                 spec.attenuation)
    return Phantom(spec, f, a, truth, parts)
