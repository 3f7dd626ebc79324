"""
Gauge representatives of the attenuated transform.

For f of order m and an attenuation a, gauge_reduce returns g = g0 + X_perp gs + sum_k g_k with
I_a g = I_a f, gs vanishing on the circle and g_k = e^{ik theta} g_{k,+} + e^{-ik theta} g_{k,-},
dbar g_{k,+} = 0 = d g_{k,-}. The top degree is peeled with the elliptic splits

    f_k = X v_{k-1} + w_{k-2} + g_k,     w_{k-2,+} = -dbar v_{k-1,+},  w_{k-2,-} = -d v_{k-1,-}

and -a v_{k-1} is pushed down one degree, until only degrees 0 and 1 remain.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .complex_calculus import elliptic_split, poincare_constant, wirtinger, x_perp_scalar
from .fields import DiscField, FiberField, PolarGrid, as_disc_field, parseval_norm, sup_norm
from .utils.conversions import TWO_PI

logger = logging.getLogger("att_tomo")

STABILITY_SLACK = 0.02


def _sm_norm2(*parts: DiscField) -> float:
    """||sum_j e^{ik_j theta} parts_j||^2_{L2(SM)} for distinct degrees k_j."""
    return TWO_PI * sum(p.norm() ** 2 for p in parts)


# ---------------------------------------------------------------------------
# Representatives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReductionStage:
    """Norms recorded while peeling degree k (all in L2(SM))."""

    k: int
    f_norm: float
    v_norm: float
    w_norm: float
    g_norm: float
    split_residual: float

    @property
    def poincare_ratio(self) -> float:
        """||v_{k-1}||^2 / (4 C_P ||f_k||^2), at most 1."""
        denom = 4.0 * poincare_constant() * self.f_norm**2
        return self.v_norm**2 / denom if denom > 0 else 0.0


@dataclass(frozen=True, eq=False)
class GaugeRepresentative:
    g0: DiscField
    gs: DiscField
    gk: dict[int, tuple[DiscField, DiscField]]
    m: int
    name: str = "g"
    stages: tuple[ReductionStage, ...] = field(default_factory=tuple)

    @classmethod
    def zeros(cls, grid: PolarGrid, m: int = 0, name: str = "0") -> "GaugeRepresentative":
        z = DiscField.zeros(grid)
        return cls(z, z, {k: (z, z) for k in range(1, m + 1)}, m, name)

    @property
    def grid(self) -> PolarGrid:
        return self.g0.grid

    def component(self, key: str) -> DiscField:
        """'g0', 'gs', or 'g{k}+' / 'g{k}-'."""
        if key == "g0":
            return self.g0
        if key == "gs":
            return self.gs
        if key.startswith("g") and key[-1] in "+-":
            k = int(key[1:-1])
            if k not in self.gk:
                raise ValueError(f"Representative of order {self.m} has no degree {k}")
            return self.gk[k][0 if key[-1] == "+" else 1]
        raise ValueError(f"Unknown component {key!r}")

    def component_names(self) -> list[str]:
        names = ["g0", "gs"]
        for k in sorted(self.gk):
            names += [f"g{k}+", f"g{k}-"]
        return names

    def fiber_field(self, K: Optional[int] = None) -> FiberField:
        """Reassembled g0 + X_perp gs + sum_k g_k."""
        K = max(K or 1, self.m, 1)
        modes: dict[int, DiscField] = {0: self.g0}
        for k, (plus, minus) in self.gk.items():
            modes[k] = plus
            modes[-k] = minus
        g = FiberField.from_modes(self.grid, K, modes, self.name)
        return (g + x_perp_scalar(self.gs, K)).with_name(self.name)

    def norm(self) -> float:
        return self.fiber_field().norm()

    def solenoidal_residuals(self) -> dict[int, tuple[float, float]]:
        """(||dbar g_{k,+}||, ||d g_{k,-}||) per degree."""
        return {k: (wirtinger(p, "dbar").norm(), wirtinger(q, "del").norm()) for k, (p, q) in self.gk.items()}

    def gs_boundary_max(self) -> float:
        return float(np.abs(self.gs.ring).max())

    def relative_errors(self, truth: "GaugeRepresentative", radius: Optional[float] = None) -> dict[str, float]:
        """||self_c - truth_c|| / ||truth_c|| per component (absolute error where truth_c = 0)."""
        out = {}
        for key in truth.component_names():
            want = truth.component(key)
            try:
                got = self.component(key)
            except ValueError:
                got = DiscField.zeros(self.grid)
            err = (got - want).norm(radius)
            scale = want.norm(radius)
            out[key] = err / scale if scale > 0 else err
        return out

    def __sub__(self, other: "GaugeRepresentative") -> "GaugeRepresentative":
        m = max(self.m, other.m)
        z = DiscField.zeros(self.grid)
        gk = {}
        for k in range(1, m + 1):
            a = self.gk.get(k, (z, z))
            b = other.gk.get(k, (z, z))
            gk[k] = (a[0] - b[0], a[1] - b[1])
        return GaugeRepresentative(self.g0 - other.g0, self.gs - other.gs, gk, m, f"({self.name}-{other.name})")


# ---------------------------------------------------------------------------
# Decomposition of one degree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LemmaDecomposition:
    k: int
    g_plus: DiscField
    g_minus: DiscField
    v_plus: DiscField
    v_minus: DiscField
    w_plus: DiscField     # coefficient of e^{i(k-2) theta}
    w_minus: DiscField    # coefficient of e^{-i(k-2) theta}
    residual: float

    @property
    def v_norm(self) -> float:
        return math.sqrt(_sm_norm2(self.v_plus, self.v_minus))

    @property
    def g_norm(self) -> float:
        return math.sqrt(_sm_norm2(self.g_plus, self.g_minus))

    @property
    def w_norm(self) -> float:
        if self.k == 2:
            return math.sqrt(_sm_norm2(self.w_plus + self.w_minus))
        return math.sqrt(_sm_norm2(self.w_plus, self.w_minus))


def lemma_decomp(f_plus: DiscField, f_minus: DiscField, k: int) -> LemmaDecomposition:
    """f_k = X v_{k-1} + w_{k-2} + g_k for f_k = e^{ik theta} f_plus + e^{-ik theta} f_minus, k >= 2."""
    if k < 2:
        raise ValueError(f"lemma_decomp needs degree k >= 2, got {k}")
    sp = elliptic_split(f_plus, "del")
    sm = elliptic_split(f_minus, "dbar")
    w_plus = (-wirtinger(sp.v, "dbar")).with_name(f"w{k - 2}+")
    w_minus = (-wirtinger(sm.v, "del")).with_name(f"w{k - 2}-")
    return LemmaDecomposition(
        k,
        sp.g.with_name(f"g{k}+"),
        sm.g.with_name(f"g{k}-"),
        sp.v.with_name(f"v{k - 1}+"),
        sm.v.with_name(f"v{k - 1}-"),
        w_plus,
        w_minus,
        max(sp.residual, sm.residual),
    )


# ---------------------------------------------------------------------------
# Reduction
# ---------------------------------------------------------------------------

def gauge_reduce(f: FiberField, a=None, m: Optional[int] = None) -> GaugeRepresentative:
    """Gauge representative of f for the attenuation a; m defaults to the order of f."""
    grid = f.grid
    a_field = as_disc_field(a, grid, "a")
    m = f.order() if m is None else m
    if m < 0:
        raise ValueError(f"Order m must be non-negative, got {m}")
    zero = DiscField.zeros(grid)
    modes = {k: (f.mode(k) if abs(k) <= f.K else zero) for k in range(-m, m + 1)}
    gk: dict[int, tuple[DiscField, DiscField]] = {}
    stages = []

    # --- peel degrees m..2 ---
    for k in range(m, 1, -1):
        f_norm = math.sqrt(_sm_norm2(modes[k], modes[-k]))
        dec = lemma_decomp(modes[k], modes[-k], k)
        gk[k] = (dec.g_plus, dec.g_minus)
        if k == 2:
            modes[0] = modes[0] + dec.w_plus + dec.w_minus
        else:
            modes[k - 2] = modes[k - 2] + dec.w_plus
            modes[-(k - 2)] = modes[-(k - 2)] + dec.w_minus
        modes[k - 1] = modes[k - 1] - a_field * dec.v_plus
        modes[-(k - 1)] = modes[-(k - 1)] - a_field * dec.v_minus
        del modes[k], modes[-k]
        stage = ReductionStage(k, f_norm, dec.v_norm, dec.w_norm, dec.g_norm, dec.residual)
        stages.append(stage)
        logger.debug("Gauge stage k=%d: ||f_k||=%.3e ||v||=%.3e ||w||=%.3e ||g_k||=%.3e residual %.1e",
                     k, f_norm, dec.v_norm, dec.w_norm, dec.g_norm, dec.residual)

    # --- degrees 0 and 1 ---
    if m >= 1:
        f_norm = math.sqrt(_sm_norm2(modes[1], modes[-1]))
        sp = elliptic_split(modes[1], "del")
        sm = elliptic_split(modes[-1], "dbar")
        gp = (sp.v + sm.v) * 0.5
        gs = ((sp.v - sm.v) * 0.5j).with_name("gs")
        g0 = (modes[0] - a_field * gp).with_name("g0")
        gk[1] = (sp.g.with_name("g1+"), sm.g.with_name("g1-"))
        v_norm = math.sqrt(_sm_norm2(sp.v, sm.v))
        g_norm = math.sqrt(_sm_norm2(sp.g, sm.g))
        stages.append(ReductionStage(1, f_norm, v_norm, 0.0, g_norm, max(sp.residual, sm.residual)))
    else:
        g0 = modes[0].with_name("g0")
        gs = DiscField.zeros(grid, "gs")

    rep = GaugeRepresentative(g0, gs, dict(sorted(gk.items())), m, f"g[{f.name}]", tuple(reversed(stages)))
    logger.info("gauge_reduce '%s': order %d, ||g||=%.4e", f.name, m, rep.norm())
    return rep


# ---------------------------------------------------------------------------
# Stability
# ---------------------------------------------------------------------------

def degree_norms(f: FiberField, m: Optional[int] = None) -> np.ndarray:
    """||f_p||_{L2(SM)} for p = 0..m (both signs of p together)."""
    m = f.order() if m is None else m
    out = np.zeros(m + 1)
    for p in range(m + 1):
        if p > f.K:
            continue
        parts = [f.mode(p)] if p == 0 else [f.mode(p), f.mode(-p)]
        out[p] = math.sqrt(_sm_norm2(*parts))
    return out


def stability_constant(a_inf: float) -> float:
    return 4.0 + 8.0 * a_inf**2 * poincare_constant()


@dataclass(frozen=True)
class StabilityBudget:
    C: float
    a_inf: float
    terms: tuple[float, ...]     # per-degree contributions to the right-hand side
    lhs: float                   # ||g||^2
    rhs: float
    slack: float = STABILITY_SLACK

    @property
    def violated(self) -> bool:
        return self.lhs > self.rhs * (1.0 + self.slack) + 1e-14

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else 0.0


def _budget_terms(norms: np.ndarray, a_inf: float, C: float) -> list[float]:
    m = len(norms) - 1
    sq = norms**2
    if m == 0:
        return [float(sq[0])]
    if m == 1:
        return [2.0 * sq[0], (1.0 + 4.0 * a_inf**2 * poincare_constant()) * sq[1]]
    terms = [4.0 * C**p * sq[p] for p in range(m - 1)]
    terms.append(2.0 * C ** (m - 1) * sq[m - 1])
    terms.append(C**m * sq[m])
    return terms


def stability_check(f: FiberField, g: GaugeRepresentative, a=None, refine: int = 4) -> StabilityBudget:
    """Both sides of ||g||^2 <= 4 sum_{p<m-1} C^p ||f_p||^2 + 2 C^{m-1} ||f_{m-1}||^2 + C^m ||f_m||^2."""
    a_inf = sup_norm(a, f.grid, refine) if a is not None else 0.0
    C = stability_constant(a_inf)
    terms = _budget_terms(degree_norms(f, g.m), a_inf, C)
    budget = StabilityBudget(C, a_inf, tuple(terms), g.norm() ** 2, float(sum(terms)))
    if budget.violated:
        logger.warning("Stability budget violated: ||g||^2=%.4e > rhs=%.4e (C=%.3f)", budget.lhs, budget.rhs, C)
    return budget


# ---------------------------------------------------------------------------
# Truncated sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncationSequence:
    representatives: tuple[GaugeRepresentative, ...]
    differences: tuple[float, ...]    # ||g^{(m+1)} - g^{(m)}||
    weighted_norm: float              # ||f||_C
    C: float

    @property
    def last(self) -> GaugeRepresentative:
        return self.representatives[-1]

    @property
    def bound_holds(self) -> bool:
        """||g||^2 <= 4 ||f||_C^2 for the last iterate."""
        return self.last.norm() ** 2 <= 4.0 * self.weighted_norm**2 * (1.0 + STABILITY_SLACK)


def gauge_reduce_truncated(f: FiberField, a=None, m_max: Optional[int] = None) -> TruncationSequence:
    """gauge_reduce on f^{(m)} = sum_{|k|<=m} f_k for m = 0..m_max with Cauchy differences."""
    m_max = f.K if m_max is None else min(m_max, f.K)
    a_inf = sup_norm(a, f.grid) if a is not None else 0.0
    C = stability_constant(a_inf)
    reps = []
    diffs = []
    for m in range(m_max + 1):
        rep = gauge_reduce(f.truncate(m), a, m)
        if reps:
            K = max(m, 1)
            diffs.append((rep.fiber_field(K) - reps[-1].fiber_field(K)).norm())
        reps.append(rep)
    weighted = parseval_norm(f.truncate(m_max), kappa=C)
    logger.info("Truncated gauge sequence up to m=%d: differences %s", m_max,
                ", ".join(f"{d:.2e}" for d in diffs))
    return TruncationSequence(tuple(reps), tuple(diffs), weighted, C)
