"""
Fourier algebra on d+SM.

Every operator is built compositionally from the scattering extensions A+/A-, their adjoints and the
fiberwise Hilbert transform on the torus grid (all exact index maps or FFT multipliers), and
separately through closed-form sgn tables acting on the bases

    phi_{p,q}  = e^{i(p beta + 2q alpha)} / (pi sqrt 2),   phi'_{p,q} = e^{i alpha} phi_{p,q},
    u_{p,q}  = (Id + S_A^*) phi_{p,q},   v_{p,q}  = (Id - S_A^*) phi_{p,q},   (and primed versions).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .fields import BoundaryField, BoundaryGrid, fiber_hilbert

logger = logging.getLogger("att_tomo")

_PARITY = {"all": "all", "plus": "even", "minus": "odd"}

PHI_NORM = 1.0 / (np.pi * np.sqrt(2.0))


def _hilbert_parity(parity: str) -> str:
    if parity not in _PARITY:
        raise ValueError(f"Unknown parity {parity!r} (expected 'all', 'plus' or 'minus')")
    return _PARITY[parity]


def _sign(value: int) -> int:
    if value not in (1, -1):
        raise ValueError(f"Extension sign must be +1 or -1, got {value}")
    return value


# ---------------------------------------------------------------------------
# Extensions and restrictions
# ---------------------------------------------------------------------------

def a_extend(u: BoundaryField, sign: int = 1) -> BoundaryField:
    """A+-u: u on d+SM, +-(u o S) on d-SM."""
    sign = _sign(sign)
    g = u.grid
    plus = u.restrict_plus().samples
    minus_mask = (~g.plus_mask)[None, :]
    out = plus + sign * g.pullback(plus, "S") * minus_mask
    return BoundaryField(g, out, f"A{'+' if sign > 0 else '-'}({u.name})")


def a_restrict(w: BoundaryField, sign: int = 1) -> BoundaryField:
    """A+-^* w = w +- (w o S), kept on d+SM."""
    sign = _sign(sign)
    g = w.grid
    out = (w.samples + sign * g.pullback(w.samples, "S")) * g.plus_mask[None, :]
    return BoundaryField(g, out, f"A{'+' if sign > 0 else '-'}*({w.name})")


def antipodal_pullback(u: BoundaryField) -> BoundaryField:
    """S_A^* u on d+SM (exact grid permutation)."""
    out = u.grid.pullback(u.samples, "SA") * u.grid.plus_mask[None, :]
    return BoundaryField(u.grid, out, f"SA*({u.name})")


def antipodal_mode_map(coeffs: np.ndarray) -> np.ndarray:
    """S_A^* in coefficient space: b_{p,n} -> (-1)^p b_{p, 2p - n}; entries mapped out of range are dropped."""
    coeffs = np.asarray(coeffs)
    P, N = (coeffs.shape[0] - 1) // 2, (coeffs.shape[1] - 1) // 2
    out = np.zeros_like(coeffs)
    for ip, p in enumerate(range(-P, P + 1)):
        for jn, n in enumerate(range(-N, N + 1)):
            src = 2 * p - n
            if -N <= src <= N:
                out[ip, jn] = (-1) ** (p % 2) * coeffs[ip, src + N]
    return out


# ---------------------------------------------------------------------------
# Compositional operators
# ---------------------------------------------------------------------------

def op_P(u: BoundaryField, parity: str = "all") -> BoundaryField:
    """P = A-^* H A+ (P+- with the even/odd part of H)."""
    h = _hilbert_parity(parity)
    return a_restrict(fiber_hilbert(a_extend(u, 1), h), -1).with_name(f"P[{parity}]({u.name})")


def op_C(u: BoundaryField, parity: str = "plus") -> BoundaryField:
    """C = 1/2 A-^* H A-."""
    h = _hilbert_parity(parity)
    return (a_restrict(fiber_hilbert(a_extend(u, -1), h), -1) * 0.5).with_name(f"C[{parity}]({u.name})")


def op_P_star(u: BoundaryField, parity: str = "all") -> BoundaryField:
    """P^* = -A+^* H A-."""
    h = _hilbert_parity(parity)
    return (a_restrict(fiber_hilbert(a_extend(u, -1), h), 1) * -1.0).with_name(f"P*[{parity}]({u.name})")


def op_P_dagger(u: BoundaryField, parity: str = "all") -> BoundaryField:
    """P-^dagger = P-^*/4, P+^dagger = P+^*(Id - 12 C+^2)/4, P^dagger = their sum."""
    _hilbert_parity(parity)
    out = BoundaryField.zeros(u.grid)
    if parity in ("all", "minus"):
        out = out + op_P_star(u, "minus") * 0.25
    if parity in ("all", "plus"):
        c2 = op_C(op_C(u, "plus"), "plus")
        out = out + op_P_star(u - c2 * 12.0, "plus") * 0.25
    return out.with_name(f"P+[{parity}]({u.name})")


def op_A_plus_star_H_A_plus(u: BoundaryField, parity: str = "all") -> BoundaryField:
    h = _hilbert_parity(parity)
    return a_restrict(fiber_hilbert(a_extend(u, 1), h), 1).with_name(f"A+*HA+({u.name})")


def op_A_plus_star_H_A_minus(u: BoundaryField, parity: str = "all") -> BoundaryField:
    h = _hilbert_parity(parity)
    return a_restrict(fiber_hilbert(a_extend(u, -1), h), 1).with_name(f"A+*HA-({u.name})")


def range_projector(u: BoundaryField, parity: str = "all") -> BoundaryField:
    """P P^dagger: orthogonal projection onto V_{+,0} (minus), V_{-,perp} (plus) or their sum."""
    p = {"all": "all", "plus": "plus", "minus": "minus"}[parity]
    return op_P(op_P_dagger(u, p), p)


# ---------------------------------------------------------------------------
# Bases
# ---------------------------------------------------------------------------

FAMILIES = ("phi", "phi'", "u", "v", "u'", "v'")


@dataclass(frozen=True)
class BoundaryBasisIndex:
    family: str
    p: int
    q: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"Unknown basis family {self.family!r} (expected one of {FAMILIES})")

    @property
    def primed(self) -> bool:
        return self.family.endswith("'")

    @property
    def symmetric(self) -> bool:
        return self.family in ("u", "v", "u'", "v'")

    @property
    def alpha_frequency(self) -> int:
        return 2 * self.q + (1 if self.primed else 0)

    def mirror_q(self) -> int:
        return self.p - self.q - (1 if self.primed else 0)

    @property
    def is_canonical(self) -> bool:
        if not self.symmetric:
            return True
        return self.alpha_frequency >= self.p

    @property
    def is_null(self) -> bool:
        """True for the identically vanishing elements (self-mirrored with the cancelling sign)."""
        if not self.symmetric or self.mirror_q() != self.q:
            return False
        even_family = self.family in ("u", "u'")
        parity = (-1) ** (self.p % 2)
        return (1 + parity if even_family else 1 - parity) == 0

    def with_family(self, family: str) -> "BoundaryBasisIndex":
        return BoundaryBasisIndex(family, self.p, self.q)

    def evaluate(self, beta, alpha) -> np.ndarray:
        beta = np.asarray(beta, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        shift = 1 if self.primed else 0

        def phi(q):
            return PHI_NORM * np.exp(1j * (self.p * beta + (2 * q + shift) * alpha))

        if not self.symmetric:
            return phi(self.q)
        s = (-1) ** (self.p % 2)
        sign = s if self.family in ("u", "u'") else -s
        return phi(self.q) + sign * phi(self.mirror_q())


def canonicalize(idx: BoundaryBasisIndex) -> tuple[int, BoundaryBasisIndex]:
    """(sign, canonical index) with element(idx) = sign * element(canonical)."""
    if idx.is_canonical:
        return 1, idx
    s = (-1) ** (idx.p % 2)
    sign = s if idx.family in ("u", "u'") else -s
    return sign, BoundaryBasisIndex(idx.family, idx.p, idx.mirror_q())


def basis_field(grid: BoundaryGrid, idx: BoundaryBasisIndex) -> BoundaryField:
    """The basis element on d+SM (zero on d-SM) with its closed form attached."""
    name = f"{idx.family}_{idx.p},{idx.q}"
    return BoundaryField.from_function(grid, idx.evaluate, name, plus_only=True).restrict_plus()


def canonical_indices(family: str, max_abs: int, include_null: bool = False) -> list[BoundaryBasisIndex]:
    out = []
    for p in range(-max_abs, max_abs + 1):
        for q in range(-max_abs, max_abs + 1):
            idx = BoundaryBasisIndex(family, p, q)
            if idx.is_canonical and (include_null or not idx.is_null):
                out.append(idx)
    return out


def phi_coefficients(u: BoundaryField, primed: bool = False) -> np.ndarray:
    """
    <u, phi_{p,q}> (or phi') on d+SM for p in [-N_beta/2 + 1, N_beta/2 - 1], q in [-M/2 + 1, M/2 - 1]
    with M = N_alpha / 2 plus nodes; axis 0 is p, axis 1 is q, both centred.
    """
    g = u.grid
    data = u.plus_samples
    alpha = g.alpha_plus
    if primed:
        data = data * np.exp(-1j * alpha)[None, :]
    M = data.shape[1]
    F = np.fft.fft2(data)
    P, Q = g.n_beta // 2 - 1, M // 2 - 1
    ps = np.arange(-P, P + 1)
    qs = np.arange(-Q, Q + 1)
    # e^{-2iq alpha_l} = e^{-2iq alpha_0} e^{-2 pi i q l / M}
    phase = np.exp(-2j * qs * alpha[0])
    scale = g.d_beta * g.d_alpha * PHI_NORM
    return F[np.ix_(ps % g.n_beta, qs % M)] * phase[None, :] * scale


# ---------------------------------------------------------------------------
# Spectral tables
# ---------------------------------------------------------------------------

# operator -> (source basis family, image basis family)
ORACLE_FAMILIES = {
    "P+": ("u", "v"),
    "P-": ("v'", "u'"),
    "C+": ("v", "v"),
    "P+*": ("v", "u"),
    "P-*": ("u'", "v'"),
    "A+*HA+": ("v'", "v'"),
}


def spectral_oracle(idx: BoundaryBasisIndex, which: str, strict: bool = True) -> tuple[complex, BoundaryBasisIndex]:
    """Closed-form action of P+, P-, C+, P+^*, P-^* or A+^*HA+ on a basis element."""
    if which not in ORACLE_FAMILIES:
        raise ValueError(f"Unknown operator {which!r} (expected one of {sorted(ORACLE_FAMILIES)})")
    src, dst = ORACLE_FAMILIES[which]
    if idx.family != src:
        raise ValueError(f"{which} acts on the {src!r} family, got {idx.family!r}")
    if strict and not idx.is_canonical:
        raise ValueError(f"Index {idx} is not canonical; canonicalize() it first")

    p, q = idx.p, idx.q
    sgn = np.sign
    if which == "P+":
        c = -1j * (sgn(2 * q) - sgn(2 * p - 2 * q))
    elif which == "P-":
        c = -1j * (sgn(2 * q + 1) - sgn(2 * p - 2 * q - 1))
    elif which == "C+":
        c = -0.5j * (sgn(2 * q) + sgn(2 * p - 2 * q))
    elif which == "P+*":
        c = 1j * (sgn(2 * q) - sgn(2 * p - 2 * q))
    elif which == "P-*":
        c = 1j * (sgn(2 * q + 1) - sgn(2 * p - 2 * q - 1))
    else:
        c = -1j * (sgn(2 * q + 1) + sgn(2 * p - 2 * q - 1))
    return complex(c), idx.with_family(dst)


_COMPOSITIONAL = {
    "P+": lambda u: op_P(u, "plus"),
    "P-": lambda u: op_P(u, "minus"),
    "C+": lambda u: op_C(u, "plus"),
    "P+*": lambda u: op_P_star(u, "plus"),
    "P-*": lambda u: op_P_star(u, "minus"),
    "A+*HA+": lambda u: op_A_plus_star_H_A_plus(u, "all"),
}


def compositional(which: str, u: BoundaryField) -> BoundaryField:
    if which not in _COMPOSITIONAL:
        raise ValueError(f"Unknown operator {which!r} (expected one of {sorted(_COMPOSITIONAL)})")
    return _COMPOSITIONAL[which](u)


def oracle_discrepancy(grid: BoundaryGrid, which: str, max_abs: int = 8) -> float:
    """Max |compositional - table| over canonical indices with |p|, |q| <= max_abs."""
    src, _ = ORACLE_FAMILIES[which]
    worst = 0.0
    for idx in canonical_indices(src, max_abs):
        coeff, out_idx = spectral_oracle(idx, which)
        got = compositional(which, basis_field(grid, idx)).plus_samples
        want = coeff * basis_field(grid, out_idx).plus_samples
        err = float(np.abs(got - want).max())
        if err > worst:
            worst = err
            logger.debug("%s oracle worst so far %.3e at %s", which, err, idx)
    return worst
