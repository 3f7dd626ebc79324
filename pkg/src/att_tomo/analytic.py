"""
Closed-form evaluators on the disc with exact Wirtinger derivatives.

An AnalyticFunction carries f(z) and, when known, df = d f/dz and dbar f = d f/dz-bar.
Arithmetic applies the sum and product rules so that fields assembled from phantoms keep
exact derivatives (needed by X, X_perp and the ray transforms of analytic integrands).
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

Evaluator = Callable[[np.ndarray], np.ndarray]


def _as_complex(z) -> np.ndarray:
    return np.asarray(z, dtype=np.complex128)


@dataclass(frozen=True)
class AnalyticFunction:
    func: Evaluator
    d: Optional[Evaluator] = None
    dbar: Optional[Evaluator] = None
    label: str = ""

    def __call__(self, z) -> np.ndarray:
        z = _as_complex(z)
        out = np.asarray(self.func(z), dtype=np.complex128)
        if out.shape != z.shape:
            out = np.broadcast_to(out, z.shape).copy()
        return out

    def wirtinger(self, which: str) -> Optional["AnalyticFunction"]:
        if which not in ("del", "dbar"):
            raise ValueError(f"Unknown Wirtinger operator: {which!r} (expected 'del' or 'dbar')")
        fn = self.d if which == "del" else self.dbar
        if fn is None:
            return None
        return AnalyticFunction(fn, label=f"{which}({self.label})")

    @property
    def has_derivatives(self) -> bool:
        return self.d is not None and self.dbar is not None

    # --- arithmetic ---

    def __add__(self, other):
        if isinstance(other, numbers.Number):
            c = complex(other)
            return AnalyticFunction(lambda z: self.func(z) + c, self.d, self.dbar, self.label)
        if not isinstance(other, AnalyticFunction):
            return NotImplemented
        f, g = self, other
        return AnalyticFunction(
            lambda z: f.func(z) + g.func(z),
            _combine(f.d, g.d, lambda a, b: a + b),
            _combine(f.dbar, g.dbar, lambda a, b: a + b),
            f"({f.label}+{g.label})",
        )

    __radd__ = __add__

    def __neg__(self):
        return self * (-1.0)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            c = complex(other)
            return AnalyticFunction(
                lambda z: c * self.func(z),
                None if self.d is None else (lambda z: c * self.d(z)),
                None if self.dbar is None else (lambda z: c * self.dbar(z)),
                self.label,
            )
        if not isinstance(other, AnalyticFunction):
            return NotImplemented
        f, g = self, other

        def product_rule(df, dg):
            if df is None or dg is None:
                return None
            return lambda z: df(z) * g.func(z) + f.func(z) * dg(z)

        return AnalyticFunction(
            lambda z: f.func(z) * g.func(z),
            product_rule(f.d, g.d),
            product_rule(f.dbar, g.dbar),
            f"{f.label}*{g.label}",
        )

    __rmul__ = __mul__

    def conj(self) -> "AnalyticFunction":
        f = self
        # d(conj f) = conj(dbar f), dbar(conj f) = conj(d f)
        return AnalyticFunction(
            lambda z: np.conj(f.func(z)),
            None if f.dbar is None else (lambda z: np.conj(f.dbar(z))),
            None if f.d is None else (lambda z: np.conj(f.d(z))),
            f"conj({f.label})",
        )


def _combine(a: Optional[Evaluator], b: Optional[Evaluator], op) -> Optional[Evaluator]:
    if a is None or b is None:
        return None
    return lambda z: op(a(z), b(z))


# --- constructors ---

def constant(c: complex = 0.0) -> AnalyticFunction:
    c = complex(c)

    def zero(z):
        return np.zeros(np.shape(z), dtype=np.complex128)

    return AnalyticFunction(lambda z: np.full(np.shape(z), c, dtype=np.complex128), zero, zero,
                            f"{c:g}")


def monomial(p: int, q: int, c: complex = 1.0) -> AnalyticFunction:
    """c * z**p * conj(z)**q."""
    return polynomial({(p, q): c})


def polynomial(terms: Mapping[tuple[int, int], complex]) -> AnalyticFunction:
    """Sum of c * z**p * conj(z)**q over {(p, q): c}."""
    items = [(int(p), int(q), complex(c)) for (p, q), c in terms.items() if c != 0]
    if any(p < 0 or q < 0 for p, q, _ in items):
        raise ValueError(f"Polynomial exponents must be non-negative: {sorted(terms)}")

    def table(shift_p=0, shift_q=0, factor=None) -> np.ndarray:
        # table[p, q] multiplies z**p conj(z)**q
        deg_p = max((p for p, _, _ in items), default=0)
        deg_q = max((q for _, q, _ in items), default=0)
        c = np.zeros((deg_p + 1, deg_q + 1), dtype=np.complex128)
        for p, q, coef in items:
            pp, qq = p - shift_p, q - shift_q
            if pp >= 0 and qq >= 0:
                c[pp, qq] += coef if factor is None else coef * factor(p, q)
        return c

    def evaluator(c: np.ndarray) -> Evaluator:
        if not c.any():
            return lambda z: np.zeros(np.shape(z), dtype=np.complex128)

        def evaluate(z):
            z = _as_complex(z)
            return npoly.polyval2d(z, np.conj(z), c).astype(np.complex128, copy=False)

        return evaluate

    label = " + ".join(f"{c:g} z^{p} zb^{q}" for p, q, c in items) or "0"
    return AnalyticFunction(
        evaluator(table()),
        evaluator(table(1, 0, lambda p, q: p)),
        evaluator(table(0, 1, lambda p, q: q)),
        label,
    )


def holomorphic_series(coeffs, antiholomorphic: bool = False) -> AnalyticFunction:
    """Sum of c_n z**n (or c_n conj(z)**n) evaluated by Horner's rule."""
    c = np.asarray(coeffs, dtype=np.complex128)
    dc = npoly.polyder(c) if len(c) > 1 else np.zeros(1, dtype=np.complex128)

    def zero(z):
        return np.zeros(np.shape(z), dtype=np.complex128)

    if antiholomorphic:
        return AnalyticFunction(
            lambda z: npoly.polyval(np.conj(_as_complex(z)), c),
            zero,
            lambda z: npoly.polyval(np.conj(_as_complex(z)), dc),
            f"antiholomorphic series (degree {len(c) - 1})",
        )
    return AnalyticFunction(
        lambda z: npoly.polyval(_as_complex(z), c),
        lambda z: npoly.polyval(_as_complex(z), dc),
        zero,
        f"holomorphic series (degree {len(c) - 1})",
    )


def gaussian(center: complex = 0.0, sigma: float = 0.25, amplitude: complex = 1.0) -> AnalyticFunction:
    if sigma <= 0:
        raise ValueError(f"Gaussian width must be positive, got {sigma}")
    c0 = complex(center)
    amp = complex(amplitude)
    s2 = 2.0 * sigma**2

    def g(z):
        w = _as_complex(z) - c0
        return amp * np.exp(-(w * np.conj(w)).real / s2)

    return AnalyticFunction(
        g,
        lambda z: -np.conj(_as_complex(z) - c0) / s2 * g(z),
        lambda z: -(_as_complex(z) - c0) / s2 * g(z),
        f"gaussian(c={c0:g}, s={sigma:g}, A={amp:g})",
    )


def vanishing_on_boundary(h: AnalyticFunction) -> AnalyticFunction:
    """(1 - |z|^2) h, which vanishes on the unit circle."""
    return polynomial({(0, 0): 1.0, (1, 1): -1.0}) * h
