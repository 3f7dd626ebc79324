"""
Quadrature rules, interpolation and differentiation weights shared by the grids.

Radial direction: Gauss-Radau nodes on (0, 1] (the node at 1 is the boundary ring).
Chords: composite Gauss-Legendre panels with a within-panel integration matrix for the
cumulative attenuation integral.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import legendre


def radau_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Right Gauss-Radau rule on [-1, 1] with a node at +1."""
    if n < 2:
        raise ValueError(f"Radau rule needs at least 2 nodes, got {n}")

    # roots of P_n - P_{n-1}
    c = np.zeros(n + 1)
    c[n] = 1.0
    c[n - 1] = -1.0
    x = np.sort(legendre.legroots(c).real)
    x[-1] = 1.0

    e = np.zeros(n)
    e[n - 1] = 1.0
    p = legendre.legval(x, e)
    w = (1.0 + x) / (n**2 * p**2)
    w[-1] = 2.0 / n**2
    return x, w


def barycentric_weights(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    span = x.max() - x.min()
    # scale by the interval capacity to keep the products O(1)
    diff = 4.0 * (x[:, None] - x[None, :]) / span
    np.fill_diagonal(diff, 1.0)
    w = 1.0 / np.prod(diff, axis=1)
    return w / np.abs(w).max()


def interpolation_matrix(x: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Barycentric Lagrange interpolation from nodes x to targets, shape (len(targets), len(x))."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(targets, dtype=float).ravel()
    w = barycentric_weights(x)

    diff = t[:, None] - x[None, :]
    exact = np.abs(diff) < 1e-14
    diff[exact] = 1.0
    L = w[None, :] / diff
    L /= L.sum(axis=1, keepdims=True)

    hit_rows = exact.any(axis=1)
    if hit_rows.any():
        L[hit_rows] = exact[hit_rows].astype(float)
    return L


def differentiation_matrix(x: np.ndarray) -> np.ndarray:
    """Global (spectral) first-derivative matrix on arbitrary distinct nodes."""
    x = np.asarray(x, dtype=float)
    w = barycentric_weights(x)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def fd_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Fornberg weights for derivatives 0..m at z from nodes x; column k holds the k-th derivative."""
    n = len(x)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def fd_differentiation_matrix(x: np.ndarray, width: int) -> np.ndarray:
    """Banded first-derivative matrix from centred stencils of `width` nodes, one-sided at the ends."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if width < 2 or width > n:
        raise ValueError(f"Stencil width must lie in [2, {n}], got {width}")
    D = np.zeros((n, n))
    for i in range(n):
        start = min(max(i - width // 2, 0), n - width)
        idx = slice(start, start + width)
        D[i, idx] = fd_weights(x[i], x[idx], 1)[:, 1]
    return D


def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order < 1:
        raise ValueError(f"Gauss-Legendre order must be positive, got {order}")
    return legendre.leggauss(order)


def panel_integration_matrix(x: np.ndarray) -> np.ndarray:
    """Q[i, j] = integral over [-1, x_i] of the j-th Lagrange basis polynomial on nodes x."""
    q = len(x)
    V = legendre.legvander(x, q - 1)
    C = np.linalg.inv(V)
    Cint = legendre.legint(C, lbnd=-1.0, axis=0)
    return legendre.legval(x, Cint).T
