import numpy as np
import pytest
from numpy.testing import assert_allclose

from att_tomo.analytic import monomial, polynomial
from att_tomo.complex_calculus import (
    cauchy_extend,
    commutator_residual,
    dirichlet_energy,
    elliptic_split,
    eta_minus,
    eta_plus,
    hodge_decompose,
    laplacian,
    poincare_constant,
    poisson_dirichlet,
    poisson_neumann,
    wirtinger,
    x_op,
    x_perp,
    x_perp_scalar,
)
from att_tomo.fields import DiscField, FiberField

ONE_MINUS_R2 = polynomial({(0, 0): 1.0, (1, 1): -1.0})


def field(grid, fn):
    return DiscField.from_analytic(grid, fn)


def test_spectral_wirtinger_on_polynomials(grid):
    f = field(grid, polynomial({(2, 1): 1.0, (0, 3): 0.5j})).grid_only()
    z = grid.z
    assert_allclose(wirtinger(f, "del").values, 2 * z * np.conj(z), atol=1e-9)
    assert_allclose(wirtinger(f, "dbar").values, z**2 + 1.5j * np.conj(z) ** 2, atol=1e-9)
    with pytest.raises(ValueError):
        wirtinger(f, "grad")


def test_analytic_wirtinger_is_exact(grid):
    f = field(grid, monomial(3, 1))
    assert_allclose(wirtinger(f, "del").values, 3 * grid.z**2 * np.conj(grid.z), atol=1e-15)


@pytest.mark.parametrize("ordering", ["dbar_del", "del_dbar"])
def test_laplacian_of_radius_squared(grid, ordering):
    f = field(grid, monomial(1, 1)).grid_only()
    assert_allclose(laplacian(f, ordering).values, 4.0, atol=1e-8)
    with pytest.raises(ValueError):
        laplacian(f, "xy")


def test_dirichlet_energy(grid):
    v = field(grid, ONE_MINUS_R2)
    assert dirichlet_energy(v) == pytest.approx(2 * np.pi, rel=1e-12)
    assert dirichlet_energy(v.grid_only()) == pytest.approx(2 * np.pi, rel=1e-9)


@pytest.mark.parametrize("ordering", ["dbar_del", "del_dbar"])
def test_poisson_dirichlet_recovers_polynomial(grid, ordering):
    rhs = DiscField.constant(grid, 4.0)
    v = poisson_dirichlet(rhs, DiscField.constant(grid, 1.0), ordering)
    assert_allclose(v.values, np.abs(grid.z) ** 2, atol=1e-10)
    # Delta(z^3 conj(z)) = 12 z^2, zero trace correction z^2
    w = poisson_dirichlet(field(grid, monomial(2, 0, 12.0)), ordering=ordering)
    assert_allclose(w.values, grid.z**3 * np.conj(grid.z) - grid.z**2, atol=1e-10)
    assert np.abs(w.ring).max() < 1e-12


def test_poisson_dirichlet_boundary_shape(grid):
    with pytest.raises(ValueError, match="Boundary samples"):
        poisson_dirichlet(DiscField.zeros(grid), np.zeros(3))


def test_poisson_neumann_harmonic(grid):
    h = field(grid, polynomial({(2, 0): 1.0, (0, 1): 1.0}))
    # d_rho h on the circle = e^{i beta} d h + e^{-i beta} dbar h
    e = np.exp(1j * grid.beta)
    flux = e * 2 * e + np.conj(e) * 1.0
    sol, defect = poisson_neumann(DiscField.zeros(grid), flux)
    assert defect < 1e-10
    assert_allclose(sol.values, h.values, atol=1e-9)


def test_poisson_neumann_compatibility_defect(grid):
    e = np.exp(1j * grid.beta)
    # roundoff-sized mean flux on top of compatible data
    _, defect = poisson_neumann(DiscField.zeros(grid), 2 * e**2 + np.conj(e) + 1e-17)
    assert defect < 1e-10
    _, defect = poisson_neumann(DiscField.zeros(grid), np.full(grid.n_beta, 1e-12))
    assert defect > 0.1
    _, defect = poisson_neumann(DiscField.zeros(grid), np.zeros(grid.n_beta))
    assert defect == 0.0


def test_elliptic_split_del(grid):
    f = field(grid, polynomial({(0, 1): 1.0, (2, 0): 1.0}))
    split = elliptic_split(f, "del")
    assert_allclose(split.v.values, np.abs(grid.z) ** 2 - 1, atol=1e-10)
    assert_allclose(split.g.values, grid.z**2, atol=1e-9)
    assert split.residual < 1e-8
    assert split.norm_defect < 1e-8


def test_elliptic_split_dbar(grid):
    f = field(grid, polynomial({(1, 0): 1.0, (0, 2): 2.0}))
    split = elliptic_split(f, "dbar")
    assert_allclose(split.v.values, np.abs(grid.z) ** 2 - 1, atol=1e-10)
    assert_allclose(split.g.values, 2 * np.conj(grid.z) ** 2, atol=1e-9)
    assert split.residual < 1e-8


def test_elliptic_split_of_zero(grid):
    split = elliptic_split(DiscField.zeros(grid), "del")
    assert split.residual == 0.0
    assert split.g.max_abs() == 0.0


def test_hodge_decomposition(grid):
    g = field(grid, ONE_MINUS_R2 * monomial(1, 0))
    h = field(grid, polynomial({(2, 0): 1.0, (0, 1): 0.5}))
    V = x_op(FiberField.from_modes(grid, 1, {0: g})) + x_perp_scalar(h)
    dec = hodge_decompose(V)
    assert_allclose(dec.g.values, g.values, atol=1e-8)
    assert_allclose(dec.h.values, h.values, atol=1e-8)
    assert dec.residual < 1e-8
    with pytest.raises(ValueError, match="modes"):
        hodge_decompose(FiberField.from_modes(grid, 2, {2: g}))


def test_cauchy_extension(grid):
    beta = 2 * np.pi * np.arange(32) / 32
    trace = np.exp(3j * beta) + 2 * np.exp(-1j * beta)
    holo = cauchy_extend(trace, "holo", grid)
    assert_allclose(holo.field.values, grid.z**3, atol=1e-12)
    assert holo.relative_dropped == pytest.approx(2 / np.sqrt(5), rel=1e-12)
    anti = cauchy_extend(trace, "antiholo", grid)
    assert_allclose(anti.field.values, 2 * np.conj(grid.z), atol=1e-12)
    assert anti.dropped_norm == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        cauchy_extend(trace, "holo")
    with pytest.raises(ValueError):
        cauchy_extend(trace, "both", grid)


def test_poincare_constant():
    assert poincare_constant() == pytest.approx(1 / 2.404825557695773**2, rel=1e-12)


def test_eta_operators_shift_modes(grid):
    u = FiberField.from_modes(grid, 1, {0: monomial(2, 1)})
    z = grid.z
    assert_allclose(eta_plus(u).mode(1).values, 2 * z * np.conj(z), atol=1e-13)
    assert_allclose(eta_minus(u).mode(-1).values, z**2, atol=1e-13)
    assert eta_plus(u).K == 2


def test_x_perp_of_a_function(grid):
    h = field(grid, polynomial({(1, 1): 1.0, (3, 0): 0.5}))
    a = x_perp(FiberField.from_modes(grid, 1, {0: h}))
    b = x_perp_scalar(h)
    for k in (-1, 1):
        assert_allclose(a.mode(k).values, b.mode(k).values, atol=1e-13)


def test_hilbert_transport_commutator(grid):
    u = FiberField.from_modes(grid, 3, {
        -2: polynomial({(0, 2): 1.0, (1, 0): 0.5}),
        0: polynomial({(1, 1): 1.0, (2, 0): -0.3j}),
        1: polynomial({(0, 1): 2.0}),
        3: monomial(1, 2, 0.7),
    })
    assert commutator_residual(u) < 1e-12
