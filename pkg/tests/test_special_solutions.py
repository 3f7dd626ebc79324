import numpy as np
import pytest
from numpy.testing import assert_allclose

from att_tomo.analytic import monomial, polynomial, vanishing_on_boundary
from att_tomo.boundary_ops import BoundaryBasisIndex
from att_tomo.fields import DiscField, FiberField
from att_tomo.geometry import FanBeamPoint
from att_tomo.special_solutions import (
    basis_eval,
    green_kernel,
    hif_build,
    holomorphize,
    holomorphized_solution,
    invariant_from_function,
    invariant_moment,
    j_kp_expected,
    j_kp_oracle,
    special_primitive,
    svd_triplet,
    ukk_over_cos,
    wk_over_cos,
    z_k,
)
from att_tomo.transport import backproject, transport_solve, xray


@pytest.fixture
def fan_points(rng):
    return FanBeamPoint(rng.uniform(0, 2 * np.pi, 12), rng.uniform(-1.4, 1.4, 12))


@pytest.mark.parametrize("k", range(4))
def test_j_kp_oracle(rng, k):
    x = np.sqrt(rng.uniform(0, 0.8, 8)) * np.exp(1j * rng.uniform(0, 2 * np.pi, 8))
    for p in range(k + 1):
        assert_allclose(j_kp_oracle(k, p, x), j_kp_expected(k, p, x), atol=1e-8)
    with pytest.raises(ValueError):
        j_kp_oracle(k, k + 1, x)


@pytest.mark.parametrize("k", range(4))
def test_singular_value_decomposition(disc, k):
    Z, sigma, third = svd_triplet(k)
    assert sigma == pytest.approx(np.sqrt(2 / (k + 1)))
    B, A = disc.bgrid.mesh
    sino = xray(DiscField.from_analytic(disc.grid, Z), disc)
    assert_allclose(sino.samples, sigma * third(B, A)[:, disc.bgrid.plus_slice], atol=1e-11)


def test_z_basis_is_orthonormal(grid):
    Z = [DiscField.from_analytic(grid, z_k(k)) for k in range(5)]
    gram = np.array([[2 * np.pi * a.inner(b) for b in Z] for a in Z])
    assert_allclose(gram, np.eye(5), atol=1e-12)
    with pytest.raises(ValueError):
        z_k(-1)


def test_ukk_over_cos_is_exact(fan_points):
    for k in range(4):
        u = BoundaryBasisIndex("u'", k, k).evaluate(fan_points.beta, fan_points.alpha)
        got = ukk_over_cos(k)(fan_points.beta, fan_points.alpha) * np.cos(fan_points.alpha)
        assert_allclose(got, u, atol=1e-13)
        assert_allclose(basis_eval("Wk", k, fan_points),
                        wk_over_cos(k)(fan_points.beta, fan_points.alpha) * np.cos(fan_points.alpha), atol=1e-13)


def test_basis_eval_arguments():
    assert basis_eval("Zk", 0, 0.5) == pytest.approx(1 / (np.pi * np.sqrt(2)))
    with pytest.raises(ValueError, match="Unknown basis"):
        basis_eval("Yk", 0, 0.5)
    with pytest.raises(ValueError, match="FanBeamPoint"):
        basis_eval("Wk", 1, 0.5)


def test_kernel_forms_agree(rng, fan_points):
    z = (np.sqrt(rng.uniform(0, 0.25, 5)) * np.exp(1j * rng.uniform(0, 2 * np.pi, 5)))[:, None]
    closed = green_kernel(z, fan_points)
    assert_allclose(green_kernel(z, fan_points, "separable"), closed, atol=1e-12)
    assert_allclose(green_kernel(z, fan_points, "series"), closed, atol=1e-10)
    with pytest.raises(ValueError, match="pole"):
        green_kernel(1.0, fan_points)
    with pytest.raises(ValueError, match="kernel mode"):
        green_kernel(0.1, fan_points, "fourier")


def test_invariant_distribution_inverts_backprojection(disc):
    f = DiscField.from_analytic(disc.grid, z_k(2) + z_k(0) * 0.5)
    inv = invariant_from_function(f, disc)
    assert_allclose(inv.coefficients[:4], [0.5, 0.0, 1.0, 0.0], atol=1e-12)
    got = backproject(inv.divided, "I0star", disc, divided=True)
    assert (got - f).norm(0.9) / f.norm(0.9) < 1e-8


def test_kernel_and_series_invariants_agree(disc):
    f = DiscField.from_analytic(disc.grid, polynomial({(0, 0): 1.0, (1, 0): -0.5j, (3, 0): 0.25}))
    series = invariant_from_function(f, disc, "series")
    kernel = invariant_from_function(f, disc, "kernel")
    assert_allclose(kernel.coefficients[:5], series.coefficients[:5], atol=1e-10)
    assert_allclose(kernel.W.plus_samples, series.W.plus_samples, atol=1e-10)
    assert kernel.divided is None
    with pytest.raises(ValueError, match="method"):
        invariant_from_function(f, disc, "svd")


@pytest.mark.parametrize("p", range(3))
def test_invariant_moments_pair_with_z_basis(disc, p):
    # the zeroth moment is 2 pi <I0* W_p, Z_k>_M
    for k in range(3):
        want = 1.0 if k == p else 0.0
        assert abs(invariant_moment(wk_over_cos(p), 0, k, disc) - want) < 2e-2


def test_integrating_factor_of_a_constant(disc):
    c = 0.3 + 0.2j
    factor = hif_build(c, disc)
    B, A = disc.bgrid.mesh
    assert_allclose(factor.rho.plus_samples, (c * np.exp(1j * A))[:, disc.bgrid.plus_slice], atol=1e-8)
    want = FiberField.from_modes(disc.grid, disc.K, {1: monomial(0, 1, -c)})
    assert (factor.w - want).norm() < 1e-5 * want.norm()
    assert factor.negative_mode_norm < 1e-12
    assert factor.parity_defect < 1e-5
    assert_allclose(factor.boundary_trace().plus_samples, factor.rho.plus_samples, atol=1e-8)


def test_conjugate_integrating_factor(disc):
    factor = hif_build(0.3 + 0.2j, disc, conjugate=True)
    assert factor.conjugate
    assert factor.negative_mode_norm < 1e-12
    assert factor.w.select(lambda k: k < 0).norm() > 0.1


def test_holomorphized_solution_drops_negative_modes(disc):
    rng = np.random.default_rng(3)
    modes = {k: polynomial({(p, q): complex(*rng.normal(size=2)) for p in range(2) for q in range(2)})
             for k in (-1, 0, 1)}
    f = FiberField.from_modes(disc.grid, disc.K, modes, "f")
    u = transport_solve(f, None, disc)
    fixed = holomorphized_solution(u, xray(f, disc).data, "forward", disc)
    assert fixed.select(lambda k: k < 0).norm() < 1e-2 * u.norm()
    with pytest.raises(ValueError, match="direction"):
        holomorphize(xray(f, disc), "sideways")


def test_holomorphized_average_is_half_the_boundary_mean(disc):
    rng = np.random.default_rng(5)
    modes = {k: polynomial({(p, q): complex(*rng.normal(size=2)) for p in range(2) for q in range(2)})
             for k in (0, 1)}
    f = FiberField.from_modes(disc.grid, disc.K, modes, "f")
    u = transport_solve(f, None, disc)
    fixed = holomorphized_solution(u, xray(f, disc).data, "forward", disc)
    half_mean = 0.5 * u.mode(0).ring.mean()
    assert np.abs(fixed.mode(0).values - half_mean).max() < 1e-3 * u.norm()
    assert fixed.select(lambda k: k < 0).norm() < 1e-2 * u.norm()


def test_special_primitive_fiber_average(disc):
    fs = DiscField.from_analytic(disc.grid, vanishing_on_boundary(polynomial({(0, 0): 1.0, (1, 0): 0.2})))
    u = special_primitive(0.0, fs, disc)
    want = fs * (-1j)
    assert (u.mode(0) - want).norm(0.9) < 5e-2 * want.norm(0.9)
    assert special_primitive(0.0, 0.0, disc).norm() < 1e-14
