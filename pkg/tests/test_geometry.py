import numpy as np
import pytest
from numpy.testing import assert_allclose

from att_tomo.fields import BoundaryField
from att_tomo.geometry import (
    FanBeamPoint,
    RayQuadrature,
    chord_length,
    exit_time,
    flow_extend,
    footpoint,
    integrate_rays,
    santalo_integrate,
    scattering,
)
from att_tomo.utils.conversions import wrap_signed


@pytest.fixture
def points(rng):
    r = np.sqrt(rng.uniform(0, 0.95, 40))
    x = r * np.exp(1j * rng.uniform(0, 2 * np.pi, 40))
    theta = rng.uniform(0, 2 * np.pi, 40)
    return x, theta


def test_ray_quadrature_validation():
    with pytest.raises(ValueError):
        RayQuadrature(0.0)
    with pytest.raises(ValueError):
        RayQuadrature(0.1, 0)
    q = RayQuadrature(0.1, 4)
    assert q.panel_count(1.0) == 10
    assert q.refined().h_t == pytest.approx(0.05)


def test_exit_time_lands_on_circle(points):
    x, theta = points
    tau = exit_time(x, theta)
    assert_allclose(np.abs(x + tau * np.exp(1j * theta)), 1.0, atol=1e-12)
    assert np.all(tau >= 0)
    with pytest.raises(ValueError):
        exit_time(1.5, 0.0)


def test_chord_length_through_centre():
    assert_allclose(chord_length(0.0, np.linspace(0, 2 * np.pi, 7)), 2.0, atol=1e-14)


def test_footpoint_is_on_the_line(points):
    x, theta = points
    p = footpoint(x, theta)
    assert np.all(p.is_incoming)
    assert_allclose(wrap_signed(p.theta - theta), 0.0, atol=1e-12)
    # x lies on the chord leaving the base point in direction theta
    assert_allclose(((x - p.base_point) * np.exp(-1j * theta)).imag, 0.0, atol=1e-12)
    assert np.all(((x - p.base_point) * np.exp(-1j * theta)).real >= -1e-12)


@pytest.mark.parametrize("antipodal", [False, True])
def test_scattering_is_an_involution(rng, antipodal):
    p = FanBeamPoint(rng.uniform(0, 2 * np.pi, 20), rng.uniform(-np.pi / 2, np.pi / 2, 20))
    q = scattering(scattering(p, antipodal), antipodal)
    assert_allclose(wrap_signed(q.beta - p.beta), 0.0, atol=1e-12)
    assert_allclose(wrap_signed(q.alpha - p.alpha), 0.0, atol=1e-12)


def test_scattering_maps_entry_to_exit():
    p = FanBeamPoint(0.7, 0.3)
    exit_point = np.exp(1j * 0.7) + 2 * np.cos(0.3) * np.exp(1j * p.theta)
    s = scattering(p)
    assert_allclose(s.base_point, exit_point, atol=1e-12)
    assert not s.is_incoming


def test_integrate_rays_constant_attenuation():
    c = 0.4 - 0.3j
    L = np.array([2.0, 1.2, 0.4])
    theta = np.pi + np.array([0.0, 0.9, 1.3])
    z0 = np.ones(3, dtype=complex)
    got = integrate_rays(z0, theta, L, 1.0, c, RayQuadrature(2 / 64, 4))
    assert_allclose(got, (np.exp(c * L) - 1) / c, rtol=1e-10)
    assert_allclose(integrate_rays(z0, theta, L, 1.0, None), L, rtol=1e-13)


def test_santalo_volume(bgrid):
    # |SM| = 2 pi |M|
    assert santalo_integrate(1.0, bgrid, RayQuadrature(2 / 64, 4)).real == pytest.approx(2 * np.pi**2, rel=1e-10)


def test_flow_extension_is_constant_along_lines(bgrid):
    h = BoundaryField.from_function(bgrid, lambda b, a: np.exp(1j * b) * np.cos(a) ** 2)
    x, theta = 0.1 + 0.2j, 1.1
    shifted = x + 0.3 * np.exp(1j * theta)
    assert_allclose(flow_extend(h, x, theta), flow_extend(h, shifted, theta), atol=1e-12)
