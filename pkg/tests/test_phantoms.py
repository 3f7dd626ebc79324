import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from att_tomo.config import ExperimentConfig
from att_tomo.transport import xray_attenuated
from tomo_app.phantoms import PhantomSpec, make_attenuation, phantom_make, zernike

Z = np.array([0.0, 0.3 + 0.4j, -0.5j, 0.8])


@pytest.mark.parametrize("kwargs, message", [
    ({"kind": "shepp_logan"}, "phantom kind"),
    ({"attenuation": "sometimes"}, "attenuation"),
    ({"m": -1}, "non-negative"),
    ({"sigma": 0.0}, "widths"),
])
def test_spec_validation(kwargs, message):
    with pytest.raises(ValueError, match=message):
        PhantomSpec(**kwargs)


def test_spec_from_config():
    spec = PhantomSpec.from_config(ExperimentConfig(phantom="poly_zk", m=1, k=3))
    assert (spec.kind, spec.m, spec.k) == ("poly_zk", 1, 3)
    assert spec.attenuation == "gaussian"


def test_attenuations():
    assert make_attenuation(PhantomSpec()) is None
    const = make_attenuation(PhantomSpec(attenuation="constant", a_amplitude=0.4 + 0.1j))
    assert_allclose(const(Z), 0.4 + 0.1j)
    bump = make_attenuation(PhantomSpec(attenuation="gaussian", a_amplitude=0.5, a_offset=0.1j, a_center=0.2))
    assert complex(bump(0.2)) == pytest.approx(0.5 + 0.1j)


def test_zernike_polynomials():
    assert_allclose(zernike(2, 0)(Z), 2 * np.abs(Z) ** 2 - 1)
    assert_allclose(zernike(1, 1)(Z), Z)
    assert_allclose(zernike(2, -2)(Z), np.conj(Z) ** 2)
    assert_allclose(zernike(3, 1)(Z), (3 * np.abs(Z) ** 2 - 2) * Z)
    with pytest.raises(ValueError, match="Zernike"):
        zernike(2, 1)
    with pytest.raises(ValueError, match="Zernike"):
        zernike(1, 3)


def test_monomial_phantom(grid):
    ph = phantom_make(PhantomSpec("poly_zk", m=2, k=3), grid, 4)
    assert ph.f.order() == 2
    assert_allclose(ph.f.mode(2).values, grid.z**3)
    assert ph.a is None
    assert ph.truth is None


def test_bump_needs_degree_zero(grid):
    with pytest.raises(ValueError, match="degree-0"):
        phantom_make(PhantomSpec("gaussian_bump", m=1), grid, 4)
    with pytest.raises(ValueError, match="cutoff"):
        phantom_make(PhantomSpec("tensor_mix", m=5), grid, 4)


def test_tensor_mix_is_seeded(grid):
    a = phantom_make(PhantomSpec("tensor_mix", m=2, seed=3), grid, 4).f
    b = phantom_make(PhantomSpec("tensor_mix", m=2, seed=3), grid, 4).f
    c = phantom_make(PhantomSpec("tensor_mix", m=2, seed=4), grid, 4).f
    assert_array_equal(a.coeffs, b.coeffs)
    assert np.abs(a.coeffs - c.coeffs).max() > 0.1
    assert a.order() == 2


def test_gauge_mix_truth(grid):
    ph = phantom_make(PhantomSpec("gauge_mix", m=2), grid, 4)
    assert ph.truth.m == 2
    assert_allclose(ph.f.coeffs, ph.truth.fiber_field(4).coeffs, atol=1e-12)
    for plus, minus in ph.truth.solenoidal_residuals().values():
        assert plus < 1e-12
        assert minus < 1e-12
    assert ph.truth.gs_boundary_max() < 1e-14


def test_kernel_phantom_is_invisible(disc):
    spec = PhantomSpec("kernel", m=1, center=0.1 + 0.2j, sigma=0.35, attenuation="gaussian",
                       a_amplitude=0.5 + 0.3j, a_offset=0.1, a_center=0.15 - 0.1j, a_sigma=0.45)
    ph = phantom_make(spec, disc.grid, disc.K)
    assert set(ph.parts) == {"h"}
    assert ph.truth.norm() == 0.0
    assert xray_attenuated(ph.f, ph.a, disc).norm() < 1e-5


def test_doppler_phantom(grid):
    spec = PhantomSpec("doppler", m=1, attenuation="constant", a_amplitude=0.5)
    ph = phantom_make(spec, grid, 2)
    assert set(ph.parts) == {"f", "g"}
    assert_allclose(ph.truth.g0.values, -0.5 * ph.parts["f"].values)
    assert ph.truth.gs is ph.parts["g"]
    assert ph.f.order() == 1
