import numpy as np
import pytest
from numpy.testing import assert_allclose

from att_tomo.analytic import (
    constant,
    gaussian,
    holomorphic_series,
    monomial,
    polynomial,
    vanishing_on_boundary,
)
from att_tomo.utils.conversions import complex_to_interleaved, fft_frequencies, interleaved_to_complex, nyquist_mask
from att_tomo.utils.quadrature import (
    differentiation_matrix,
    fd_differentiation_matrix,
    gauss_legendre,
    interpolation_matrix,
    panel_integration_matrix,
    radau_nodes,
)

Z = np.array([0.0, 0.3 + 0.4j, -0.2 + 0.1j, 0.7j, -0.9])


def test_monomial_wirtinger_derivatives():
    f = monomial(3, 2, 2.0)
    assert_allclose(f(Z), 2.0 * Z**3 * np.conj(Z) ** 2)
    assert_allclose(f.wirtinger("del")(Z), 6.0 * Z**2 * np.conj(Z) ** 2)
    assert_allclose(f.wirtinger("dbar")(Z), 4.0 * Z**3 * np.conj(Z))
    with pytest.raises(ValueError):
        f.wirtinger("grad")


def test_product_rule_and_conjugation():
    f = monomial(1, 0) * monomial(0, 1) + 1.0
    assert_allclose(f(Z), np.abs(Z) ** 2 + 1.0)
    assert_allclose(f.wirtinger("del")(Z), np.conj(Z))
    g = monomial(2, 0, 1j).conj()
    assert_allclose(g(Z), -1j * np.conj(Z) ** 2)
    assert_allclose(g.wirtinger("dbar")(Z), -2j * np.conj(Z))
    assert_allclose(g.wirtinger("del")(Z), 0.0)


def test_polynomial_matches_the_term_sum():
    rng = np.random.default_rng(4)
    terms = {(p, q): complex(*rng.normal(size=2)) for p in range(5) for q in range(4 - p % 3)}
    f = polynomial(terms)
    zz = (0.9 * rng.uniform(size=(3, 7)) * np.exp(2j * np.pi * rng.uniform(size=(3, 7))))
    zb = np.conj(zz)
    want = sum(c * zz**p * zb**q for (p, q), c in terms.items())
    want_d = sum(c * p * zz ** (p - 1) * zb**q for (p, q), c in terms.items() if p > 0)
    want_dbar = sum(c * q * zz**p * zb ** (q - 1) for (p, q), c in terms.items() if q > 0)
    assert f(zz).shape == zz.shape
    assert_allclose(f(zz), want, rtol=1e-12, atol=1e-13)
    assert_allclose(f.wirtinger("del")(zz), want_d, rtol=1e-12, atol=1e-13)
    assert_allclose(f.wirtinger("dbar")(zz), want_dbar, rtol=1e-12, atol=1e-13)
    assert complex(f(0.0)) == pytest.approx(terms[(0, 0)])
    assert_allclose(polynomial({})(zz), 0.0)


def test_polynomial_rejects_negative_exponents():
    with pytest.raises(ValueError):
        polynomial({(-1, 0): 1.0})


def test_constant_has_zero_derivatives():
    c = constant(2 - 1j)
    assert_allclose(c(Z), 2 - 1j)
    assert_allclose(c.wirtinger("del")(Z), 0.0)
    assert c.has_derivatives


def test_holomorphic_series():
    f = holomorphic_series([1.0, 2.0, 3.0])
    assert_allclose(f(Z), 1 + 2 * Z + 3 * Z**2)
    assert_allclose(f.wirtinger("del")(Z), 2 + 6 * Z)
    assert_allclose(f.wirtinger("dbar")(Z), 0.0)
    g = holomorphic_series([0.0, 1.0], antiholomorphic=True)
    assert_allclose(g(Z), np.conj(Z))
    assert_allclose(g.wirtinger("dbar")(Z), 1.0)


def test_gaussian_derivatives_match_finite_differences():
    g = gaussian(0.2 - 0.1j, 0.4, 1.5)
    z, h = 0.1 + 0.3j, 1e-6
    dx = (g(z + h) - g(z - h)) / (2 * h)
    dy = (g(z + 1j * h) - g(z - 1j * h)) / (2 * h)
    assert g.wirtinger("del")(z) == pytest.approx((dx - 1j * dy) / 2, abs=1e-8)
    assert g.wirtinger("dbar")(z) == pytest.approx((dx + 1j * dy) / 2, abs=1e-8)
    with pytest.raises(ValueError):
        gaussian(0.0, 0.0)


def test_vanishing_on_boundary():
    h = vanishing_on_boundary(gaussian(0.1, 0.3))
    circle = np.exp(1j * np.linspace(0, 2 * np.pi, 9))
    assert_allclose(h(circle), 0.0, atol=1e-15)


# --- utils ---

def test_radau_rule_integrates_polynomials():
    x, w = radau_nodes(6)
    assert x[-1] == 1.0
    # exact up to degree 2n - 2
    for p in range(11):
        assert np.sum(w * x**p) == pytest.approx((1 - (-1) ** (p + 1)) / (p + 1), abs=1e-13)
    with pytest.raises(ValueError):
        radau_nodes(1)


def test_spectral_differentiation_and_interpolation():
    x, _ = radau_nodes(12)
    D = differentiation_matrix(x)
    assert_allclose(D @ x**5, 5 * x**4, atol=1e-10)
    t = np.linspace(-1, 1, 7)
    assert_allclose(interpolation_matrix(x, t) @ x**4, t**4, atol=1e-12)
    Dfd = fd_differentiation_matrix(x, 5)
    assert_allclose(Dfd @ x**3, 3 * x**2, atol=1e-10)


def test_panel_integration_matrix():
    x, w = gauss_legendre(4)
    Q = panel_integration_matrix(x)
    # int_{-1}^{x_i} t^2 dt
    assert_allclose(Q @ x**2, (x**3 + 1) / 3, atol=1e-13)
    assert_allclose(Q.sum(axis=1), x + 1, atol=1e-13)
    assert w.sum() == pytest.approx(2.0)


def test_frequency_helpers():
    assert list(fft_frequencies(6)) == [0, 1, 2, -3, -2, -1]
    assert list(nyquist_mask(4)) == [True, True, False, True]
    arr = np.array([[1 + 2j, 3 - 4j]])
    flat = complex_to_interleaved(arr)
    assert list(flat) == [1.0, 2.0, 3.0, -4.0]
    assert_allclose(interleaved_to_complex(flat, (1, 2)), arr)
