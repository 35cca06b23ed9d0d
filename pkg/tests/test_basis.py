import numpy as np
import pytest
from numpy.polynomial import legendre as npleg

from wavedg.basis import ReferenceBasis, gauss_rule, legendre_eval, legendre_table, mass_diagonal, quadrature_size


@pytest.mark.parametrize("degree", [0, 1, 4, 11])
def test_legendre_table_matches_numpy(degree):
    x = np.linspace(-1, 1, 17)
    tab = legendre_table(degree, x, nderiv=2)
    for n in range(degree + 1):
        c = np.zeros(n + 1)
        c[-1] = 1
        for d in range(3):
            ref = npleg.legval(x, npleg.legder(c, d) if d else c)
            np.testing.assert_allclose(tab[d, n], ref, atol=1e-10 * max(1, n) ** (2 * d))


def test_legendre_eval_endpoint_and_range():
    assert legendre_eval(7, 1.0) == pytest.approx(1.0)
    assert legendre_eval(7, -1.0) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        legendre_eval(3, 1.1)


@pytest.mark.parametrize("m", [1, 2, 5, 20, 40])
def test_gauss_rule_matches_numpy(m):
    x, w = gauss_rule(m)
    xr, wr = npleg.leggauss(m)
    np.testing.assert_allclose(np.sort(x), np.sort(xr), atol=1e-14)
    np.testing.assert_allclose(w[np.argsort(x)], wr[np.argsort(xr)], atol=1e-14)


def test_mass_diagonal():
    np.testing.assert_allclose(mass_diagonal(4), 2.0 / (2 * np.arange(5) + 1))


def test_projection_reproduces_polynomials():
    b = ReferenceBasis(5, 8)
    coeffs = np.array([0.3, -1.0, 0.5, 0.0, 2.0, -0.25])
    vals = npleg.legval(b.quad_nodes, coeffs)
    np.testing.assert_allclose(b.project(vals), coeffs, atol=1e-13)


def test_quadrature_size_grows_with_degree():
    assert quadrature_size(6, 5) > quadrature_size(2, 1)
    assert quadrature_size(3, 3, True) >= quadrature_size(3, 3)
