import math

import numpy as np
import pytest

from nlslab.errors import BackgroundMismatch, NonFiniteError, ParameterError
from nlslab.grid import (BackgroundKind, Field1D, Grid1D, derivative, quadrature, quadrature_with_tail,
                         spectral_derivative)
from nlslab.models import (Family, ModelSpec, biharmonic_critical_power, energy_critical_power,
                           mass_critical_power)


@pytest.mark.parametrize("n", [15, 100, 1000, 8, 0])
def test_grid_rejects_bad_point_counts(n):
    with pytest.raises(ParameterError):
        Grid1D(10.0, n)


@pytest.mark.parametrize("L", [0.0, -1.0, math.inf, math.nan])
def test_grid_rejects_bad_length(L):
    with pytest.raises(ParameterError):
        Grid1D(L, 64)


def test_grid_spacing_is_exact():
    g = Grid1D(20.0, 2048)
    assert g.dx * g.points == 2 * g.length
    assert g.x[0] == -20.0 and g.x[-1] < 20.0


def test_quadrature_constant():
    g = Grid1D(10.0, 256)
    assert quadrature(np.ones(256), g) == pytest.approx(20.0, abs=1e-12)


def test_quadrature_sech_squared():
    g = Grid1D(20.0, 1024)
    assert abs(quadrature(1 / np.cosh(g.x) ** 2, g) - 2.0) < 1e-10


def test_quadrature_odd_sine():
    g = Grid1D(5.0, 128)
    assert abs(quadrature(np.sin(np.pi * g.x / g.length), g)) < 1e-12


def test_quadrature_rejects_nonfinite():
    g = Grid1D(5.0, 32)
    s = np.ones(32)
    s[3] = np.nan
    with pytest.raises(NonFiniteError, match="non-finite integrand"):
        quadrature(s, g)


def test_quadrature_linear():
    g = Grid1D(10.0, 512)
    f, h = np.exp(-g.x**2), np.cos(g.x) / np.cosh(g.x)
    lhs = quadrature(2.5 * f - 3.0 * h, g)
    assert lhs == pytest.approx(2.5 * quadrature(f, g) - 3.0 * quadrature(h, g), abs=1e-13)


def test_parseval():
    g = Grid1D(15.0, 512)
    f = np.exp(-g.x**2 / 3) * np.exp(2j * g.x)
    fhat = np.fft.fft(f)
    spectral = g.dx * np.sum(np.abs(fhat) ** 2) / g.points
    assert quadrature(np.abs(f) ** 2, g) == pytest.approx(spectral, rel=1e-10)


@pytest.mark.parametrize("m", [1, 3, 7])
def test_derivative_of_fourier_mode(m):
    g = Grid1D(4.0, 64)
    k = np.pi / g.length * m
    f = np.exp(1j * k * g.x)
    np.testing.assert_allclose(derivative(f, g, 1), 1j * k * f, atol=1e-10 * k)


def test_second_derivative_of_sech():
    g = Grid1D(20.0, 2048)
    s = 1 / np.cosh(g.x)
    err = np.abs(derivative(s, g, 2) - (s - 2 * s**3))
    # the periodic extension has a slope kink of size ~sech(L) at the box edge
    assert err[np.abs(g.x) < 15].max() < 1e-9


@pytest.mark.parametrize("order", [1, 2, 4])
def test_derivative_of_constant_vanishes(order):
    g = Grid1D(3.0, 32)
    assert np.abs(derivative(np.full(32, 2.0 + 1j), g, order)).max() < 1e-13


def test_two_first_derivatives_equal_second():
    g = Grid1D(10.0, 256)
    f = Field1D(g, np.exp(-g.x**2) * (1 + 0.3j * g.x))
    d2 = spectral_derivative(f, 2).values
    dd = spectral_derivative(spectral_derivative(f, 1), 1).values
    assert np.abs(d2 - dd).max() / np.abs(d2).max() < 1e-10


@pytest.mark.parametrize("order", [0, 3, 5])
def test_spectral_derivative_orders(order):
    g = Grid1D(3.0, 32)
    with pytest.raises(ParameterError):
        spectral_derivative(Field1D(g, np.zeros(32)), order)


def test_field_validation():
    g = Grid1D(5.0, 32)
    with pytest.raises(ParameterError):
        Field1D(g, np.zeros(31))
    with pytest.raises(NonFiniteError):
        Field1D(g, np.full(32, np.inf))
    with pytest.raises(BackgroundMismatch):
        Field1D(g, np.zeros(32), BackgroundKind.STOKES)


def test_stokes_frames():
    g = Grid1D(5.0, 32)
    t = 0.7
    u = Field1D(g, np.full(32, np.exp(1j * t)), BackgroundKind.STOKES, t)
    v = u.to_gp_frame()
    np.testing.assert_allclose(v.values, 1.0)
    assert np.abs(u.decaying_part()).max() < 1e-15
    assert v.to_gp_frame() is v


def test_tail_correction_for_inverse_square():
    g = Grid1D(50.0, 4096)
    vals = 1 / (1 + g.x**2)
    assert quadrature_with_tail(vals, g) == pytest.approx(math.pi, abs=1e-3)
    assert abs(quadrature(vals, g) - math.pi) > 1e-2


def test_critical_powers():
    assert energy_critical_power(1) == math.inf and energy_critical_power(3) == 4.0
    assert biharmonic_critical_power(5) == 8.0 and biharmonic_critical_power(4) == math.inf
    assert mass_critical_power(2) == 2.0


@pytest.mark.parametrize("kw", [
    dict(family="PowerNLS", p=4.0, n=3),
    dict(family="PowerNLS", epsilon=0),
    dict(family="GrossPitaevskii", p=3.0),
    dict(family="CubicQuintic", lambda1=1.0, lambda2=-1.0),
    dict(family="CubicQuintic"),
    dict(family="Biharmonic", p=8.0, n=5),
    dict(family="DerivativeNLS", n=2),
    dict(family="nonsense"),
])
def test_model_validation(kw):
    with pytest.raises(ParameterError):
        ModelSpec(**kw)


@pytest.mark.parametrize("p,n,regime", [(2, 1, "subcritical"), (4, 1, "critical"), (6, 1, "supercritical"),
                                         (2, 2, "critical"), (3, 3, "supercritical")])
def test_mass_regime(p, n, regime):
    assert ModelSpec(Family.POWER_NLS, -1, p, n).mass_regime == regime


def test_family_aliases():
    assert Family.parse("gp") is Family.GROSS_PITAEVSKII
    assert Family.parse("derivative-nls") is Family.DERIVATIVE_NLS
