import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anyonext.harmonic import RadialOperatorSpec, apply_whittaker, log_grid
from anyonext.specfun import (
    EvalPolicy,
    PoleError,
    bessel_k,
    bessel_k_deriv,
    gamma,
    rgamma,
    tricomi_u,
    whittaker_w,
)

non_integer = st.floats(-2.95, 2.95).filter(lambda z: abs(z - round(z)) > 1e-3)


def test_gamma_examples():
    assert gamma(1) == pytest.approx(1.0, rel=1e-15)
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma(5) == pytest.approx(24.0, rel=1e-14)


def test_gamma_pole():
    with pytest.raises(PoleError):
        gamma(-2.0)
    assert rgamma(-2.0) == 0


@pytest.mark.parametrize("z", [0.1 + 0.3j, -1.7 + 2.0j, 3.5 - 1.0j, 0.5 - 4j])
def test_gamma_complex_against_mpmath(z):
    assert abs(gamma(z) - complex(mp.gamma(z))) <= 1e-13 * abs(complex(mp.gamma(z)))


@given(non_integer)
def test_gamma_reflection(z):
    assert gamma(z) * gamma(1 - z) * math.sin(math.pi * z) == pytest.approx(math.pi, rel=1e-10)


@given(non_integer)
def test_gamma_recurrence(z):
    assert gamma(z + 1) == pytest.approx(z * gamma(z), rel=1e-10)


def test_bessel_examples():
    assert bessel_k(0.5, 1.0) == pytest.approx(math.sqrt(math.pi / 2) / math.e, rel=1e-14)
    # the leading small-x term is off by O(x^(2 nu))
    nu = 0.3
    err = [abs(bessel_k(nu, x) / (0.5 * gamma(nu) * (2 / x) ** nu) - 1) for x in (1e-6, 1e-8)]
    assert err[1] < 1e-4
    assert err[0] / err[1] == pytest.approx(100 ** (2 * nu), rel=1e-3)
    x = 50.0
    ratio = bessel_k(0.7, x) / (math.sqrt(math.pi / (2 * x)) * math.exp(-x))
    assert abs(ratio - 1) < 1.0 / x


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 1.99), st.floats(1e-3, 60.0))
def test_bessel_against_mpmath(nu, x):
    ref = float(mp.besselk(nu, x))
    assert float(bessel_k(nu, x)) == pytest.approx(ref, rel=1e-11)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(1e-2, 30.0))
def test_bessel_recurrence(nu, x):
    lhs = float(bessel_k(nu + 1, x))
    rhs = float(bessel_k(1 - nu, x)) + 2 * nu / x * float(bessel_k(nu, x))
    assert lhs == pytest.approx(rhs, rel=1e-11)


def test_bessel_derivative():
    x = np.geomspace(1e-2, 20, 15)
    h = 1e-6 * x
    fd = (bessel_k(0.4, x + h) - bessel_k(0.4, x - h)) / (2 * h)
    assert np.allclose(bessel_k_deriv(0.4, x), fd, rtol=1e-7)


def test_bessel_vectorised_matches_scalar():
    x = np.array([0.1, 1.0, 10.0, 40.0])
    assert np.allclose(bessel_k(0.25, x), [bessel_k(0.25, float(v)) for v in x], rtol=0, atol=0)


def test_tricomi_examples():
    assert tricomi_u(0, 0.7, 2.0) == pytest.approx(1.0)
    assert tricomi_u(1, 1, 1).real == pytest.approx(float(mp.e * mp.e1(1)), rel=1e-12)
    z = 1e3
    assert abs(tricomi_u(0.3, 1.4, z) * z**0.3 - 1) < 5.0 / z


@pytest.mark.parametrize(
    "a,b,z",
    [(0.5, 1.6, 0.3), (0.2 + 0.4j, 1.3, 2.0 - 1.0j), (-0.7, 0.6, 5.0), (1.2 - 0.3j, 1.9, 30.0), (0.4, 1.5, 0.7 + 0.7j)],
)
def test_tricomi_against_mpmath(a, b, z):
    ref = complex(mp.hyperu(a, b, z))
    assert abs(tricomi_u(a, b, z) - ref) <= 1e-10 * abs(ref)


@pytest.mark.parametrize("mu", [0.1, 0.25, 0.5, 0.75, 0.9])
@pytest.mark.parametrize("x", [0.05, 0.5, 3.0, 20.0])
def test_whittaker_bessel_reduction(mu, x):
    w = whittaker_w(0, mu, 2 * x)
    assert abs(w - math.sqrt(2 * x / math.pi) * float(bessel_k(mu, x))) <= 1e-9 * abs(w)


@pytest.mark.parametrize(
    "kappa,mu,z",
    [(0.3, 0.2, 1.0), (-0.5 + 0.2j, 0.7, 2.0 - 2.0j), (0.2 - 0.4j, 0.45, 0.1 + 0.1j), (1.1, 0.3, 15.0)],
)
def test_whittaker_against_mpmath(kappa, mu, z):
    ref = complex(mp.whitw(kappa, mu, z))
    assert abs(whittaker_w(kappa, mu, z) - ref) <= 1e-10 * abs(ref)


def test_whittaker_equation_residual():
    # -w'' + ((mu^2 - 1/4)/z^2 - kappa/z + 1/4) w = 0, checked with 4th-order differences
    kappa, mu = 0.4, 0.3
    # finer grids amplify rounding noise through the second difference
    z = log_grid(0.1, 20.0, 1000)
    w = np.array([whittaker_w(kappa, mu, v) for v in z])
    spec = RadialOperatorSpec(0, mu, -kappa / (2 * mu))
    res = apply_whittaker(spec, w, z) + 0.25 * w
    assert np.max(np.abs(res[3:-3])) < 1e-8 * np.max(np.abs(w))


def test_policy_validation():
    with pytest.raises(ValueError):
        EvalPolicy(rel_tol=0)
    with pytest.raises(ValueError):
        EvalPolicy(series_radius=30.0, series_asymptotic_switch=25.0)


def test_policy_regions_agree():
    narrow = EvalPolicy(series_radius=0.5, series_asymptotic_switch=40.0)
    for x in (0.7, 2.0, 30.0):
        assert float(bessel_k(0.35, x, narrow)) == pytest.approx(float(bessel_k(0.35, x)), rel=1e-11)
