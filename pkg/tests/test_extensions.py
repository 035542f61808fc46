import cmath
import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from anyonext.defect import c_alpha
from anyonext.fields import RadialPerp
from anyonext.harmonic import GridWarning
from anyonext.radial import pure_ab_energy, shoot_eigenvalues, OriginCondition
from anyonext.harmonic import RadialOperatorSpec
from anyonext.extensions import (
    ExtensionU,
    anyonic_beta_match,
    classify,
    deficiency_norm,
    deficiency_residual,
    extension_spectrum,
    is_anyonic,
    is_friedrichs,
    is_krein,
    make_extension,
    symmetry_defect,
    upsilon,
)


def random_unitaries(seed, n):
    rng = np.random.default_rng(seed)
    return np.reshape(stats.unitary_group.rvs(2, size=n, random_state=rng), (n, 2, 2))


def test_matrix_is_unitary():
    U = ExtensionU(1.1, cmath.exp(0.4j) * math.cos(0.3), cmath.exp(-1.2j) * math.sin(0.3))
    assert U.unitarity_defect() < 1e-14
    with pytest.raises(ValueError):
        ExtensionU(0.0, 1.0 + 0j, 0.5 + 0j)


def test_roundtrip_random_unitaries():
    for m in random_unitaries(11, 100):
        assert np.max(np.abs(ExtensionU.from_matrix(m).matrix - m)) < 1e-14


def test_from_matrix_rejects_non_unitary():
    with pytest.raises(ValueError):
        ExtensionU.from_matrix(np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_distinguished_members():
    assert is_friedrichs(ExtensionU.friedrichs()) and not is_krein(ExtensionU.friedrichs())
    assert is_krein(ExtensionU.krein()) and not is_friedrichs(ExtensionU.krein())
    assert np.allclose(ExtensionU.anyonic(0.7).matrix, np.diag([cmath.exp(1.4j), 1.0]), atol=1e-15)


def test_is_anyonic_examples():
    ok, tau = is_anyonic(ExtensionU(0.3, cmath.exp(0.3j)))
    assert ok and tau == pytest.approx(0.3, abs=1e-14)
    assert is_anyonic(ExtensionU.krein()) == (False, None)
    assert is_anyonic(ExtensionU(0.3, cmath.exp(0.3j) * math.cos(1e-3), math.sin(1e-3) + 0j))[0] is False
    for m in random_unitaries(5, 20):
        assert not is_anyonic(ExtensionU.from_matrix(m))[0]


def test_classify_reports_matched_beta():
    out = classify(ExtensionU.anyonic(1.0), alpha=0.4)
    assert out["anyonic"] and not out["friedrichs"] and not out["krein"]
    assert out["beta"] == pytest.approx(anyonic_beta_match(0.4, 1.0))
    assert classify(ExtensionU.krein(), alpha=0.4)["beta"] is None


def test_upsilon_angular_structure():
    r = np.array([0.3, 1.0, 2.5])
    u0 = upsilon(0.3, 0.5, 0, 1)
    assert np.allclose(u0(r, 0.0), u0(r, 2.1), rtol=1e-15, atol=0)
    um = upsilon(0.3, 0.5, -1, -1)
    assert np.allclose(um(r, 0.4 + math.pi), -um(r, 0.4), rtol=1e-13, atol=0)


@pytest.mark.parametrize("a", [0.3, 0.7])
def test_deficiency_norm_against_bessel_quadrature(a):
    # s0 = 0: W_(0,a)(2z) = sqrt(2z/pi) K_a(z), so |g|^2 = |N|^2 (2r/pi) |K_a(e^{-i pi/4} r)|^2
    n = abs(complex(cmath.exp(1j * math.pi / 4) ** (0.5 - a) / special.gamma(0.5 + a)))
    z = cmath.exp(-1j * math.pi / 4)
    f = lambda r: n * n * 2 * r / math.pi * abs(special.kv(a, z * r)) ** 2
    ref = integrate.quad(f, 0, 1, epsrel=1e-12, limit=200)[0] + integrate.quad(f, 1, np.inf, epsrel=1e-12, limit=200)[0]
    assert deficiency_norm(a, 0.0, 0) == pytest.approx(math.sqrt(ref), rel=1e-8)


def _beta_closed_form(a, tau):
    # K_a(e^{-+ i pi/4} r) small-r branch ratio, solved for the boundary parameter
    return -c_alpha(a) * math.sin(tau + math.pi * a / 2) / math.sin(tau)


@pytest.mark.parametrize("a", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("tau", [0.3, 1.0, 1.5, 2.5])
def test_anyonic_beta_matches_closed_form(a, tau):
    assert anyonic_beta_match(a, tau) == pytest.approx(_beta_closed_form(a, tau), rel=1e-7)


def test_anyonic_beta_is_periodic():
    for tau in (0.2, 1.3):
        assert anyonic_beta_match(0.4, tau + math.pi) == pytest.approx(anyonic_beta_match(0.4, tau), rel=1e-9)


def test_anyonic_beta_friedrichs_point():
    assert anyonic_beta_match(0.4, 0.0) == math.inf


@pytest.mark.parametrize("a,tau", [(0.25, 0.3), (0.5, math.pi / 2), (0.75, 1.5)])
def test_anyonic_spectrum_matches_beta_solver(a, tau):
    beta = anyonic_beta_match(a, tau)
    sp = extension_spectrum(ExtensionU.anyonic(tau), a, 0.0, (-1e4, -1e-6))
    assert len(sp.eigenvalues) == 1
    shot = shoot_eigenvalues(RadialOperatorSpec(0, a), OriginCondition.from_beta(beta), (-1e3, -1e-5))
    assert sp.eigenvalues[0] == pytest.approx(shot.eigenvalues[0], rel=1e-4)
    assert sp.eigenvalues[0] == pytest.approx(pure_ab_energy(a, beta), rel=1e-4)


def test_krein_k0_eigenvalue_matches_beta_solver():
    a = 0.4
    sp = extension_spectrum(ExtensionU.krein(), a, 0.0, (-1e4, -1e-6))
    k0 = [p.energy for p in sp.eigenpairs if p.nodes == 0]
    assert len(k0) == 1
    assert k0[0] == pytest.approx(pure_ab_energy(a, anyonic_beta_match(a, math.pi / 2)), rel=1e-4)


def test_friedrichs_member_has_no_bound_state():
    assert extension_spectrum(ExtensionU.friedrichs(), 0.3, 0.0, (-1e4, -1e-6)).eigenvalues == []


def test_extension_spectrum_window_check():
    with pytest.raises(ValueError):
        extension_spectrum(ExtensionU.krein(), 0.3, 0.5, (-1.0, 0.3))


@pytest.mark.parametrize("a,s0", [(0.3, 1.0), (0.3, 0.0), (0.7, -0.5)])
def test_deficiency_residuals(a, s0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GridWarning)
        rep = deficiency_residual(a, s0, ExtensionU.krein())
    assert len(rep.residuals) == 4
    assert rep.max_residual < 1e-5
    assert rep.orthogonality < 1e-15
    assert rep.unitarity_defect < 1e-14


def test_membership_constraint():
    ext = make_extension(ExtensionU.from_matrix(random_unitaries(2, 1)[0]), 0.4)
    e = ext.element([1.0, 0.5j])
    assert ext.contains(e)
    assert np.allclose(e.c_minus, ext.U.matrix @ e.c_plus)


def test_friedrichs_member_keeps_only_regular_branch():
    # c- = c+ makes the r^(-alpha) terms of Upsilon+ and Upsilon- cancel
    a = 0.3
    ext = make_extension(ExtensionU.friedrichs(), a)
    e = ext.element([1.0, 0.0])
    r = np.array([1e-6, 1e-5])
    v = np.abs(ext.evaluate(e, r, np.zeros(2)))
    slope = math.log(v[1] / v[0]) / math.log(10.0)
    assert slope == pytest.approx(a, rel=0.02)


@settings(max_examples=4, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_symmetry_on_random_domain_members(seed):
    rng = np.random.default_rng(seed)
    a = 0.3
    m = random_unitaries(seed, 1)[0]
    ext = make_extension(ExtensionU.from_matrix(m), a)
    phi = lambda x, y: (x * x + y * y) ** 2 * np.exp(-(x * x + y * y))
    c1, c2 = rng.normal(size=(2, 2)) @ np.array([1.0, 1j]), rng.normal(size=(2, 2)) @ np.array([1.0, 1j])
    assert symmetry_defect(ext, ext.element(c1, phi), ext.element(c2)) < 1e-8


def test_symmetry_with_radial_perturbation():
    S = RadialPerp(lambda r: 0.5 * np.exp(-r), 0.5, 0.5)
    ext = make_extension(ExtensionU.anyonic(0.8), 0.3, S)
    assert symmetry_defect(ext, ext.element([1.0, 0.0]), ext.element([0.3j, 0.0])) < 1e-8


def test_make_extension_rejects_bad_flux():
    with pytest.raises(ValueError):
        make_extension(ExtensionU.krein(), 1.0)
