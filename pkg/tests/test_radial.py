import cmath
import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from scipy import special

from anyonext.defect import c_alpha
from anyonext.harmonic import GridWarning, RadialOperatorSpec, apply_whittaker, log_grid
from anyonext.radial import (
    InconclusiveError,
    OriginCondition,
    boundary_ratio,
    deficiency_normalization,
    deficiency_scan,
    frobenius_branches,
    matching_function,
    pure_ab_energy,
    shoot_eigenvalues,
    whittaker_defect,
)


def test_origin_condition_kinds():
    assert OriginCondition.from_beta(math.inf).kind == "friedrichs"
    assert OriginCondition.from_beta(0.0).kind == "krein_like"
    assert OriginCondition.from_beta(-2.0).kind == "beta"
    assert OriginCondition.from_beta(-2.0, 0.3).kind == "deformed_beta"
    with pytest.raises(ValueError):
        OriginCondition("beta", 0.0)
    with pytest.raises(ValueError):
        OriginCondition("beta", math.inf)
    with pytest.raises(ValueError):
        OriginCondition("robin", 1.0)


def test_boundary_ratio():
    a = 0.3
    assert boundary_ratio(a, -2.0) == pytest.approx(-(2 ** (2 * a)) * math.pi * a * math.gamma(a) ** 2 / 2, rel=1e-14)


def test_pure_ab_half_flux():
    res = shoot_eigenvalues(RadialOperatorSpec(0, 0.5), OriginCondition.from_beta(-math.pi**2), (-100.0, -1e-6))
    assert len(res.eigenvalues) == 1
    assert res.eigenvalues[0] == pytest.approx(-1.0, abs=1e-6)
    assert res.eigenpairs[0].nodes == 0
    assert res.eigenpairs[0].lam == pytest.approx(1.0, abs=1e-6)


def test_pure_ab_quarter_flux():
    a = 0.25
    beta = -c_alpha(a) * 2 ** (2 * a)
    res = shoot_eigenvalues(RadialOperatorSpec(0, a), OriginCondition.from_beta(beta), (-100.0, -1e-3))
    assert len(res.eigenvalues) == 1
    assert res.eigenvalues[0] == pytest.approx(-4.0, abs=1e-5)
    assert pure_ab_energy(a, beta) == pytest.approx(-4.0, rel=1e-13)


def test_pure_ab_positive_beta_has_no_bound_state():
    res = shoot_eigenvalues(RadialOperatorSpec(0, 0.4), OriginCondition.from_beta(3.0), (-100.0, -1e-4))
    assert res.eigenvalues == []
    with pytest.raises(ValueError):
        pure_ab_energy(0.4, 3.0)


@pytest.mark.slow
@pytest.mark.parametrize("a", [0.25, 0.75])
@pytest.mark.parametrize("k", [0, -1, 1])
def test_friedrichs_has_no_negative_spectrum(a, k):
    res = shoot_eigenvalues(RadialOperatorSpec(k, a), OriginCondition.friedrichs(), (-100.0, -1e-8))
    assert res.eigenpairs == []


def test_window_validation():
    with pytest.raises(ValueError):
        shoot_eigenvalues(RadialOperatorSpec(0, 0.5), OriginCondition.friedrichs(), (-1.0, 0.5))


def _connection_energy(a, s0, beta):
    # decaying solution W_(kappa, a)(2 lam r); its branch ratio at 0 must equal K / beta
    K = 2 ** (2 * a) * mp.pi * a * mp.gamma(a) ** 2

    def f(e):
        lam = mp.sqrt(s0 * s0 - e)
        kap = -2 * a * s0 / (2 * lam)
        sing = mp.gamma(2 * a) / mp.gamma(0.5 + a - kap) * (2 * lam) ** (0.5 - a)
        reg = mp.gamma(-2 * a) / mp.gamma(0.5 - a - kap) * (2 * lam) ** (0.5 + a)
        return sing / reg - K / beta

    return f


@pytest.mark.parametrize("a,s0,beta", [(0.3, 0.6, -20.0), (0.7, -0.4, -15.0)])
def test_constant_coulomb_term_matches_connection_formula(a, s0, beta):
    res = shoot_eigenvalues(RadialOperatorSpec(0, a, s0), OriginCondition("deformed_beta", beta, s0), (-200.0, -1e-3))
    assert len(res.eigenvalues) == 1
    e = res.eigenvalues[0]
    with mp.workdps(30):
        ref = float(mp.findroot(_connection_energy(a, s0, beta), e))
    assert e == pytest.approx(ref, rel=1e-8)


def test_matching_function_sign_change_brackets_root():
    spec, bc = RadialOperatorSpec(0, 0.5), OriginCondition.from_beta(-math.pi**2)
    lo = matching_function(spec, bc, -1.2)[0]
    hi = matching_function(spec, bc, -0.8)[0]
    assert lo * hi < 0


@pytest.mark.parametrize("nu,b", [(0.3, 0.0), (0.3, 0.8), (0.7, -0.5)])
def test_frobenius_branches_leading_powers(nu, b):
    r = 1e-6
    (ur, _), (us, _) = frobenius_branches(nu, b, -1.0 + 0j, r)
    assert abs(ur) / r ** (0.5 + nu) == pytest.approx(1.0, rel=1e-4)
    assert abs(us) / r ** (0.5 - nu) == pytest.approx(1.0, rel=1e-4)


@pytest.mark.parametrize("a,s0,k", [(0.3, 0.0, 0), (0.3, 0.7, 0), (0.7, -0.4, -1), (0.6, 0.2, -1)])
@pytest.mark.parametrize("sign", [1, -1])
def test_defect_function_against_mpmath(a, s0, k, sign):
    g = whittaker_defect(a, s0, k, sign)
    ph = cmath.exp(sign * 1j * math.pi / 4)
    mu = abs(a + k)
    norm = complex(sign * mp.mpc(ph) ** (0.5 - mu) / mp.gamma(0.5 + mu + (1 / ph) * (a + k) * s0))
    for r in (0.05, 0.7, 3.0, 12.0):
        ref = norm * complex(mp.whitw(-ph * (a + k) * s0, mu, 2 * r / ph))
        assert g(r) == pytest.approx(ref, rel=1e-9, abs=1e-300)
    assert deficiency_normalization(a, s0, k, sign) == pytest.approx(norm, rel=1e-12)


@pytest.mark.parametrize("sign", [1, -1])
def test_defect_reduces_to_bessel_without_coulomb(sign):
    a = 0.35
    g = whittaker_defect(a, 0.0, 0, sign)
    r = np.array([0.1, 0.9, 4.0, 10.0])
    z = cmath.exp(-sign * 1j * math.pi / 4) * r
    ref = np.sqrt(r) * special.kv(a, z)
    ratio = g(r) / ref
    assert np.allclose(ratio, ratio[0], rtol=1e-8)


@pytest.mark.parametrize("a,s0,k", [(0.3, 0.5, 0), (0.7, -0.4, -1)])
@pytest.mark.parametrize("sign", [1, -1])
def test_defect_solves_shifted_whittaker_equation(a, s0, k, sign):
    grid = log_grid(0.05, 20.0, 600)
    u = whittaker_defect(a, s0, k, sign)(grid)
    res = apply_whittaker(RadialOperatorSpec(k, a, s0), u, grid) - sign * 1j * u
    norm = math.sqrt(np.trapezoid(np.abs(u) ** 2, grid))
    assert np.max(np.abs(res[3:-3])) < 1e-6 * norm


@pytest.mark.parametrize("a,s0", [(0.3, 0.0), (0.3, 0.7), (0.7, -0.4)])
def test_defect_origin_behaviour(a, s0):
    for k in (0, -1):
        g = whittaker_defect(a, s0, k, 1)
        slope = math.log(abs(g(1e-5)) / abs(g(1e-6))) / math.log(10.0)
        assert slope == pytest.approx(0.5 - abs(a + k), rel=0.02)


def test_defect_rejects_other_sectors():
    with pytest.raises(ValueError):
        whittaker_defect(0.3, 0.0, 1, 1)
    with pytest.raises(ValueError):
        whittaker_defect(0.3, 0.0, 0, 2)


@pytest.mark.parametrize("a,s0", [(0.3, 0.0), (0.7, 0.5), (0.5, -0.3)])
def test_deficiency_indices(a, s0):
    total = [0, 0]
    for k in range(-3, 3):
        n = deficiency_scan(RadialOperatorSpec(k, a, s0))
        assert n == ((1, 1) if k in (0, -1) else (0, 0))
        total = [total[0] + n[0], total[1] + n[1]]
    assert total == [2, 2]


def test_deficiency_scan_k3():
    assert deficiency_scan(RadialOperatorSpec(3, 0.3)) == (0, 0)


def test_deficiency_scan_is_inconclusive_near_unit_order():
    # |k + alpha| = 1 sits on the L^2 threshold of r^(1/2 - nu)
    with pytest.raises(InconclusiveError):
        deficiency_scan(RadialOperatorSpec(1, 1e-9))
