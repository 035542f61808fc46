"""Acceptance suite: twelve criteria at their stated tolerances.

Run ``pytest -m acceptance`` for the PASS/FAIL summary (printed at the end
of the session) or ``python tests/test_acceptance.py`` for the lines alone.
"""

import cmath
import math
import subprocess
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate, special, stats

from anyonext import defect, extensions, forms, harmonic, radial
from anyonext.defect import Cutoff, DefectG, c_alpha
from anyonext.fields import FluxParams, RadialPerp, Zero, field_from_spec
from anyonext.quadrature import integrate_plane

pytestmark = pytest.mark.acceptance

RESULTS: dict[int, tuple[bool, str]] = {}


def _rel(a, b):
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------------------
# criteria; each returns (passed, detail)
# ---------------------------------------------------------------------------


def norm_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for a in (0.1, 0.25, 0.5, 0.75, 0.9):
        for lam in (0.5, 1.0, 2.0):
            d = DefectG(a, lam)
            q = integrate_plane(lambda x, y: defect.g_eval(d, np.hypot(x, y)) ** 2, -2 * a, 2 * lam, rel_tol=1e-11)
            exact = math.pi**2 * a * lam ** (2 * a - 2) / math.sin(math.pi * a)
            worst = max(worst, _rel(q.value.real, exact))
    dt = time.perf_counter() - t0
    return worst < 1e-8 and dt < 5.0, f"max rel err {worst:.2e}, {dt:.1f} s"


def asymptotics():
    worst_slope, worst_pref = 0.0, 0.0
    r = np.geomspace(1e-4, 1e-2, 9)
    for a in (0.1, 0.25, 0.5, 0.75, 0.9):
        d = DefectG(a, 1.0)
        rem = np.array([abs(defect.g_eval(d, x) - sum(defect.g_origin_expansion(d, x)[:2])) for x in r])
        slope = np.polyfit(np.log(r), np.log(rem), 1)[0]
        worst_slope = max(worst_slope, _rel(slope, 2 - a))
        for lam in (0.5, 1.0, 2.0):
            x = 30.0 / lam
            val = defect.g_eval(DefectG(a, lam), x) * math.exp(lam * x) * math.sqrt(x)
            worst_pref = max(worst_pref, _rel(val, math.sqrt(math.pi / 2) * lam ** (a - 0.5)))
    return worst_slope < 0.05 and worst_pref < 0.01, f"slope rel err {worst_slope:.2e}, prefactor rel err {worst_pref:.2e}"


def wronskian_limit():
    worst, where = 0.0, None
    for a in (0.1, 0.25, 0.5):
        for l1, l2 in ((1.0, 2.0), (0.5, 3.0)):
            w = float(defect.wronskian_r(a, l1, l2, 1e-5))
            err = _rel(w, math.pi * (l1 ** (2 * a) - l2 ** (2 * a)) / (2 * math.sin(math.pi * a)))
            if err > worst:
                worst, where = err, (a, l1, l2)
    return worst < 1e-5, f"max rel err {worst:.2e} at (alpha, lam1, lam2) = {where}"


def pure_ab_spectrum():
    t0 = time.perf_counter()
    worst, extra = 0.0, 0
    for a in (0.25, 0.5, 0.75):
        spec = harmonic.RadialOperatorSpec(0, a)
        for lam in (0.5, 1.0, 2.0):
            beta = -c_alpha(a) * lam ** (2 * a)
            res = radial.shoot_eigenvalues(spec, radial.OriginCondition.from_beta(beta), (-100.0, -1e-3))
            if len(res.eigenvalues) != 1:
                return False, f"alpha={a} beta={beta}: {len(res.eigenvalues)} eigenvalues"
            worst = max(worst, _rel(res.eigenvalues[0], -(-beta / c_alpha(a)) ** (1 / a)))
        extra += len(radial.shoot_eigenvalues(spec, radial.OriginCondition.friedrichs(), (-100.0, -1e-8)).eigenpairs)
    dt = time.perf_counter() - t0
    return worst < 1e-5 and extra == 0 and dt < 30.0, f"max rel err {worst:.2e}, Friedrichs eigenvalues {extra}, {dt:.1f} s"


def _test_state():
    prof = lambda r: r * np.exp(-r * r) * (0.7 + 0.4j)
    dprof = lambda r: (1 - 2 * r * r) * np.exp(-r * r) * (0.7 + 0.4j)
    return forms.radial_mode(prof, dprof, 0, 1.0, 1.0) + forms.radial_mode(
        lambda r: r * r * np.exp(-r), lambda r: (2 * r - r * r) * np.exp(-r), 1, 2.0, 1.0
    )


def _spread(a, S, cuts, s_perp0=0.0, deformed=False, quad=forms.QuadSpec()):
    base_cut = cuts[0]
    base = forms.FormDecomposition(_test_state(), 0.8 - 0.3j, 1.0, deformed)
    vals = []
    for lam in (0.5, 1.0, 2.0):
        for cut in cuts:
            d = forms.redecompose(base, a, base_cut, lam, cut, s_perp0)
            params = forms.FormParams(-1.0, FluxParams(a), S, cut)
            if cut.is_identity:
                vals.append(forms.q_beta_bounded(params, d, quad).value)
            else:
                vals.append(forms.q_beta(params, d, quad).value)
    return float(np.ptp(vals) / np.mean(np.abs(vals)))


def form_independence():
    two = [Cutoff(0.5, 2.0), Cutoff(0.25, 1.0)]
    cont = field_from_spec({"variant": "continuous", "expr": "r^1.8*exp(-r^2)*(1+0.5*x/r)", "holder": 0.8})
    bounded = RadialPerp(lambda r: 0.8 * np.exp(-r) + 0.3 * r * np.exp(-r * r), 1.5, 1.0)
    disc = field_from_spec(
        {"variant": "discontinuous_perp", "expr": "0.6*exp(-r^2)*(1+0.3*x)", "expr_par": "0.09*y*(1-exp(-r^2))/r^2"}
    )
    spreads = {
        "zero": max(_spread(a, Zero(), two) for a in (0.3, 0.7)),
        "continuous": max(_spread(a, cont, two) for a in (0.3, 0.7)),
        "bounded": max(_spread(a, bounded, [Cutoff.identity()]) for a in (0.1, 0.3, 0.45)),
        "discontinuous": max(
            _spread(0.7, disc, two, 0.6, True),
            # the cross term converges slowly at alpha = 0.9; 1e-8 is still far inside the criterion
            _spread(0.9, disc, two, 0.6, True, forms.QuadSpec(1e-8, 48)),
        ),
    }
    worst = max(spreads.values())
    return worst < 1e-6, ", ".join(f"{k} {v:.1e}" for k, v in spreads.items())


def xi_closed_form():
    worst = 0.0
    a = 0.25
    for s0, lam in ((1.0, 1.0), (0.4, 2.0), (-1.5, 0.5)):
        S = RadialPerp(lambda r, s0=s0: s0 + 0 * r, 0.0, abs(s0))
        val = forms.xi_tilde(FluxParams(a), S, lam)
        worst = max(worst, _rel(val, math.pi**3 * a * s0 * lam ** (2 * a - 1) / math.cos(math.pi * a)))
    return worst < 1e-6, f"max rel err {worst:.2e}"


def _random_regular(rng, scale):
    parts = None
    for _ in range(2):
        p, b = rng.uniform(0.6, 2.0), rng.uniform(0.6, 2.0)
        k = int(rng.integers(-1, 2))
        c = scale * complex(*rng.normal(size=2))
        m = forms.radial_mode(
            lambda r, p=p, b=b, c=c: c * r**p * np.exp(-b * r),
            lambda r, p=p, b=b, c=c: c * (p * r ** (p - 1) - b * r**p) * np.exp(-b * r),
            k, p, b,
        )
        parts = m if parts is None else parts + m
    return parts


def lower_bound_coverage(n=200, seed=20260101):
    rng = np.random.default_rng(seed)
    quad = forms.QuadSpec(1e-9, 8)
    ident = Cutoff.identity()
    worst = math.inf
    bounds = {}
    for i in range(n):
        a = (0.1, 0.25, 0.4)[i % 3]
        beta = -float(rng.uniform(0.1, 3.0))
        near_ground = i % 2 == 1
        s = float(rng.uniform(0.0, 0.3 if near_ground else 1.0))
        S = RadialPerp(lambda r, s=s: s * np.exp(-0.5 * r * r) + 0 * r, s, s)
        if near_ground:
            # pure charge at the unperturbed binding scale plus a small regular part
            lam = (-beta / c_alpha(a)) ** (1 / (2 * a)) * float(rng.uniform(0.8, 1.25))
            dec = forms.FormDecomposition(_random_regular(rng, 0.05), 1.0, lam)
        else:
            dec = forms.FormDecomposition(_random_regular(rng, 1.0), 3 * complex(*rng.normal(size=2)), float(rng.uniform(0.3, 3.0)))
        key = (a, beta, s)
        if key not in bounds:
            bounds[key] = forms.lower_bound(a, beta, s)
        q = forms.q_beta_bounded(forms.FormParams(beta, FluxParams(a), S, ident), dec, quad).value
        worst = min(worst, q / forms.norm_sq(dec, a, ident, quad=quad) - bounds[key])
    lam_err = 0.0
    for a in (0.1, 0.25, 0.4):
        for beta in (-0.5, -3.0):
            exact = (-beta / c_alpha(a)) ** (1 / (2 * a))
            lam_err = max(lam_err, _rel(forms.lambda_star(a, beta, 0.0, 0.3), exact))
    return worst >= -1e-8 and lam_err < 1e-10, f"{n} states, min margin {worst:.3e}, lambda* rel err {lam_err:.1e}"


def whittaker_reductions():
    from anyonext.specfun import whittaker_w

    red = 0.0
    for mu in (0.1, 0.25, 0.5, 0.75, 1.3):
        for x in (0.05, 0.3, 1.0, 4.0, 15.0):
            w = whittaker_w(0.0, mu, 2 * x)
            red = max(red, _rel(complex(w).real, math.sqrt(2 * x / math.pi) * special.kv(mu, x)))
    res, expo = 0.0, 0.0
    for a, s0, k in ((0.3, 0.0, 0), (0.3, 0.7, 0), (0.7, -0.4, -1), (0.5, 0.5, 0), (0.8, 0.3, -1)):
        for sg in (1, -1):
            grid = harmonic.log_grid(0.05, 8.0, 400)
            u = radial.whittaker_defect(a, s0, k, sg)(grid)
            r = harmonic.apply_whittaker(harmonic.RadialOperatorSpec(k, a, s0), u, grid) - sg * 1j * u
            res = max(res, float(np.max(np.abs(r[3:-3])) / np.max(np.abs(u[3:-3]))))
        g = radial.whittaker_defect(a, s0, k, 1)
        slope = math.log(abs(g(1e-5)) / abs(g(1e-6))) / math.log(10.0)
        want = 0.5 - abs(a + k)
        # both exponents vanish at alpha = 1/2; the 2% is then taken as an absolute slope error
        expo = max(expo, _rel(slope, want) if want else abs(slope))
    ok = red < 1e-9 and res < 1e-6 and expo < 0.02
    return ok, f"W/K rel err {red:.1e}, ODE residual {res:.1e}, exponent rel err {expo:.1e}"


def deficiency_bookkeeping():
    bad = []
    for a, s0 in ((0.3, 0.0), (0.7, 0.5), (0.5, -0.3)):
        total = [0, 0]
        for k in (0, -1, 1, 2, -2, -3):
            n = radial.deficiency_scan(harmonic.RadialOperatorSpec(k, a, s0))
            if n != ((1, 1) if k in (0, -1) else (0, 0)):
                bad.append((a, s0, k, n))
            total = [total[0] + n[0], total[1] + n[1]]
        if total != [2, 2]:
            bad.append((a, s0, "total", tuple(total)))
    return not bad, "all indices as expected" if not bad else f"mismatches {bad}"


def extension_classification():
    rng = np.random.default_rng(7)
    mats = np.reshape(stats.unitary_group.rvs(2, size=50, random_state=rng), (50, 2, 2))
    rt = max(float(np.max(np.abs(extensions.ExtensionU.from_matrix(m).matrix - m))) for m in mats)
    tau = 0.3
    planted = [np.eye(2), -np.eye(2), np.diag([cmath.exp(2j * tau), 1.0])]
    wrong = 0
    for m in list(mats) + planted:
        c = extensions.classify(extensions.ExtensionU.from_matrix(m))
        wrong += c["friedrichs"] != bool(np.allclose(m, np.eye(2), atol=1e-12, rtol=0))
        wrong += c["krein"] != bool(np.allclose(m, -np.eye(2), atol=1e-12, rtol=0))
        want = abs(m[0, 1]) < 1e-12 and abs(m[1, 0]) < 1e-12 and abs(m[1, 1] - 1) < 1e-12
        wrong += c["anyonic"] != want
    match = 0.0
    for a, t in ((0.25, 0.3), (0.5, math.pi / 2), (0.75, 1.5)):
        beta = extensions.anyonic_beta_match(a, t)
        sp = extensions.extension_spectrum(extensions.ExtensionU.anyonic(t), a, 0.0, (-1e4, -1e-6))
        if len(sp.eigenvalues) != 1 or not beta < 0:
            return False, f"alpha={a} tau={t}: no single bound state"
        match = max(match, _rel(sp.eigenvalues[0], -(-beta / c_alpha(a)) ** (1 / a)))
    ok = rt < 1e-14 and wrong == 0 and match < 1e-4
    return ok, f"round trip {rt:.1e}, misclassified {wrong}, U-side vs beta-side rel err {match:.1e}"


def harmonic_consistency():
    a = 0.3
    S = RadialPerp(lambda r: 0.7 * np.exp(-r) + 0 * r, 0.7, 0.7)
    g = harmonic.log_grid(1e-2, 8.0, 1601)
    th = 2 * np.pi * np.arange(16) / 16
    X, Y = g[:, None] * np.cos(th), g[:, None] * np.sin(th)
    m = (g > 0.05) & (g < 6)
    worst = 0.0
    for k in (0, 1, -1, 2):
        f = lambda r, k=k: r ** (abs(k + a) + 0.5) * np.exp(-r * r / 2)
        psi = lambda x, y, f=f, k=k: f(np.hypot(x, y)) * np.exp(1j * k * np.arctan2(y, x)) / np.sqrt(2 * np.pi)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", harmonic.GridWarning)
            hu = harmonic.apply_radial(harmonic.RadialOperatorSpec.from_perturbation(k, a, S), np.sqrt(g) * f(g), g)
        pu = harmonic.project_mode(harmonic.plane_operator(a, S, psi, X, Y, h=2e-3 * g[:, None]), g, k)
        err = math.sqrt(integrate.trapezoid(np.abs(hu - pu)[m] ** 2, g[m]) / integrate.trapezoid(np.abs(pu)[m] ** 2, g[m]))
        worst = max(worst, err)
    return worst <= 1e-5, f"max weighted rel err {worst:.2e}"


def verify_determinism(tmp=None):
    import tempfile

    tmp = Path(tmp or tempfile.mkdtemp())
    blobs, times = [], []
    for i in range(2):
        out = tmp / f"verify{i}.json"
        t0 = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "anyonext", "verify", "--seed", "1", "--out", str(out)], capture_output=True)
        times.append(time.perf_counter() - t0)
        if proc.returncode != 0:
            return False, f"verify exited {proc.returncode}: {proc.stderr.decode()[-300:]}"
        blobs.append(out.read_bytes())
    same = blobs[0] == blobs[1]
    return same and max(times) < 300, f"identical={same}, runs {times[0]:.0f} s and {times[1]:.0f} s"


CRITERIA = {
    1: ("norm identity", norm_identity),
    2: ("origin and infinity asymptotics", asymptotics),
    3: ("Wronskian limit at r = 1e-5", wronskian_limit),
    4: ("pure AB bound state", pure_ab_spectrum),
    5: ("lambda and cutoff independence", form_independence),
    6: ("closed-form cross term", xi_closed_form),
    7: ("lower bound", lower_bound_coverage),
    8: ("Whittaker reductions", whittaker_reductions),
    9: ("deficiency indices", deficiency_bookkeeping),
    10: ("extension classification", extension_classification),
    11: ("harmonic consistency", harmonic_consistency),
    12: ("verify determinism", verify_determinism),
}


def line(n: int, ok: bool, detail: str) -> str:
    return f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {CRITERIA[n][0]}: {detail}"


def _run(n: int):
    ok, detail = CRITERIA[n][1]()
    RESULTS[n] = (ok, detail)
    print(line(n, ok, detail))
    assert ok, detail


@pytest.mark.parametrize("n", [1, 2, 4, 5, 6, 7, 8, 9, 10, 11])
def test_criterion(n):
    _run(n)


@pytest.mark.xfail(
    strict=True,
    reason="at alpha = 1/2 the exact r W is -(pi/2) exp(-3r), which is 3e-5 from the limit at r = 1e-5",
)
def test_criterion_3():
    _run(3)


def test_criterion_3_shortfall_is_exact():
    # G_lam = sqrt(pi/2) r^(-1/2) e^(-lam r) at alpha = 1/2, so r W = -(pi/2)(l2 - l1) e^(-(l1 + l2) r)
    for l1, l2 in ((1.0, 2.0), (0.5, 3.0)):
        r = 1e-5
        exact = -(math.pi / 2) * (l2 - l1) * math.exp(-(l1 + l2) * r)
        assert float(defect.wronskian_r(0.5, l1, l2, r)) == pytest.approx(exact, rel=1e-10)


@pytest.mark.slow
def test_criterion_12(tmp_path):
    ok, detail = verify_determinism(tmp_path)
    RESULTS[12] = (ok, detail)
    print(line(12, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n in CRITERIA:
        ok, detail = CRITERIA[n][1]()
        failed += not ok
        print(line(n, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
