"""Quadratic forms of the singular realizations, the boundary charge and
the explicit lower bound.

A state is held as psi = phi + q * chi * zeta * G_lam (zeta = 1 unless the
decomposition is deformed).  The regular part phi is a
:class:`PlaneFunction` returning its value and Cartesian gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import optimize

from .defect import (
    Cutoff,
    DefectG,
    Deformation,
    c_alpha,
    cutoff_radial,
    defect_difference,
    g_eval,
    g_deriv,
    zeta_eval,
    _k,
)
from .expr import parse
from .fields import (
    Continuous,
    DiscontinuousPerp,
    FluxParams,
    Perturbation,
    RadialPerp,
    Zero,
    ab_potential_xy,
    field_xy,
    validate,
)
from .quadrature import integrate_plane
from .specfun import gamma

__all__ = [
    "PlaneFunction",
    "FormDecomposition",
    "FormParams",
    "QuadSpec",
    "FormValue",
    "VariantMismatch",
    "DivergentForm",
    "ChargeExtractionError",
    "NearZeroDenominator",
    "BoundaryCharge",
    "ChargeResult",
    "NoRootError",
    "s_perp_at_origin",
    "expr_function",
    "radial_mode",
    "singular_part",
    "redecompose",
    "q_friedrichs",
    "xi_continuous",
    "xi_tilde",
    "xi_deformed",
    "q_beta",
    "q_beta_bounded",
    "norm_sq",
    "charge_extraction",
    "boundary_charge",
    "lambda_star",
    "lower_bound",
    "lower_bound_point",
    "BoundPoint",
    "wronskian_limit",
    "DecayReport",
    "regular_decay_check",
    "IndependenceReport",
    "lambda_independence",
    "cutoff_independence",
]

INF = math.inf


class VariantMismatch(ValueError):
    pass


class DivergentForm(ValueError):
    pass


class ChargeExtractionError(ArithmeticError):
    pass


class NearZeroDenominator(ZeroDivisionError):
    pass


class NoRootError(ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadSpec:
    rel_tol: float = 1e-10
    angular_nodes: int = 48


@dataclass(frozen=True)
class PlaneFunction:
    """f(x, y) -> (value, d/dx, d/dy) with its small-r exponent and decay rate."""

    f: Callable
    origin_exponent: float = 1.0
    decay: float = 1.0

    def __call__(self, x, y):
        return self.f(x, y)

    def __add__(self, other: "PlaneFunction") -> "PlaneFunction":
        a, b = self.f, other.f

        def g(x, y):
            v1, gx1, gy1 = a(x, y)
            v2, gx2, gy2 = b(x, y)
            return v1 + v2, gx1 + gx2, gy1 + gy2

        return PlaneFunction(
            g, min(self.origin_exponent, other.origin_exponent), min(self.decay, other.decay)
        )


def expr_function(src: str, origin_exponent: float | None = None, decay: float = 1.0) -> PlaneFunction:
    """Plane function from an expression string, differentiated symbolically."""
    e = parse(src)
    dx, dy = e.diff("x"), e.diff("y")

    def f(x, y):
        c = lambda v: np.asarray(v, dtype=complex) + 0j * np.asarray(x)
        return c(e(x, y)), c(dx(x, y)), c(dy(x, y))

    if origin_exponent is None:
        origin_exponent = _estimate_exponent(f)
    return PlaneFunction(f, origin_exponent, decay)


def _estimate_exponent(f) -> float:
    th = 2 * np.pi * np.arange(16) / 16 + 0.1
    radii = np.array([1e-6, 1e-5])
    mags = []
    for r in radii:
        with np.errstate(all="ignore"):
            v = np.abs(f(r * np.cos(th), r * np.sin(th))[0])
        mags.append(float(np.max(v)))
    if mags[0] == 0.0 or mags[1] == 0.0:
        return 2.0
    return float(np.clip(np.log(mags[1] / mags[0]) / np.log(10.0) - 0.05, -0.99, 2.0))


def radial_mode(profile: Callable, dprofile: Callable, k: int, exponent: float, decay: float) -> PlaneFunction:
    """u(r) e^{ik theta} as a plane function, given u and u'."""

    def f(x, y):
        r = np.hypot(x, y)
        ph = ((x + 1j * y) / r) ** k if k >= 0 else ((x - 1j * y) / r) ** (-k)
        u, du = profile(r), dprofile(r)
        ex, ey = x / r, y / r
        # grad(u e^{ik t}) = u' e^{ik t} x_hat + (i k u / r) e^{ik t} t_hat
        gx = (du * ex - 1j * k * u / r * ey) * ph
        gy = (du * ey + 1j * k * u / r * ex) * ph
        return u * ph, gx, gy

    return PlaneFunction(f, exponent, decay)


@dataclass(frozen=True)
class FormParams:
    beta: float
    flux: FluxParams
    perturbation: Perturbation = field(default_factory=Zero)
    cutoff: Cutoff | None = None

    def cutoff_for(self, lam: float) -> Cutoff:
        return self.cutoff if self.cutoff is not None else Cutoff.default(lam)


@dataclass(frozen=True)
class FormDecomposition:
    regular_part: PlaneFunction
    charge: complex
    lam: float
    deformed: bool = False

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError("lambda must be positive")


@dataclass
class FormValue:
    value: float
    terms: dict
    diagnostics: dict


@dataclass
class DecayReport:
    """Boundary mass r^-1 int |phi|^2 and flux r int |d_r phi|^2 over circles of shrinking radius."""

    radii: np.ndarray
    boundary_mass: np.ndarray
    boundary_flux: np.ndarray
    mass_slope: float
    flux_slope: float
    passed: bool


def _tail_slope(r: np.ndarray, v: np.ndarray) -> float:
    if np.all(v <= 1e-300):
        return math.inf
    v = np.maximum(v, 1e-300)
    return float(np.polyfit(np.log(r[-4:]), np.log(v[-4:]), 1)[0])


def regular_decay_check(
    phi: PlaneFunction, r0: float = 0.1, halvings: int = 12, nodes: int = 32, min_slope: float = 0.02
) -> DecayReport:
    """Sampled check that both boundary integrals vanish as r -> 0: a log-log
    slope above ``min_slope`` over the four smallest radii, or exact zeros."""
    radii = r0 * 0.5 ** np.arange(halvings + 1)
    th = 2 * np.pi * np.arange(nodes) / nodes
    mass, flux = [], []
    for r in radii:
        x, y = r * np.cos(th), r * np.sin(th)
        v, gx, gy = phi(x, y)
        dr = (x * gx + y * gy) / r
        mass.append(2 * np.pi * float(np.mean(np.abs(v) ** 2)))
        flux.append(2 * np.pi * r * r * float(np.mean(np.abs(dr) ** 2)))
    mass, flux = np.array(mass), np.array(flux)
    ms, fs = _tail_slope(radii, mass), _tail_slope(radii, flux)
    return DecayReport(radii, mass, flux, ms, fs, bool(ms > min_slope and fs > min_slope))


def s_perp_at_origin(S: Perturbation) -> float:
    if isinstance(S, DiscontinuousPerp):
        return S.s_perp_at_origin
    if isinstance(S, RadialPerp):
        return S.s0
    return 0.0


def _needs_deformation(S: Perturbation, alpha: float) -> bool:
    # zeta = 1 for alpha < 1/2, so either decomposition is acceptable there
    return s_perp_at_origin(S) != 0.0 and alpha >= 0.5 - 1e-12


# ---------------------------------------------------------------------------
# singular part chi * zeta * G and its re-decomposition
# ---------------------------------------------------------------------------


def singular_part(alpha: float, lam: float, cut: Cutoff, s: float):
    """Radial function r -> (chi zeta G, d/dr of it)."""
    d = DefectG(alpha, lam)
    z = Deformation(alpha, s)

    def h(r):
        chi, dchi, _ = cutoff_radial(cut, r)
        zv, dz, _ = zeta_eval(z, r)
        g, dg = g_eval(d, r), g_deriv(d, r)
        return chi * zv * g, dchi * zv * g + chi * dz * g + chi * zv * dg

    return h


def _radial_to_plane(h, exponent: float, decay: float) -> PlaneFunction:
    def f(x, y):
        r = np.hypot(x, y)
        v, dv = h(r)
        return v + 0j, dv * x / r + 0j, dv * y / r + 0j

    return PlaneFunction(f, exponent, decay)


def redecompose(
    base: FormDecomposition, alpha: float, base_cut: Cutoff, lam: float, cut: Cutoff, s: float = 0.0
) -> FormDecomposition:
    """The same state psi written with scale ``lam`` and cutoff ``cut``.

    The difference of singular parts is evaluated with the series for
    G_a - G_b inside the region where both cutoffs equal one, so the new
    regular part carries no cancellation error near the origin.
    """
    q = base.charge
    la = base.lam
    r_in = min(base_cut.r1, cut.r1)
    z = Deformation(alpha, s if base.deformed else 0.0)
    sa = singular_part(alpha, la, base_cut, z.s_perp0)
    sb = singular_part(alpha, lam, cut, z.s_perp0)

    def h(r):
        r = np.asarray(r, dtype=float)
        v = np.empty_like(r)
        dv = np.empty_like(r)
        inner = r < r_in
        if np.any(inner):
            ri = r[inner]
            dd, ddd = defect_difference(alpha, la, lam, ri)
            zv, dz, _ = zeta_eval(z, ri)
            v[inner] = zv * dd
            dv[inner] = dz * dd + zv * ddd
        if np.any(~inner):
            ro = r[~inner]
            va, dva = sa(ro)
            vb, dvb = sb(ro)
            v[~inner] = va - vb
            dv[~inner] = dva - dvb
        return q * v, q * dv

    diff = _radial_to_plane(h, alpha, min(la, lam))
    return FormDecomposition(base.regular_part + diff, q, lam, base.deformed)


# ---------------------------------------------------------------------------
# Form evaluation
# ---------------------------------------------------------------------------


class _Ctx:
    """Shared grid evaluation of every field entering the form integrands."""

    def __init__(self, params: FormParams, psi: FormDecomposition, quad: QuadSpec):
        self.alpha = params.flux.alpha
        self.S = params.perturbation
        self.lam = psi.lam
        self.quad = quad
        self.cut = params.cutoff_for(psi.lam)
        self.s = s_perp_at_origin(self.S) if psi.deformed else 0.0
        self.phi = psi.regular_part
        self.d = DefectG(self.alpha, self.lam)
        self.zeta = Deformation(self.alpha, self.s)

    def fields(self, x, y):
        r = np.hypot(x, y)
        ax, ay = ab_potential_xy(self.alpha, x, y)
        sx, sy = field_xy(self.S, x, y)
        chi, dchi, lchi = cutoff_radial(self.cut, r)
        zv, dz, lz = zeta_eval(self.zeta, r)
        g, dg = g_eval(self.d, r), g_deriv(self.d, r)
        return r, ax, ay, sx, sy, chi, dchi, lchi, zv, dz, lz, g, dg

    def integrate(self, f, exponent: float, decay: float) -> float:
        res = integrate_plane(
            f,
            singular_exponent=max(exponent, -1.98),
            decay=decay,
            angular_nodes=self.quad.angular_nodes,
            rel_tol=self.quad.rel_tol,
        )
        return res.value


def _cov(phi_vals, ax, ay):
    v, gx, gy = phi_vals
    return -1j * gx + ax * v, -1j * gy + ay * v


def q_friedrichs(
    flux: FluxParams, S: Perturbation, psi: PlaneFunction, quad: QuadSpec = QuadSpec()
) -> float:
    """int |(-i grad + A + S) psi|^2 over the plane."""
    a = flux.alpha

    def f(x, y):
        ax, ay = ab_potential_xy(a, x, y)
        sx, sy = field_xy(S, x, y)
        v, gx, gy = psi(x, y)
        px, py = -1j * gx + (ax + sx) * v, -1j * gy + (ay + sy) * v
        return np.abs(px) ** 2 + np.abs(py) ** 2

    res = integrate_plane(
        f,
        singular_exponent=max(2 * psi.origin_exponent - 2, -1.98),
        decay=2 * psi.decay,
        angular_nodes=quad.angular_nodes,
        rel_tol=quad.rel_tol,
    )
    return float(res.value.real)


def norm_sq(psi: FormDecomposition, alpha: float, cut: Cutoff, s: float = 0.0, quad: QuadSpec = QuadSpec()) -> float:
    """||phi + q chi zeta G||^2."""
    sp = singular_part(alpha, psi.lam, cut, s if psi.deformed else 0.0)
    phi, q = psi.regular_part, psi.charge

    def f(x, y):
        v = phi(x, y)[0] + q * sp(np.hypot(x, y))[0]
        return np.abs(v) ** 2

    res = integrate_plane(
        f,
        singular_exponent=max(-2 * alpha, 2 * phi.origin_exponent, -1.98) if q != 0 else 2 * phi.origin_exponent,
        decay=2 * min(phi.decay, psi.lam),
        angular_nodes=quad.angular_nodes,
        rel_tol=quad.rel_tol,
    )
    return float(res.value.real)


def _deformed_core(ctx: _Ctx, r, sperp, g):
    """2 S.A zeta G - (Lap zeta) G - 2 grad zeta . grad G, with the leading
    r^(-1-alpha) pieces cancelled analytically."""
    a, s, lam = ctx.alpha, ctx.s, ctx.lam
    if s == 0.0 or a < 0.5 - 1e-12:
        zv = zeta_eval(ctx.zeta, r)[0]
        return 2 * a * sperp * zv * g / r
    # below rounding level S_perp - s is noise that 1/r would amplify
    ds = sperp - s
    ds = np.where(np.abs(ds) <= 256 * np.finfo(float).eps * abs(s), 0.0, ds)
    if abs(a - 0.5) <= 1e-12:
        k = lam**1.5 * _k(0.5, lam * r)
        return ds * g / r + s * sperp * np.log(r) * g + 2 * s * (np.log(r) + 1.0) * k
    c = a * s / (a - 0.5)
    k = lam ** (a + 1.0) * _k(1.0 - a, lam * r)
    return 2 * a * ds * g / r - 2 * a * c * sperp * g - 2 * c * k


def _xi_terms(ctx: _Ctx) -> dict:
    a = ctx.alpha
    lam = ctx.lam

    def f_ss(x, y):
        r, ax, ay, sx, sy, chi, dchi, lchi, zv, dz, lz, g, dg = ctx.fields(x, y)
        return (sx * sx + sy * sy) * chi**2 * zv**2 * g * g

    def f_cut(x, y):
        r, ax, ay, sx, sy, chi, dchi, lchi, zv, dz, lz, g, dg = ctx.fields(x, y)
        # -<G| zeta^2 grad chi^2 . grad G> - <G| zeta^2 chi Lap chi G> - <G| zeta (grad chi^2 . grad zeta) G>
        return -zv**2 * 2 * chi * dchi * dg * g - zv**2 * chi * lchi * g * g - zv * 2 * chi * dchi * dz * g * g

    def f_sa(x, y):
        r, ax, ay, sx, sy, chi, dchi, lchi, zv, dz, lz, g, dg = ctx.fields(x, y)
        sperp = (-sx * y + sy * x) / r
        return chi**2 * zv * _deformed_core(ctx, r, sperp, g) * g

    dec = 2 * lam
    out = {}
    if not isinstance(ctx.S, Zero):
        out["xi_s2"] = ctx.integrate(f_ss, -2 * a, dec).real
        out["xi_sa"] = ctx.integrate(f_sa, _sa_exponent(ctx), dec).real
    else:
        out["xi_s2"] = 0.0
        out["xi_sa"] = 0.0
    out["xi_cutoff"] = 0.0 if ctx.cut.is_identity else ctx.integrate(f_cut, 0.0, dec).real
    return out


def _sa_exponent(ctx: _Ctx) -> float:
    a = ctx.alpha
    nu = getattr(ctx.S, "holder_exponent", 1.0)
    if ctx.s == 0.0:
        return nu - 1 - 2 * a if a >= 0.5 else -1 - 2 * a
    if a < 0.5:
        return -1 - 2 * a
    # the K_(1-alpha) G piece behaves like 1/r (with a log at alpha = 1/2)
    return min(nu - 1 - 2 * a, -1.0) - 0.02


def xi_continuous(params: FormParams, lam: float, quad: QuadSpec = QuadSpec()) -> float:
    """The |q|^2 correction for a continuous perturbation with cutoff chi."""
    S = params.perturbation
    if not isinstance(S, (Continuous, Zero, RadialPerp)):
        raise VariantMismatch("xi_continuous needs a continuous perturbation")
    if isinstance(S, RadialPerp) and S.s0 != 0.0:
        raise VariantMismatch("field has a non-zero perpendicular limit at the origin")
    if isinstance(S, Continuous):
        a = params.flux.alpha
        if a >= 0.5 and not S.holder_exponent > 2 * a - 1:
            raise DivergentForm("S.A G^2 is not integrable: holder exponent too small")
    dummy = FormDecomposition(PlaneFunction(lambda x, y: (0 * x, 0 * x, 0 * x)), 0.0, lam)
    ctx = _Ctx(params, dummy, quad)
    return sum(_xi_terms(ctx).values())


def xi_tilde(flux: FluxParams, S: Perturbation, lam: float, quad: QuadSpec = QuadSpec()) -> float:
    """2 int S.A G^2 over the plane (bounded S, chi = 1)."""
    a = flux.alpha
    d = DefectG(a, lam)
    if isinstance(S, RadialPerp):
        # radial field: the angular average is exact on the axis
        f = lambda x, y: 2 * a * S.S(np.hypot(x, y)) / np.hypot(x, y) * g_eval(d, np.hypot(x, y)) ** 2
        res = integrate_plane(f, -1 - 2 * a, 2 * lam, rel_tol=quad.rel_tol, radial=True)
        return float(res.value.real)

    def f(x, y):
        ax, ay = ab_potential_xy(a, x, y)
        sx, sy = field_xy(S, x, y)
        return 2 * (sx * ax + sy * ay) * g_eval(d, np.hypot(x, y)) ** 2

    res = integrate_plane(f, -1 - 2 * a, 2 * lam, quad.angular_nodes, quad.rel_tol)
    return float(res.value.real)


def xi_deformed(params: FormParams, lam: float, quad: QuadSpec = QuadSpec()) -> float:
    """The |q|^2 correction with the deformed defect chi zeta G."""
    dummy = FormDecomposition(PlaneFunction(lambda x, y: (0 * x, 0 * x, 0 * x)), 0.0, lam, deformed=True)
    ctx = _Ctx(params, dummy, quad)
    return sum(_xi_terms(ctx).values())


def q_beta(params: FormParams, psi: FormDecomposition, quad: QuadSpec = QuadSpec()) -> FormValue:
    """Value of the singular form on psi = phi + q chi (zeta) G_lam."""
    S = params.perturbation
    a = params.flux.alpha
    validate(S, params.flux)
    if a >= 0.5 - 1e-12 and psi.deformed != _needs_deformation(S, a):
        raise VariantMismatch(
            "deformed decomposition required iff the perpendicular field is non-zero at the origin"
        )
    q = complex(psi.charge)
    ctx = _Ctx(params, psi, quad)
    lam = psi.lam
    phi = psi.regular_part
    terms = {}
    terms["friedrichs"] = q_friedrichs(params.flux, S, phi, quad)
    if q == 0:
        return FormValue(terms["friedrichs"], terms, {"lambda": lam})
    if math.isinf(params.beta):
        return FormValue(INF, terms, {"lambda": lam, "note": "Friedrichs member forces q = 0"})

    pe = phi.origin_exponent
    dec = min(phi.decay, lam) + lam

    def f_mass(x, y):
        r, ax, ay, sx, sy, chi, dchi, lchi, zv, dz, lz, g, dg = ctx.fields(x, y)
        v = phi(x, y)[0]
        return np.conj(v) * chi * zv * g

    def f_mass_g(x, y):
        r, ax, ay, sx, sy, chi, dchi, lchi, zv, dz, lz, g, dg = ctx.fields(x, y)
        return (chi * zv * g) ** 2

    def f_grad(x, y):
        r, ax, ay, sx, sy, chi, dchi, lchi, zv, dz, lz, g, dg = ctx.fields(x, y)
        px, py = _cov(phi(x, y), ax, ay)
        ex, ey = x / r, y / r
        # (S chi zeta - i zeta grad chi - i chi grad zeta) G
        wx = (sx * chi * zv - 1j * (zv * dchi + chi * dz) * ex) * g
        wy = (sy * chi * zv - 1j * (zv * dchi + chi * dz) * ey) * g
        return np.conj(px) * wx + np.conj(py) * wy

    def f_pot(x, y):
        r, ax, ay, sx, sy, chi, dchi, lchi, zv, dz, lz, g, dg = ctx.fields(x, y)
        v = phi(x, y)[0]
        w = (sx * sx + sy * sy) * chi * zv + zv * lchi + 2 * dchi * dz + chi * lz
        return np.conj(v) * w * g

    mass_cross = ctx.integrate(f_mass, pe - a, dec)
    mass_g = ctx.integrate(f_mass_g, -2 * a, 2 * lam).real
    grad_cross = ctx.integrate(f_grad, pe - 1 - a, dec)
    pot_cross = ctx.integrate(f_pot, pe - 1 - a, dec)
    terms["mass"] = -(lam**2) * (2 * (q * mass_cross).real + abs(q) ** 2 * mass_g)
    terms["cross"] = 2 * (q * (2 * grad_cross + pot_cross)).real
    xi = _xi_terms(ctx)
    terms.update(xi)
    xi_total = sum(xi.values())
    terms["charge"] = abs(q) ** 2 * (params.beta + c_alpha(a) * lam ** (2 * a) + xi_total)
    value = terms["friedrichs"] + terms["mass"] + terms["cross"] + terms["charge"]
    return FormValue(float(value), terms, {"lambda": lam, "xi": xi_total, "deformed": psi.deformed})


def q_beta_bounded(params: FormParams, psi: FormDecomposition, quad: QuadSpec = QuadSpec()) -> FormValue:
    """Form for bounded S with chi = 1, written through ||S psi||^2 - ||S phi||^2."""
    S = params.perturbation
    a = params.flux.alpha
    q = complex(psi.charge)
    lam = psi.lam
    phi = psi.regular_part
    d = DefectG(a, lam)
    terms = {"friedrichs": q_friedrichs(params.flux, S, phi, quad)}
    if q == 0:
        return FormValue(terms["friedrichs"], terms, {"lambda": lam})
    if math.isinf(params.beta):
        return FormValue(INF, terms, {"lambda": lam})
    pe = phi.origin_exponent
    dec = min(phi.decay, lam) + lam

    def integ(f, e, dcy):
        return integrate_plane(f, max(e, -1.98), dcy, quad.angular_nodes, quad.rel_tol).value

    def f1(x, y):
        g = g_eval(d, np.hypot(x, y))
        v = phi(x, y)[0]
        sx, sy = field_xy(S, x, y)
        ax, ay = ab_potential_xy(a, x, y)
        px, py = _cov(phi(x, y), ax, ay)
        s2 = sx * sx + sy * sy
        # -2 lam^2 conj(phi) G + 2 S^2 conj(phi) G + 4 conj(P).S G
        return np.conj(v) * g * (s2 - lam**2) * 2 + 4 * (np.conj(px) * sx + np.conj(py) * sy) * g

    def f2(x, y):
        r = np.hypot(x, y)
        g = g_eval(d, r)
        sx, sy = field_xy(S, x, y)
        return (sx * sx + sy * sy) * g * g

    cross = integ(f1, pe - 1 - a, dec)
    terms["cross"] = (q * cross).real
    terms["mass_g"] = -(lam**2) * abs(q) ** 2 * a * c_alpha(a) * lam ** (2 * a - 2)
    terms["s_g"] = abs(q) ** 2 * integ(f2, -2 * a, 2 * lam).real
    xt = xi_tilde(params.flux, S, lam, quad)
    terms["xi_tilde"] = xt
    terms["charge"] = abs(q) ** 2 * (params.beta + c_alpha(a) * lam ** (2 * a) + xt)
    value = terms["friedrichs"] + terms["cross"] + terms["mass_g"] + terms["s_g"] + terms["charge"]
    return FormValue(float(value), terms, {"lambda": lam})


# ---------------------------------------------------------------------------
# Boundary charge
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChargeResult:
    value: complex
    sequence: tuple
    estimated_order: float
    converged: bool


def charge_extraction(
    phi: Callable, alpha: float, r0: float = 0.25, halvings: int = 6, tol: float = 1e-6
) -> ChargeResult:
    """Limit of (alpha <phi> + r d<phi>/dr) / r^alpha as r -> 0.

    ``phi`` maps radii to the angular average, or to a pair (average,
    derivative).  The sequence on r0 2^-j is accelerated with repeated Aitken
    steps, which handles the unknown power of the leading correction.
    """
    rs = r0 * 2.0 ** -np.arange(halvings + 1)
    vals = []
    for r in rs:
        out = phi(np.array([r]))
        if isinstance(out, tuple):
            v, dv = complex(np.ravel(out[0])[0]), complex(np.ravel(out[1])[0])
        else:
            h = 1e-3 * r
            pts = r + h * np.array([-2.0, -1.0, 1.0, 2.0])
            fv = np.array([complex(np.ravel(phi(np.array([p])))[0]) for p in pts])
            v = complex(np.ravel(out)[0])
            dv = (fv[0] - 8 * fv[1] + 8 * fv[2] - fv[3]) / (12 * h)
        vals.append((alpha * v + r * dv) / r**alpha)
    seq = np.array(vals, dtype=complex)
    scale = max(float(np.max(np.abs(seq))), 1e-300)
    cur = seq.copy()
    order = math.nan
    for _ in range(2):
        if len(cur) < 3:
            break
        d1 = np.diff(cur)
        if np.all(np.abs(d1) <= 1e-13 * scale):
            break
        nxt = []
        for j in range(len(cur) - 2):
            a0, a1, a2 = cur[j], cur[j + 1], cur[j + 2]
            den = a2 - 2 * a1 + a0
            if abs(den) <= 1e-15 * scale:
                nxt.append(a2)
            else:
                nxt.append(a2 - (a2 - a1) ** 2 / den)
                if math.isnan(order) and abs(a1 - a0) > 0 and abs(a2 - a1) > 0:
                    order = math.log2(abs(a1 - a0) / abs(a2 - a1))
        cur = np.array(nxt)
    spread = float(np.abs(cur[-1] - cur[-2])) if len(cur) > 1 else 0.0
    converged = spread <= tol * max(1.0, abs(cur[-1]))
    if not converged:
        raise ChargeExtractionError(f"limit did not settle: last two estimates differ by {spread:.3e}")
    val = complex(cur[-1])
    if abs(val) <= 1e-10 * scale:
        val = 0j
    return ChargeResult(val, tuple(seq), order, converged)


@dataclass(frozen=True)
class BoundaryCharge:
    q: complex
    eigenvalue_condition: bool


def boundary_charge(beta: float, alpha: float, lam: float, extraction: complex, tol: float = 1e-10) -> BoundaryCharge:
    """q = 2^alpha pi Gamma(alpha) extraction / (beta + c_alpha lam^(2 alpha))."""
    if math.isinf(beta) and beta > 0:
        return BoundaryCharge(0j, False)
    den = beta + c_alpha(alpha) * lam ** (2 * alpha)
    scale = max(1.0, abs(beta))
    if abs(den) <= tol * scale:
        if abs(extraction) <= tol:
            return BoundaryCharge(0j, True)
        raise NearZeroDenominator("beta + c_alpha lam^(2 alpha) vanishes but the extraction does not")
    return BoundaryCharge(2**alpha * math.pi * gamma(alpha) * complex(extraction) / den, False)


@dataclass
class IndependenceReport:
    values: dict
    spread: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.spread < self.tol


def _spread(values: dict) -> float:
    vals = list(values.values())
    ref = vals[0]
    return max(abs(v - ref) for v in vals) / (1.0 + abs(ref))


def lambda_independence(
    params: FormParams,
    base: FormDecomposition,
    base_cut: Cutoff,
    lams=(0.5, 1.0, 2.0),
    quad: QuadSpec = QuadSpec(),
    tol: float = 1e-6,
    evaluate: Callable = None,
) -> IndependenceReport:
    """Form value of one state re-decomposed at every scale in ``lams``.

    The cutoff follows ``params.cutoff_for``; ``evaluate`` defaults to q_beta.
    """
    evaluate = evaluate or q_beta
    s = s_perp_at_origin(params.perturbation)
    vals = {}
    for lam in lams:
        cut = params.cutoff_for(lam)
        dec = redecompose(base, params.flux.alpha, base_cut, lam, cut, s)
        vals[lam] = evaluate(replace(params, cutoff=cut), dec, quad).value
    return IndependenceReport(vals, _spread(vals), tol)


def cutoff_independence(
    params: FormParams,
    base: FormDecomposition,
    base_cut: Cutoff,
    cutoffs=((0.5, 2.0), (0.25, 1.0)),
    quad: QuadSpec = QuadSpec(),
    tol: float = 1e-6,
    evaluate: Callable = None,
) -> IndependenceReport:
    """Form value of one state re-decomposed with each cutoff (r1, r2) at the base scale."""
    evaluate = evaluate or q_beta
    s = s_perp_at_origin(params.perturbation)
    vals = {}
    for c in cutoffs:
        cut = c if isinstance(c, Cutoff) else Cutoff(*c)
        dec = redecompose(base, params.flux.alpha, base_cut, base.lam, cut, s)
        vals[(cut.r1, cut.r2)] = evaluate(replace(params, cutoff=cut), dec, quad).value
    return IndependenceReport(vals, _spread(vals), tol)


def wronskian_limit(alpha: float, lam1: float, lam2: float) -> float:
    """pi (lam1^(2a) - lam2^(2a)) / (2 sin(pi a)), the r -> 0 limit of r W(G1, G2)."""
    return math.pi * (lam1 ** (2 * alpha) - lam2 ** (2 * alpha)) / (2 * math.sin(math.pi * alpha))


# ---------------------------------------------------------------------------
# Lower bound
# ---------------------------------------------------------------------------


def _lamst_residual(lam, alpha, beta, sup_s, eta):
    a = math.pi * alpha * math.tan(math.pi * alpha) * sup_s
    b = 2 * alpha / eta * sup_s**2
    return lam * lam - a * lam - b + beta / c_alpha(alpha) * lam ** (2 * (1 - alpha))


def _bracket(alpha, beta, sup_s, eta):
    """A radius above which the residual is positive for every larger lam."""
    a = math.pi * alpha * math.tan(math.pi * alpha) * sup_s
    b = 2 * alpha / eta * sup_s**2
    quad_root = 0.5 * (a + math.sqrt(a * a + 4 * b))
    if beta >= 0:
        return quad_root
    # each of a lam, b and |beta|/c lam^(2-2 alpha) stays below lam^2 / 3
    return max(quad_root, 3 * a, math.sqrt(3 * b), (3 * -beta / c_alpha(alpha)) ** (1 / (2 * alpha)))


def lambda_star(alpha: float, beta: float, sup_s: float, eta: float) -> float:
    """Largest positive root of the implicit scale equation of the lower bound."""
    if not 0 < alpha < 0.5:
        raise ValueError("the lower bound is available for 0 < alpha < 1/2")
    if not eta > 0 or sup_s < 0:
        raise ValueError("need eta > 0 and sup_s >= 0")
    c = c_alpha(alpha)
    if sup_s == 0.0 or beta == INF:
        # beta = +inf forces q = 0; the root tends to 0 as beta grows
        return 0.0 if beta >= 0 else (-beta / c) ** (1 / (2 * alpha))
    f = lambda lam: _lamst_residual(lam, alpha, beta, sup_s, eta)
    hi = max(_bracket(alpha, beta, sup_s, eta), 1e-12) * (1 + 1e-12)
    if not f(hi) > 0:
        raise NoRootError("residual is not positive above the bracket")
    # f > 0 for all lam >= hi; locate the largest crossing below hi
    grid = hi * np.geomspace(1e-9, 1.0, 400)
    vals = f(grid)
    idx = np.where((vals[:-1] <= 0) & (vals[1:] > 0))[0]
    if len(idx) == 0:
        raise NoRootError("bracket failed to straddle a sign change")
    j = idx[-1]
    root = optimize.brentq(f, grid[j], grid[j + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    # secant polish
    r1 = root * (1 + 1e-9)
    for _ in range(3):
        f0, f1 = f(root), f(r1)
        if f1 == f0:
            break
        root, r1 = r1 - f1 * (r1 - root) / (f1 - f0), root
    return float(root)


@dataclass
class BoundPoint:
    """The lower bound together with the (eps, eta) attaining it and lambda* there."""

    bound: float
    eps: float
    eta: float
    lambda_star: float


def lower_bound_point(alpha: float, beta: float, sup_s: float, grid: int = 20) -> BoundPoint:
    if not 0 < alpha < 0.5:
        raise ValueError("the lower bound is available for 0 < alpha < 1/2")
    if sup_s == 0.0:
        lst = lambda_star(alpha, beta, 0.0, 0.25)
        return BoundPoint(-(lst**2), 1.0, 0.0, lst)

    def F(eps, eta):
        return max(sup_s / math.sqrt(eps), lambda_star(alpha, beta, sup_s, eta))

    best = (INF, None)
    for eta in np.geomspace(1e-4, 0.5 * (1 - 1e-6), grid):
        for frac in np.geomspace(1e-4, 1 - 1e-6, grid):
            eps = frac * (1 - 2 * eta)
            v = F(eps, eta)
            if v < best[0]:
                best = (v, (eps, eta))

    def unpack(p):
        # p -> (eps, eta) inside 0 < eps + 2 eta < 1
        eta = 0.5 / (1 + math.exp(-p[0]))
        return (1 - 2 * eta) / (1 + math.exp(-p[1])), eta

    def obj(p):
        eps, eta = unpack(p)
        if eps <= 0 or eta <= 0:
            return INF
        return F(eps, eta)

    eps0, eta0 = best[1]
    p0 = [math.log(2 * eta0 / (1 - 2 * eta0)), math.log(eps0 / max(1 - 2 * eta0 - eps0, 1e-300))]
    res = optimize.minimize(obj, p0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 2000})
    if float(res.fun) < best[0]:
        eps, eta = unpack(res.x)
        val = float(res.fun)
    else:
        (eps, eta), val = best[1], best[0]
    return BoundPoint(-(val**2), eps, eta, lambda_star(alpha, beta, sup_s, eta))


def lower_bound(alpha: float, beta: float, sup_s: float, grid: int = 20) -> float:
    """Lower bound on the Rayleigh quotient for bounded perturbations, 0 < alpha < 1/2."""
    return lower_bound_point(alpha, beta, sup_s, grid).bound
