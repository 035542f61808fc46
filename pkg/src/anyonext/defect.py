"""The radial defect function G(r) = lam^alpha K_alpha(lam r), the smooth
cutoff chi, the deformation zeta used when the perpendicular field does not
vanish at the origin, and their expansions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .specfun import DEFAULT_POLICY, _k_any, gamma

__all__ = [
    "DefectG",
    "Cutoff",
    "Deformation",
    "ExpansionTerm",
    "c_alpha",
    "g_eval",
    "g_deriv",
    "g_norm_sq",
    "g_origin_expansion",
    "g_infinity_prefactor",
    "cutoff_eval",
    "cutoff_radial",
    "zeta_eval",
    "modified_defect_expansion",
    "evaluate_expansion",
    "wronskian_r",
    "defect_difference",
]


def c_alpha(alpha: float) -> float:
    """pi^2 / sin(pi alpha)."""
    return math.pi**2 / math.sin(math.pi * alpha)


def _is_half(alpha: float) -> bool:
    return abs(alpha - 0.5) < 1e-12


@dataclass(frozen=True)
class DefectG:
    alpha: float
    lam: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")


def _radii(r) -> np.ndarray:
    arr = np.asarray(r, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("r must be positive")
    return arr


def _k(nu: float, x: np.ndarray) -> np.ndarray:
    flat = np.atleast_1d(x).ravel()
    return _k_any(nu, flat, DEFAULT_POLICY).reshape(np.shape(x))


def g_eval(d: DefectG, r):
    """lam^alpha K_alpha(lam r); underflows quietly to 0 far out."""
    r = _radii(r)
    out = d.lam**d.alpha * _k(d.alpha, d.lam * r)
    return float(out) if out.ndim == 0 else out


def g_deriv(d: DefectG, r):
    """dG/dr = -lam^(alpha+1) K_(1-alpha)(lam r) - alpha G / r."""
    r = _radii(r)
    a, lam = d.alpha, d.lam
    g = lam**a * _k(a, lam * r)
    out = -(lam ** (a + 1.0)) * _k(1.0 - a, lam * r) - a * g / r
    return float(out) if out.ndim == 0 else out


def g_norm_sq(d: DefectG) -> float:
    """Closed-form squared L2 norm on the plane: alpha c_alpha lam^(2 alpha - 2)."""
    return d.alpha * c_alpha(d.alpha) * d.lam ** (2 * d.alpha - 2)


def g_origin_expansion(d: DefectG, r: float) -> tuple[float, float, float]:
    """Leading and subleading small-r terms, and the remainder exponent."""
    a, lam = d.alpha, d.lam
    lead = gamma(a) * 2.0 ** (a - 1.0) * r ** (-a)
    sub = -gamma(1.0 - a) * lam ** (2 * a) * 2.0 ** (-(1.0 + a)) / a * r**a
    return lead, sub, 2.0 - a


def g_infinity_prefactor(d: DefectG) -> float:
    """sqrt(pi/2) lam^(alpha - 1/2), the limit of G e^(lam r) sqrt(r)."""
    return math.sqrt(0.5 * math.pi) * d.lam ** (d.alpha - 0.5)


def wronskian_r(alpha: float, lam1: float, lam2: float, r):
    """r (G1 G2' - G2 G1') evaluated directly."""
    d1, d2 = DefectG(alpha, lam1), DefectG(alpha, lam2)
    return r * (g_eval(d1, r) * g_deriv(d2, r) - g_eval(d2, r) * g_deriv(d1, r))


# ---------------------------------------------------------------------------
# Cutoff
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cutoff:
    """chi = 1 on |x| < r1, 0 on |x| > r2, quintic C^2 bridge in between.

    ``Cutoff.identity()`` (r1 = r2 = inf) stands for chi = 1 everywhere.
    """

    r1: float
    r2: float

    def __post_init__(self) -> None:
        if math.isinf(self.r1) and math.isinf(self.r2):
            return
        if not 0 < self.r1 < self.r2:
            raise ValueError("need 0 < r1 < r2")

    @classmethod
    def identity(cls) -> "Cutoff":
        return cls(math.inf, math.inf)

    @classmethod
    def default(cls, lam: float) -> "Cutoff":
        return cls(0.5 / lam, 2.0 / lam)

    @property
    def is_identity(self) -> bool:
        return math.isinf(self.r1)


def cutoff_radial(c: Cutoff, r):
    """(chi, d chi/dr, Laplacian chi) as functions of the radius."""
    r = np.asarray(r, dtype=float)
    if c.is_identity:
        one = np.ones_like(r)
        return one, 0.0 * r, 0.0 * r
    w = c.r2 - c.r1
    t = np.clip((r - c.r1) / w, 0.0, 1.0)
    val = 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t * t)
    d1 = -30.0 * t * t * (1.0 - t) ** 2 / w
    d2 = -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (w * w)
    with np.errstate(divide="ignore", invalid="ignore"):
        lap = np.where(d1 != 0.0, d2 + d1 / r, d2)
    return val, d1, lap


def cutoff_eval(c: Cutoff, x):
    """(value, gradient, Laplacian) of chi at a point of the plane."""
    px, py = float(x[0]), float(x[1])
    r = math.hypot(px, py)
    v, d1, lap = cutoff_radial(c, np.array(r))
    if r == 0.0:
        return float(v), np.zeros(2), float(lap)
    grad = float(d1) * np.array([px / r, py / r])
    return float(v), grad, float(lap)


# ---------------------------------------------------------------------------
# Deformation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Deformation:
    alpha: float
    s_perp0: float


def zeta_eval(z: Deformation, r):
    """(zeta, d zeta/dr, Laplacian zeta) for the three flux regimes."""
    r = _radii(r)
    a, s = z.alpha, z.s_perp0
    if _is_half(a):
        lr = np.log(r)
        return 1.0 + s * r * lr, s * (lr + 1.0), s * (lr + 2.0) / r
    if a < 0.5:
        one = np.ones_like(r)
        return one, 0.0 * r, 0.0 * r
    c = a * s / (a - 0.5)
    return 1.0 - c * r, -c + 0.0 * r, -c / r


class ExpansionTerm(NamedTuple):
    """coefficient * r^exponent * log(r)^log_power."""

    exponent: float
    coefficient: float
    log_power: int = 0


def modified_defect_expansion(alpha: float, lam: float, s_perp0: float) -> list[ExpansionTerm]:
    """Small-r expansion of zeta G inside the region where chi = 1."""
    a = alpha
    lead = ExpansionTerm(-a, gamma(a) * 2.0 ** (a - 1.0))
    reg = ExpansionTerm(a, -gamma(1.0 - a) * lam ** (2 * a) * 2.0 ** (-1.0 - a) / a)
    if _is_half(a):
        k = math.sqrt(0.5 * math.pi)
        terms = [ExpansionTerm(-0.5, k), ExpansionTerm(0.5, k * s_perp0, 1), ExpansionTerm(0.5, -k * lam)]
        return [t for t in terms if t.coefficient != 0.0]
    if a < 0.5 or s_perp0 == 0.0:
        return [lead, reg]
    mid = ExpansionTerm(1.0 - a, -gamma(1.0 + a) * s_perp0 / (2.0 ** (1.0 - a) * (a - 0.5)))
    return [lead, mid, reg]


def evaluate_expansion(terms: list[ExpansionTerm], r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    for t in terms:
        out = out + t.coefficient * r**t.exponent * np.log(r) ** t.log_power
    return out


# ---------------------------------------------------------------------------
# Cancellation-free difference of two defect functions
# ---------------------------------------------------------------------------


def _diff_series(alpha: float, la: float, lb: float, r: np.ndarray):
    # lam^a K_a(lam r) = pi/(2 sin pi a) * sum_j [lam^(2j) (r/2)^(2j-a)/(j! G(j+1-a))
    #                                       - lam^(2j+2a) (r/2)^(2j+a)/(j! G(j+1+a))];
    # the j = 0 term of the first sum does not depend on lam and cancels.
    a = alpha
    h = 0.5 * r
    pref = 0.5 * math.pi / math.sin(math.pi * a)
    val = np.zeros_like(r)
    der = np.zeros_like(r)
    for j in range(0, 60):
        fj = math.factorial(j)
        if j >= 1:
            c1 = (la ** (2 * j) - lb ** (2 * j)) / (fj * gamma(j + 1.0 - a))
            e1 = 2 * j - a
            val += c1 * h**e1
            der += c1 * e1 * 0.5 * h ** (e1 - 1.0)
        c2 = (la ** (2 * j + 2 * a) - lb ** (2 * j + 2 * a)) / (fj * gamma(j + 1.0 + a))
        e2 = 2 * j + a
        t2 = c2 * h**e2
        val -= t2
        der -= c2 * e2 * 0.5 * h ** (e2 - 1.0)
        if j > 2 and np.all(np.abs(t2) <= 1e-18 * np.abs(val)):
            break
    return pref * val, pref * der


def defect_difference(alpha: float, lam_a: float, lam_b: float, r):
    """(G_a - G_b, d/dr (G_a - G_b)) without cancellation at small r."""
    r = _radii(r)
    flat = np.atleast_1d(r).astype(float).ravel()
    val = np.empty_like(flat)
    der = np.empty_like(flat)
    small = max(lam_a, lam_b) * flat <= 2.0
    if np.any(small):
        val[small], der[small] = _diff_series(alpha, lam_a, lam_b, flat[small])
    big = ~small
    if np.any(big):
        da, db = DefectG(alpha, lam_a), DefectG(alpha, lam_b)
        val[big] = g_eval(da, flat[big]) - g_eval(db, flat[big])
        der[big] = g_deriv(da, flat[big]) - g_deriv(db, flat[big])
    return val.reshape(np.shape(r)), der.reshape(np.shape(r))
