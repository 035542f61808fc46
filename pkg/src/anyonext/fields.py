"""Aharonov-Bohm potential, magnetic perturbations and gauge utilities.

All callables act elementwise on numpy arrays of Cartesian coordinates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Union

import numpy as np
from scipy import integrate

from .expr import ExprParseError, Neg, parse

__all__ = [
    "FluxParams",
    "Zero",
    "RadialPerp",
    "Continuous",
    "DiscontinuousPerp",
    "Perturbation",
    "FieldSpecError",
    "CoulombReport",
    "ab_potential",
    "ab_potential_xy",
    "field_xy",
    "decompose",
    "gauge_normalize",
    "check_coulomb",
    "remove_radial_gauge",
    "angular_average",
    "holder_ratio",
    "sup_norm",
    "load_field_spec",
    "field_from_spec",
]

ArrayFn = Callable[..., np.ndarray]


class FieldSpecError(ValueError):
    """Invalid perturbation or field-file content."""


@dataclass(frozen=True)
class FluxParams:
    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in the open interval (0, 1)")


@dataclass(frozen=True)
class Zero:
    gauge_checked: bool = True


@dataclass(frozen=True)
class RadialPerp:
    """S(x) = S(|x|) x_perp/|x| with Lipschitz and sup metadata."""

    S: ArrayFn
    lipschitz_bound: float
    sup_bound: float
    r0: float = 1.0
    gauge_checked: bool = True

    @property
    def s0(self) -> float:
        return float(self.S(np.array([0.0]))[0])


@dataclass(frozen=True)
class Continuous:
    """A field continuous at the origin, given as (x, y) -> (Sx, Sy)."""

    field: ArrayFn
    holder_exponent: float
    r0: float = 1.0
    sup_bound: float = math.inf
    s_at_origin: tuple[float, float] = (0.0, 0.0)
    shift: tuple[float, float] = (0.0, 0.0)
    gauge_checked: bool = False


@dataclass(frozen=True)
class DiscontinuousPerp:
    """S = s_par x_hat + s_perp x_perp_hat with s_perp(0) != 0."""

    s_perp: ArrayFn
    s_par: ArrayFn
    s_perp_at_origin: float
    holder_exponent: float
    r0: float = 1.0
    sup_bound: float = math.inf
    gauge_checked: bool = False

    def __post_init__(self) -> None:
        if self.s_perp_at_origin == 0.0:
            raise FieldSpecError("s_perp_at_origin must be non-zero")


Perturbation = Union[Zero, RadialPerp, Continuous, DiscontinuousPerp]


def validate(S: Perturbation, params: FluxParams) -> None:
    """Check the exponent hypotheses that the form constructions rely on."""
    a = params.alpha
    if isinstance(S, Continuous) and a >= 0.5 and not S.holder_exponent > 2 * a - 1:
        raise FieldSpecError("holder exponent must exceed 2*alpha - 1 for alpha >= 1/2")
    if isinstance(S, DiscontinuousPerp) and a >= 0.5 and not S.holder_exponent > a:
        raise FieldSpecError("holder exponent must exceed alpha for alpha >= 1/2")


def ab_potential_xy(alpha: float, x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x * x + y * y
    if np.any(r2 == 0):
        raise ValueError("the Aharonov-Bohm potential is singular at the origin")
    return -alpha * y / r2, alpha * x / r2


def ab_potential(params: FluxParams, x) -> np.ndarray:
    """alpha * x_perp / |x|^2 with x_perp = (-y, x)."""
    ax, ay = ab_potential_xy(params.alpha, x[0], x[1])
    return np.array([float(ax), float(ay)])


def field_xy(S: Perturbation, x, y) -> tuple[np.ndarray, np.ndarray]:
    """Cartesian components of S on arrays of points (origin excluded)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if isinstance(S, Zero):
        z = np.zeros(np.broadcast(x, y).shape)
        return z, z.copy()
    if isinstance(S, Continuous):
        sx, sy = S.field(x, y)
        return np.asarray(sx, dtype=float) + 0 * x, np.asarray(sy, dtype=float) + 0 * y
    r = np.hypot(x, y)
    if np.any(r == 0):
        raise ValueError("field direction undefined at the origin")
    ex, ey = x / r, y / r
    if isinstance(S, RadialPerp):
        s = np.asarray(S.S(r), dtype=float)
        return -s * ey, s * ex
    sp = np.asarray(S.s_perp(x, y), dtype=float)
    sr = np.asarray(S.s_par(x, y), dtype=float)
    return sr * ex - sp * ey, sr * ey + sp * ex


def decompose(S: Perturbation, x) -> tuple[float, float]:
    """(s_par, s_perp) with S(x) = s_par x_hat + s_perp x_perp_hat."""
    px, py = float(x[0]), float(x[1])
    r = math.hypot(px, py)
    if r == 0:
        raise ValueError("decomposition undefined at the origin")
    sx, sy = field_xy(S, np.array([px]), np.array([py]))
    ex, ey = px / r, py / r
    return float(sx[0] * ex + sy[0] * ey), float(-sx[0] * ey + sy[0] * ex)


def gauge_normalize(S: Perturbation) -> Perturbation:
    """Subtract the value at the origin from a continuous field."""
    if isinstance(S, Zero):
        return S
    if not isinstance(S, Continuous):
        raise FieldSpecError("gauge normalization needs a field continuous at the origin")
    sx0, sy0 = S.field(np.array([0.0]), np.array([0.0]))
    s0 = (float(np.asarray(sx0).ravel()[0]), float(np.asarray(sy0).ravel()[0]))
    if s0 == (0.0, 0.0):
        return replace(S, s_at_origin=(0.0, 0.0))
    inner = S.field

    def shifted(x, y):
        fx, fy = inner(x, y)
        return np.asarray(fx) - s0[0], np.asarray(fy) - s0[1]

    total = (S.shift[0] + s0[0], S.shift[1] + s0[1])
    return replace(S, field=shifted, s_at_origin=(0.0, 0.0), shift=total)


@dataclass(frozen=True)
class CoulombReport:
    max_divergence: float
    location: tuple[float, float]
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_divergence <= self.tol


def _polar_grid(r_min: float, r_max: float, n_r: int, n_theta: int):
    r = np.geomspace(r_min, r_max, n_r)
    th = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    R, T = np.meshgrid(r, th, indexing="ij")
    return R * np.cos(T), R * np.sin(T)


def _d(f, h):
    # 4th-order central difference; 2nd order leaves h^2 / r^3 errors near the origin
    return (8 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12 * h)


def check_coulomb(
    S: Perturbation,
    grid: tuple[float, float, int, int] = (1e-3, 5.0, 40, 32),
    tol: float = 1e-6,
    rel_step: float = 1e-4,
) -> CoulombReport:
    """Sampled max |div S| on a punctured polar grid (r_min, r_max, n_r, n_theta)."""
    x, y = _polar_grid(*grid)
    r = np.hypot(x, y)
    h = rel_step * r
    if isinstance(S, DiscontinuousPerp):
        ex, ey = x / r, y / r

        def grad(f):
            return _d(lambda t: f(x + t, y), h), _d(lambda t: f(x, y + t), h)

        pgx, pgy = grad(S.s_par)
        sgx, sgy = grad(S.s_perp)
        div = pgx * ex + pgy * ey + (-sgx * ey + sgy * ex) + S.s_par(x, y) / r
    else:
        fx = lambda a, b: field_xy(S, a, b)[0]
        fy = lambda a, b: field_xy(S, a, b)[1]
        div = _d(lambda t: fx(x + t, y), h) + _d(lambda t: fy(x, y + t), h)
    div = np.abs(div)
    i = np.unravel_index(int(np.argmax(div)), div.shape)
    return CoulombReport(float(div[i]), (float(x[i]), float(y[i])), tol)


def remove_radial_gauge(S: DiscontinuousPerp, n_theta: int = 16, r_probe=(1e-3, 1.0, 2.0)):
    """Drop a purely radial s_par(|x|) through the phase phi(r) = int_0^r s_par.

    Returns the perturbation with s_par = 0 and the scalar function phi.
    """
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    for rp in r_probe:
        vals = S.s_par(rp * np.cos(th), rp * np.sin(th))
        if np.ptp(vals) > 1e-12 * max(1.0, float(np.max(np.abs(vals)))):
            raise FieldSpecError("s_par is not radial")
    s_par_r = lambda t: float(np.asarray(S.s_par(np.array([t]), np.array([0.0])))[0])

    def phi(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        for j, rr in enumerate(r):
            val, err = integrate.quad(s_par_r, 0.0, rr, limit=200)
            if not np.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
                raise FieldSpecError("s_par is not integrable at the origin")
            out[j] = val
        return out

    phi(np.array([1e-3]))
    zero = lambda x, y: 0.0 * np.asarray(x, dtype=float)
    return replace(S, s_par=zero), phi


def angular_average(f: Callable, r: float, nodes: int = 64) -> complex:
    """(1/2pi) int f(r cos t, r sin t) dt by the periodic trapezoid rule."""
    if not r > 0 or nodes < 4:
        raise ValueError("need r > 0 and at least 4 nodes")
    th = 2 * np.pi * np.arange(nodes) / nodes
    vals = np.asarray(f(r * np.cos(th), r * np.sin(th)))
    m = complex(np.mean(vals))
    return m


def holder_ratio(S: Perturbation, exponent: float, radii=(1e-1, 1e-2, 1e-3, 1e-4), nodes: int = 32):
    """max |S(x)| / |x|^exponent sampled on shrinking circles."""
    out = []
    th = 2 * np.pi * np.arange(nodes) / nodes
    for rr in radii:
        sx, sy = field_xy(S, rr * np.cos(th), rr * np.sin(th))
        out.append(float(np.max(np.hypot(sx, sy))) / rr**exponent)
    return out


def sup_norm(S: Perturbation, r_max: float = 20.0, n_r: int = 400, n_theta: int = 64) -> float:
    """Sampled sup of |S| (combined with caller metadata by the callers)."""
    if isinstance(S, Zero):
        return 0.0
    x, y = _polar_grid(1e-6, r_max, n_r, n_theta)
    sx, sy = field_xy(S, x, y)
    return float(np.max(np.hypot(sx, sy)))


# ---------------------------------------------------------------------------
# Field files
# ---------------------------------------------------------------------------


def _parse_field(src, where: str):
    try:
        return parse(src)
    except ExprParseError as err:
        raise FieldSpecError(f"{where}: {err}") from err


def field_from_spec(spec: dict) -> Perturbation:
    """Build a perturbation from a decoded field-file dictionary.

    ``radial_perp``: ``expr`` is S(r).  ``continuous``: ``expr`` is either a
    stream function (S = (-d/dy, d/dx) of it, divergence free by construction)
    or a pair of component expressions.  ``discontinuous_perp``: ``expr`` is
    s_perp and the optional ``expr_par`` is s_par.
    """
    if not isinstance(spec, dict) or "variant" not in spec:
        raise FieldSpecError("field spec must be an object with a 'variant' key")
    variant = spec["variant"]
    r0 = float(spec.get("r0", 1.0))
    holder = float(spec.get("holder", 1.0))
    sup = float(spec.get("sup", math.inf))
    if variant == "zero":
        return Zero()
    if "expr" not in spec:
        raise FieldSpecError(f"variant {variant!r} needs an 'expr'")
    if variant == "radial_perp":
        e = _parse_field(spec["expr"], "expr")
        # evaluated along the positive x axis, so x and r coincide
        S = lambda r, e=e: np.real(e(np.asarray(r, dtype=float), 0.0 * np.asarray(r, dtype=float)))
        lip = float(spec.get("lipschitz", 1.0))
        return RadialPerp(S=S, lipschitz_bound=lip, sup_bound=sup, r0=r0)
    if variant == "continuous":
        ex = spec["expr"]
        if isinstance(ex, list):
            if len(ex) != 2:
                raise FieldSpecError("component form needs exactly two expressions")
            cx, cy = _parse_field(ex[0], "expr[0]"), _parse_field(ex[1], "expr[1]")
        else:
            psi = _parse_field(ex, "expr")
            cx, cy = Neg(psi.diff("y")), psi.diff("x")
        fld = lambda x, y, cx=cx, cy=cy: (np.real(cx(x, y)), np.real(cy(x, y)))
        return Continuous(field=fld, holder_exponent=holder, r0=r0, sup_bound=sup)
    if variant == "discontinuous_perp":
        ep = _parse_field(spec["expr"], "expr")
        er = _parse_field(spec.get("expr_par", "0"), "expr_par")
        s0 = float(spec.get("s_perp0", np.real(ep(np.array([0.0]), np.array([0.0])))[0]))
        return DiscontinuousPerp(
            s_perp=lambda x, y, ep=ep: np.real(ep(x, y)),
            s_par=lambda x, y, er=er: np.real(er(x, y)),
            s_perp_at_origin=s0,
            holder_exponent=holder,
            r0=r0,
            sup_bound=sup,
        )
    raise FieldSpecError(f"unknown variant {variant!r}")


def load_field_spec(path: str | Path) -> Perturbation:
    text = Path(path).read_text()
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as err:
        raise FieldSpecError(f"{path}: line {err.lineno} column {err.colno}: {err.msg}") from err
    return field_from_spec(spec)
