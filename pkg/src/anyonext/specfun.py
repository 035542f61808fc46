"""Special functions used by the defect and deficiency constructions.

Everything here is self-contained: the Gamma function via a Lanczos
rational approximation, the modified Bessel function K_nu for real order
and the confluent functions U (Tricomi) and W (Whittaker) for complex
parameters.  Each function picks an evaluation region (power series,
asymptotic series, or a trapezoid rule on an integral representation)
according to an :class:`EvalPolicy`.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EvalPolicy",
    "DEFAULT_POLICY",
    "SpecialFunctionError",
    "PoleError",
    "GammaOverflowError",
    "DomainError",
    "NonConvergenceError",
    "UnderflowWarning",
    "gamma",
    "rgamma",
    "bessel_k",
    "bessel_k_deriv",
    "tricomi_u",
    "whittaker_w",
]


class SpecialFunctionError(ArithmeticError):
    """Base class for evaluation failures in this module."""


class PoleError(SpecialFunctionError, ValueError):
    pass


class GammaOverflowError(SpecialFunctionError, OverflowError):
    pass


class DomainError(SpecialFunctionError, ValueError):
    pass


class NonConvergenceError(SpecialFunctionError):
    def __init__(self, method: str, message: str):
        super().__init__(f"{method}: {message}")
        self.method = method


class UnderflowWarning(RuntimeWarning):
    """Emitted when a result underflows to zero in double precision."""


@dataclass(frozen=True)
class EvalPolicy:
    """Accuracy target and region boundaries.

    Parameters
    ----------
    rel_tol : float
        Target relative accuracy of series truncation.
    max_terms : int
        Hard cap on the number of series terms.
    series_asymptotic_switch : float
        Argument magnitude above which the asymptotic expansion is used.
    series_radius : float
        Argument magnitude below which the power series is used.  Between
        the two radii an integral representation is evaluated.
    """

    rel_tol: float = 1e-12
    max_terms: int = 400
    series_asymptotic_switch: float = 25.0
    series_radius: float = 1.0

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")
        if not self.series_asymptotic_switch > 0 or not self.series_radius > 0:
            raise ValueError("switch radii must be positive")
        if self.series_radius > self.series_asymptotic_switch:
            raise ValueError("series_radius must not exceed series_asymptotic_switch")


DEFAULT_POLICY = EvalPolicy()

# ---------------------------------------------------------------------------
# Gamma
# ---------------------------------------------------------------------------

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def _lanczos(z: complex) -> complex:
    # valid for Re z >= 1/2
    z = z - 1.0
    x = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        x += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _SQRT_2PI * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


def _gamma_complex(z: complex) -> complex:
    if _is_nonpositive_integer(z):
        raise PoleError(f"Gamma has a pole at {z.real:g}")
    if z.real > 171.6:
        raise GammaOverflowError(f"Gamma({z}) overflows double precision")
    if z.real < 0.5:
        s = cmath.sin(math.pi * z)
        if z.real < -170.0 and z.imag == 0.0:
            raise GammaOverflowError(f"Gamma({z}) underflows/overflows double precision")
        return math.pi / (s * _lanczos(1.0 - z))
    return _lanczos(z)


def gamma(z):
    """Gamma function for real or complex argument.

    Real input returns a float, complex input returns a complex number.
    Raises :class:`PoleError` at non-positive integers and
    :class:`GammaOverflowError` outside the double range.
    """
    if isinstance(z, complex) or np.iscomplexobj(z):
        return _gamma_complex(complex(z))
    x = float(z)
    if math.isnan(x):
        raise DomainError("Gamma of NaN")
    return _gamma_complex(complex(x, 0.0)).real


def rgamma(z) -> complex:
    """Reciprocal Gamma, entire: zero at the poles of Gamma."""
    zc = complex(z)
    if _is_nonpositive_integer(zc):
        return 0j
    return 1.0 / _gamma_complex(zc)


# ---------------------------------------------------------------------------
# Modified Bessel K_nu
# ---------------------------------------------------------------------------

_TRAP_H = 0.1


def _k_series(nu: float, x: np.ndarray, policy: EvalPolicy) -> np.ndarray:
    half = 0.5 * x
    q = half * half
    ip = np.ones_like(x) * rgamma(1.0 + nu).real
    im = np.ones_like(x) * rgamma(1.0 - nu).real
    sp, sm = ip.copy(), im.copy()
    for j in range(1, policy.max_terms):
        ip = ip * q / (j * (j + nu))
        im = im * q / (j * (j - nu))
        sp += ip
        sm += im
        if np.all(np.abs(ip) <= 1e-17 * np.abs(sp)) and np.all(np.abs(im) <= 1e-17 * np.abs(sm)):
            break
    else:
        raise NonConvergenceError("series", "Bessel K power series did not converge")
    i_pos = sp * half**nu
    i_neg = sm * half ** (-nu)
    return 0.5 * math.pi / math.sin(math.pi * nu) * (i_neg - i_pos)


def _k_asymptotic(nu: float, x: np.ndarray, policy: EvalPolicy) -> np.ndarray:
    mu = 4.0 * nu * nu
    term = np.ones_like(x)
    total = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    for k in range(1, policy.max_terms):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        a = np.abs(term)
        if np.all(a <= 1e-17 * np.abs(total)):
            break
        if np.any(a > prev):
            # optimal truncation reached; accept only if small enough
            if np.any(prev > policy.rel_tol * np.abs(total)):
                raise NonConvergenceError("asymptotic", "Bessel K asymptotic series diverged")
            break
        total += term
        prev = a
    with np.errstate(under="ignore"):
        return np.sqrt(0.5 * math.pi / x) * np.exp(-x) * total


def _k_integral(nu: float, x: np.ndarray) -> np.ndarray:
    # K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt; the trapezoid rule is
    # exponentially accurate for this analytic, doubly-decaying integrand.
    tmax = float(np.arccosh(1.0 + 45.0 / np.min(x)))
    n = int(math.ceil(tmax / _TRAP_H)) + 1
    t = np.arange(n) * _TRAP_H
    w = np.full(n, _TRAP_H)
    w[0] *= 0.5
    with np.errstate(under="ignore", over="ignore"):
        e = np.exp(-np.outer(x, np.cosh(t) - 1.0))
    vals = e @ (w * np.cosh(nu * t))
    with np.errstate(under="ignore"):
        return vals * np.exp(-x)


def _k_any(nu: float, x: np.ndarray, policy: EvalPolicy) -> np.ndarray:
    nu = abs(nu)
    out = np.empty_like(x)
    big = x >= policy.series_asymptotic_switch
    near_int = abs(nu - round(nu)) < 0.05
    small = (x <= policy.series_radius) & (not near_int)
    mid = ~(big | small)
    if np.any(big):
        out[big] = _k_asymptotic(nu, x[big], policy)
    if np.any(small):
        out[small] = _k_series(nu, x[small], policy)
    if np.any(mid):
        out[mid] = _k_integral(nu, x[mid])
    return out


def _as_positive_array(x, name: str = "x") -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} must be positive and finite")
    if np.any(~np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr, scalar


def bessel_k(nu: float, x, policy: EvalPolicy = DEFAULT_POLICY):
    """Modified Bessel function of the second kind K_nu(x).

    Parameters
    ----------
    nu : float
        Real order with |nu| < 2 (negative orders use K_{-nu} = K_nu).
    x : float or array_like
        Positive argument.
    policy : EvalPolicy
        Region boundaries and accuracy.

    Returns
    -------
    float or ndarray
        Values of K_nu(x).  Results that underflow are returned as 0.0 and
        reported through :class:`UnderflowWarning`.
    """
    if not abs(nu) < 2.0:
        raise DomainError("order must satisfy |nu| < 2")
    arr, scalar = _as_positive_array(x)
    out = _k_any(float(nu), arr, policy)
    if np.any(out == 0.0):
        warnings.warn("K_nu underflowed to zero for large argument", UnderflowWarning, stacklevel=2)
    return float(out[0]) if scalar else out


def bessel_k_deriv(nu: float, x, policy: EvalPolicy = DEFAULT_POLICY):
    """Derivative dK_nu/dx = -(K_{nu-1} + K_{nu+1})/2, for |nu| < 1."""
    if not abs(nu) < 1.0:
        raise DomainError("derivative supported for |nu| < 1")
    arr, scalar = _as_positive_array(x)
    out = -0.5 * (_k_any(nu - 1.0, arr, policy) + _k_any(nu + 1.0, arr, policy))
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Tricomi U and Whittaker W
# ---------------------------------------------------------------------------


def _u_asymptotic(a: complex, b: complex, z: complex, policy: EvalPolicy) -> complex:
    term = 1.0 + 0j
    total = 1.0 + 0j
    prev = math.inf
    c = a - b + 1.0
    for n in range(policy.max_terms):
        term = term * (a + n) * (c + n) / ((n + 1) * (-z))
        mag = abs(term)
        if mag <= 1e-17 * abs(total):
            return total * cmath.exp(-a * cmath.log(z))
        if mag > prev:
            break
        total += term
        prev = mag
    if prev <= policy.rel_tol * abs(total):
        return total * cmath.exp(-a * cmath.log(z))
    raise NonConvergenceError("asymptotic", f"U({a},{b};{z}) series stalled at {prev:.3e}")


def _kummer_m(a: complex, b: complex, z: complex, policy: EvalPolicy) -> complex:
    term = 1.0 + 0j
    total = 1.0 + 0j
    for n in range(policy.max_terms):
        term = term * (a + n) / ((b + n) * (n + 1)) * z
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return total
    raise NonConvergenceError("series", f"M({a},{b};{z}) did not converge")


def _u_series(a: complex, b: complex, z: complex, policy: EvalPolicy) -> complex:
    t1 = _gamma_complex(1.0 - b) * rgamma(a - b + 1.0) * _kummer_m(a, b, z, policy)
    t2 = (
        _gamma_complex(b - 1.0)
        * rgamma(a)
        * cmath.exp((1.0 - b) * cmath.log(z))
        * _kummer_m(a - b + 1.0, 2.0 - b, z, policy)
    )
    return t1 + t2


def _u_integral_core(a: complex, b: complex, z: complex) -> complex:
    # U = (1/Gamma(a)) int_R exp(-z e^s) e^{a s} (1 + e^s)^{b-a-1} ds, Re a >= 1.
    arg = abs(cmath.phase(z))
    d = min(0.9 * (0.5 * math.pi - arg), 1.4)
    h = 2.0 * math.pi * d / 40.0
    lo = min(-math.log(abs(z)), 0.0) - 42.0 / a.real
    growth = max(0.0, (b - a - 1.0).real)
    hi = math.log(60.0 / z.real)
    for _ in range(4):
        hi = math.log((60.0 + growth * max(hi, 0.0)) / z.real)
    hi = max(hi, lo + 1.0) + 1.0
    s = np.arange(lo, hi + h, h)
    es = np.exp(s)
    with np.errstate(under="ignore", over="ignore"):
        f = np.exp(-z * es + a * s + (b - a - 1.0) * np.log1p(es))
    return complex(h * np.sum(f)) * rgamma(a)


def _u_integral(a: complex, b: complex, z: complex) -> complex:
    if a.real >= 1.0:
        return _u_integral_core(a, b, z)
    n = int(math.ceil(1.0 - a.real))
    top = a + n
    u_hi = _u_integral_core(top + 1.0, b, z)
    u_mid = _u_integral_core(top, b, z)
    # U(c-1) = (2c - b + z) U(c) - c (c - b + 1) U(c+1), stable downward in a
    c = top
    for _ in range(n):
        u_lo = (2.0 * c - b + z) * u_mid - c * (c - b + 1.0) * u_hi
        u_hi, u_mid = u_mid, u_lo
        c = c - 1.0
    return u_mid


def tricomi_u(a, b, z, policy: EvalPolicy = DEFAULT_POLICY) -> complex:
    """Confluent hypergeometric function of the second kind U(a, b; z).

    Requires Re z > 0.  Uses the convergent Kummer series for small |z|
    (when b is not close to an integer), the asymptotic 2F0 series for
    large |z|, and a trapezoid rule on the Laplace-type integral
    representation otherwise.
    """
    a, b, z = complex(a), complex(b), complex(z)
    if not z.real > 0:
        raise DomainError("tricomi_u requires Re z > 0")
    if a == 0:
        return 1.0 + 0j
    r = abs(z)
    if r >= policy.series_asymptotic_switch:
        try:
            return _u_asymptotic(a, b, z, policy)
        except NonConvergenceError:
            pass
    b_near_int = abs(b.imag) < 0.05 and abs(b.real - round(b.real)) < 0.05
    if r <= policy.series_radius and not b_near_int:
        return _u_series(a, b, z, policy)
    val = _u_integral(a, b, z)
    if not cmath.isfinite(val):
        raise NonConvergenceError("integral", f"U({a},{b};{z}) is not finite")
    return val


def whittaker_w(kappa, mu, z, policy: EvalPolicy = DEFAULT_POLICY) -> complex:
    """Whittaker function W_{kappa,mu}(z) for Re z > 0 (principal branch)."""
    kappa, mu, z = complex(kappa), complex(mu), complex(z)
    if not z.real > 0:
        raise DomainError("whittaker_w requires Re z > 0")
    u = tricomi_u(0.5 + mu - kappa, 1.0 + 2.0 * mu, z, policy)
    return cmath.exp(-0.5 * z + (mu + 0.5) * cmath.log(z)) * u
