"""Bound states of the radial operators h_k on the half-line with the
singular boundary conditions at the origin, Whittaker deficiency functions
and the deficiency-index scan.

Solutions are carried in t = log r as (u, w = r u'), so that

    du/dt = w,    dw/dt = w + ((k + alpha + r S(r))^2 - 1/4 - E r^2) u,

which keeps the centrifugal singularity out of the right-hand side.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .harmonic import RadialOperatorSpec
from .specfun import gamma, whittaker_w

__all__ = [
    "OriginCondition",
    "Eigenpair",
    "SpectrumResult",
    "WindowWarning",
    "StiffnessError",
    "InconclusiveError",
    "frobenius_branches",
    "boundary_ratio",
    "shoot_eigenvalues",
    "matching_function",
    "pure_ab_energy",
    "whittaker_defect",
    "deficiency_normalization",
    "deficiency_scan",
]


_BRENT_RTOL = 4 * np.finfo(float).eps


class WindowWarning(UserWarning):
    pass


class StiffnessError(ArithmeticError):
    pass


class InconclusiveError(ArithmeticError):
    pass


@dataclass(frozen=True)
class OriginCondition:
    """Boundary condition at r = 0 for the k = 0 profile u = sqrt(r) <psi> sqrt(2 pi).

    ``beta``: u ~ C (u_reg + K/beta u_sing) with K = 2^(2a) pi a Gamma(a)^2;
    ``deformed_beta`` uses the same ratio with the S_perp(0)-corrected
    Frobenius branches; ``krein_like`` is the pure singular branch (beta = 0);
    ``friedrichs`` is the pure regular branch (beta = +inf).
    """

    kind: str
    beta: float = math.inf
    s_perp0: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("friedrichs", "beta", "deformed_beta", "krein_like"):
            raise ValueError(f"unknown origin condition {self.kind!r}")
        if self.kind in ("beta", "deformed_beta"):
            if self.beta == 0.0:
                raise ValueError("beta = 0 is the krein_like condition")
            if not math.isfinite(self.beta):
                raise ValueError("beta = +inf is the friedrichs condition")

    @classmethod
    def friedrichs(cls) -> "OriginCondition":
        return cls("friedrichs")

    @classmethod
    def from_beta(cls, beta: float, s_perp0: float = 0.0) -> "OriginCondition":
        if math.isinf(beta) and beta > 0:
            return cls("friedrichs")
        if beta == 0.0:
            return cls("krein_like", 0.0, s_perp0)
        return cls("deformed_beta" if s_perp0 != 0.0 else "beta", beta, s_perp0)


def boundary_ratio(alpha: float, beta: float) -> float:
    """Singular-to-regular coefficient ratio 2^(2a) pi a Gamma(a)^2 / beta."""
    return 2 ** (2 * alpha) * math.pi * alpha * gamma(alpha) ** 2 / beta


def pure_ab_energy(alpha: float, beta: float) -> float:
    """-(-beta / c_alpha)^(1/alpha) for beta < 0."""
    if not beta < 0:
        raise ValueError("a bound state needs beta < 0")
    c = math.pi**2 / math.sin(math.pi * alpha)
    return -((-beta / c) ** (1 / alpha))


@dataclass
class Eigenpair:
    energy: float
    residual: float
    nodes: int

    @property
    def lam(self) -> float:
        return math.sqrt(-self.energy)


@dataclass
class SpectrumResult:
    eigenpairs: list = field(default_factory=list)
    essential_spectrum_start: float = 0.0

    @property
    def eigenvalues(self) -> list:
        return [p.energy for p in self.eigenpairs]


# ---------------------------------------------------------------------------
# Frobenius launch
# ---------------------------------------------------------------------------


def _series(rho: float, b: float, mu: complex, w: tuple, r: float, n_max: int = 80):
    """r^rho sum c_j r^j for c_j j (j + 2 rho - 1) = b c_{j-1} - mu c_{j-2} + sum_m w_m c_{j-2-m}.

    Returns (u, r u', coefficients)."""
    c = [1.0 + 0j]
    val = 1.0 + 0j
    der = rho + 0j
    rp = 1.0
    for j in range(1, n_max):
        den = j * (j + 2 * rho - 1)
        num = b * c[j - 1] - (mu * c[j - 2] if j >= 2 else 0)
        for m, wm in enumerate(w[: max(j - 2, 0)], start=1):
            num += wm * c[j - 2 - m]
        cj = 0j if abs(den) < 1e-12 else num / den
        c.append(cj)
        rp *= r
        val += cj * rp
        der += cj * (rho + j) * rp
        if j > 4 + len(w) and all(abs(c[j - i]) * r ** (j - i) <= 1e-18 * abs(val) for i in range(3)):
            break
    scale = r**rho
    return val * scale, der * scale, c


def _log_branch(b: float, mu: complex, w: tuple, r: float, n_max: int = 80):
    """Second solution for nu = 1/2: b u_reg log r + sum d_j r^j, d_0 = 1, d_1 = 0."""
    _, _, a = _series(1.0, b, mu, w, r, n_max)
    a = list(a) + [0j] * n_max
    d = [1.0 + 0j, 0j]
    for m in range(2, n_max):
        num = b * d[m - 1] - mu * d[m - 2] - b * (2 * m - 1) * a[m - 1]
        for i, wi in enumerate(w[: m - 2], start=1):
            num += wi * d[m - 2 - i]
        d.append(num / (m * (m - 1)))
    lr = math.log(r)
    reg_u = sum(a[j] * r ** (j + 1) for j in range(n_max))
    reg_w = sum(a[j] * (j + 1) * r ** (j + 1) for j in range(n_max))
    u = b * reg_u * lr + sum(d[j] * r**j for j in range(n_max))
    w_ = b * (reg_w * lr + reg_u) + sum(d[j] * j * r**j for j in range(n_max))
    return u, w_


def frobenius_branches(nu: float, b: float, mu: complex, r: float, remainder: tuple = ()):
    """(u, r u') of the regular and singular branches at radius r.

    Regular: r^(1/2+nu)(1 + b r/(1+2nu) + ...); singular: r^(1/2-nu)(1 + b r/(1-2nu) + ...),
    with the b r log r form when nu = 1/2.  ``mu`` = E - W(0) and
    ``remainder`` holds the Taylor coefficients W_1, W_2, ... of the bounded
    remainder W.
    """
    w = tuple(remainder)
    ur, wr, _ = _series(0.5 + nu, b, mu, w, r)
    if abs(nu - 0.5) < 1e-12:
        us, ws = _log_branch(b, mu, w, r)
    else:
        us, ws, _ = _series(0.5 - nu, b, mu, w, r)
    return (ur, wr), (us, ws)


# ---------------------------------------------------------------------------
# Shooting
# ---------------------------------------------------------------------------


_TAYLOR_RADIUS = 0.1
_TAYLOR_DEGREE = 10


def _remainder_taylor(spec: RadialOperatorSpec):
    """W(0) and the higher Taylor coefficients of the bounded remainder W.

    A least-squares Chebyshev fit on (0, 0.1]; the dropped terms would
    otherwise leak into the regular branch, which the singular one dwarfs
    near the origin.
    """
    if spec.s_full is None:
        return spec.s0**2, ()
    ka = spec.k + spec.alpha
    S, s0 = spec.s_full, spec.s0
    n = 4 * _TAYLOR_DEGREE
    x = np.cos(np.pi * (np.arange(n) + 0.5) / n)
    r = 0.5 * _TAYLOR_RADIUS * (1 + x)
    s = np.asarray(S(r), dtype=float)
    vals = 2 * ka * (s - s0) / r + s * s
    cheb = np.polynomial.Chebyshev.fit(r, vals, _TAYLOR_DEGREE, domain=[0.0, _TAYLOR_RADIUS])
    coef = cheb.convert(kind=np.polynomial.Polynomial, domain=[0.0, _TAYLOR_RADIUS], window=[0.0, _TAYLOR_RADIUS]).coef
    return float(coef[0]), tuple(float(c) for c in coef[1:])


def _rhs(spec: RadialOperatorSpec, energy: complex):
    ka = spec.k + spec.alpha
    S = spec.s_full
    s0 = spec.s0

    def f(t, y):
        r = math.exp(t)
        s = s0 if S is None else float(S(np.array([r]))[0])
        return [y[1], y[1] + ((ka + r * s) ** 2 - 0.25 - energy * r * r) * y[0]]

    return f


def _origin_state(spec: RadialOperatorSpec, bc: OriginCondition, energy: float, r0: float):
    """(u, r u') at r0 and the sign of u as r -> 0."""
    nu = abs(spec.k + spec.alpha)
    w0, wt = _remainder_taylor(spec)
    (ur, wr), (us, ws) = frobenius_branches(nu, spec.coulomb, energy - w0, r0, wt)
    if bc.kind == "friedrichs":
        return ur.real, wr.real, 1.0
    if spec.k != 0:
        raise ValueError("singular boundary conditions act on the k = 0 sector only")
    if bc.kind == "krein_like":
        return us.real, ws.real, 1.0
    if spec.alpha >= 0.5 - 1e-12 and spec.s0 != 0.0 and bc.kind == "beta":
        raise ValueError("S(0) != 0 with alpha >= 1/2 needs the deformed_beta condition")
    ratio = boundary_ratio(spec.alpha, bc.beta)
    # normalise so the larger branch coefficient is 1
    if abs(ratio) > 1:
        return (ur / ratio + us).real, (wr / ratio + ws).real, 1.0
    return (ur + ratio * us).real, (wr + ratio * ws).real, math.copysign(1.0, ratio)


def _solve(f, t0, t1, y0, rtol):
    ev = lambda t, y: y[0]
    sol = integrate.solve_ivp(f, (t0, t1), y0, method="DOP853", rtol=rtol, atol=1e-300, events=ev)
    if sol.status != 0:
        raise StiffnessError(sol.message)
    return sol.y[:, -1], len(sol.t_events[0])


def _r0_for(spec: RadialOperatorSpec, lam: float) -> float:
    # The series is exact for constant S, so launch far out: close to the
    # origin the subdominant regular branch drowns in the singular one.
    r0 = 0.5 / max(lam, abs(spec.coulomb), 1e-300)
    if spec.s_full is not None:
        r0 = min(r0, 0.5 * _TAYLOR_RADIUS)
    return r0


def matching_function(
    spec: RadialOperatorSpec,
    bc: OriginCondition,
    energy: float,
    rtol: float = 1e-12,
    r0: float | None = None,
    count_nodes: bool = True,
):
    """Normalised Wronskian of the outward and inward solutions at r = 1/lambda,
    and the number of zeros of the outward solution on (0, R) (Sturm count;
    -1 when ``count_nodes`` is off)."""
    lam = math.sqrt(-energy)
    r_match = 1.0 / lam
    r0 = _r0_for(spec, lam) if r0 is None else r0
    r0 = min(r0, 0.5 * r_match)
    R = r_match + 36.0 / lam
    kap_R = math.sqrt(max(spec.potential(np.array([R]))[0] - energy, 1e-300))
    if kap_R > lam:
        R = r_match + 36.0 / kap_R
        kap_R = math.sqrt(max(spec.potential(np.array([R]))[0] - energy, 1e-300))
    f = _rhs(spec, energy)
    u0, ww0, sign0 = _origin_state(spec, bc, energy, r0)
    y_out, n_out = _solve(f, math.log(r0), math.log(r_match), [u0, ww0], rtol)
    # the singular branch is monotone near 0, so (0, r0) holds at most one zero
    n_out += int(u0 * sign0 < 0)
    n_tail = _solve(f, math.log(r_match), math.log(R), list(y_out), rtol)[1] if count_nodes else -1 - n_out
    # decaying seed at R with the local WKB slope r u'/u = -kappa r
    y_in, _ = _solve(f, math.log(R), math.log(r_match), [1e-30, -kap_R * R * 1e-30], rtol)
    u1, w1 = y_out
    u2, w2 = y_in
    norm = math.hypot(u1, w1) * math.hypot(u2, w2)
    return (u1 * w2 - w1 * u2) / norm, n_out + n_tail


def shoot_eigenvalues(
    spec: RadialOperatorSpec,
    bc: OriginCondition,
    window: tuple[float, float],
    tol: float = 1e-10,
    points_per_decade: int = 12,
) -> SpectrumResult:
    """All eigenvalues of h_k with origin condition ``bc`` inside ``window``."""
    e_min, e_max = window
    if not e_min < e_max < 0:
        raise ValueError("window must satisfy E_min < E_max < 0")
    decades = math.log10(e_min / e_max)
    n = max(16, int(math.ceil(decades * points_per_decade)) + 1)
    energies = -np.geomspace(-e_min, -e_max, n)
    vals = [matching_function(spec, bc, float(e), count_nodes=False)[0] for e in energies]
    nodes = [_nodes_of(spec, bc, float(energies[0])), _nodes_of(spec, bc, float(energies[-1]))]
    found = []
    g = lambda e: matching_function(spec, bc, e, count_nodes=False)[0]
    for i in range(n - 1):
        if vals[i] == 0.0:
            found.append(float(energies[i]))
            continue
        if vals[i] * vals[i + 1] < 0:
            lo, hi = float(energies[i]), float(energies[i + 1])
            root = optimize.brentq(g, lo, hi, xtol=tol * abs(lo) * 1e-2, rtol=max(tol * 1e-2, _BRENT_RTOL), maxiter=200)
            found.append(root)
    # Sturm count: zeros of the outward solution grow by one across every eigenvalue
    if nodes[-1] - nodes[0] != len(found):
        warnings.warn(
            f"node count changes by {nodes[-1] - nodes[0]} across the window but {len(found)} roots were isolated",
            WindowWarning,
            stacklevel=2,
        )
    pairs = []
    for e in sorted(found):
        res = matching_function(spec, bc, e, count_nodes=False)[0]
        # launch-radius stability: the root must not move when r0 shrinks
        lam = math.sqrt(-e)
        r0 = _r0_for(spec, lam) / 4
        g2 = lambda x: matching_function(spec, bc, x, r0=r0, count_nodes=False)[0]
        lo, hi = e * (1 + 1e-6), e * (1 - 1e-6)
        if g2(lo) * g2(hi) < 0:
            e2 = optimize.brentq(g2, lo, hi, xtol=tol * abs(e) * 1e-2, rtol=max(tol * 1e-2, _BRENT_RTOL))
            if abs(e2 - e) > 10 * tol * abs(e):
                raise StiffnessError(f"eigenvalue {e} moves to {e2} when the launch radius shrinks")
        else:
            raise StiffnessError(f"eigenvalue {e} is not stable under launch-radius reduction")
        pairs.append(Eigenpair(e, abs(res), _nodes_of(spec, bc, e)))
    return SpectrumResult(pairs)


def _nodes_of(spec, bc, e) -> int:
    return matching_function(spec, bc, e * (1 + 1e-9))[1]


# ---------------------------------------------------------------------------
# Whittaker deficiency functions
# ---------------------------------------------------------------------------


def deficiency_normalization(alpha: float, s0: float, k: int, sign: int) -> complex:
    """+-(e^(+-i pi/4))^(1/2-|alpha+k|) / Gamma(1/2 + |alpha+k| + e^(-+i pi/4)(alpha+k) s0)."""
    mu = abs(alpha + k)
    ph = cmath.exp(sign * 1j * math.pi / 4)
    return sign * ph ** (0.5 - mu) / gamma(0.5 + mu + (1 / ph) * (alpha + k) * s0)


def whittaker_defect(alpha: float, s0: float, k: int, sign: int) -> Callable:
    """r -> N W_{-e^(+-i pi/4)(alpha+k) s0, |alpha+k|}(2 e^(-+i pi/4) r), solving (L_k -+ i) g = 0."""
    if k not in (0, -1):
        raise ValueError("deficiency functions exist for k in {0, -1} only")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    mu = abs(alpha + k)
    ph = cmath.exp(sign * 1j * math.pi / 4)
    kappa = -ph * (alpha + k) * s0
    c = 2 / ph
    norm = deficiency_normalization(alpha, s0, k, sign)

    def g(r):
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.array([norm * whittaker_w(kappa, mu, c * x) for x in r_arr.ravel()], dtype=complex)
        out = out.reshape(r_arr.shape)
        return out if np.ndim(r) else complex(out[0])

    return g


def _singular_branch_l2(nu: float, b: float, e: complex) -> bool:
    """Decide square integrability of the singular branch at 0 from the
    decade-by-decade masses int |u|^2 dr, which shrink geometrically iff it converges."""
    def mass(lo, hi):
        t = np.linspace(math.log(lo), math.log(hi), 65)
        vals = []
        for tt in t:
            r = math.exp(tt)
            _, (us, _) = frobenius_branches(nu, b, e, r)
            vals.append(abs(us) ** 2 * r)
        return float(integrate.simpson(vals, x=t))

    m = [mass(10.0 ** -(j + 1), 10.0**-j) for j in (3, 5, 7)]
    ratio = (m[2] / m[1]) ** 0.5 if m[1] > 0 else math.inf
    if ratio < 0.9:
        return True
    if ratio > 1 / 0.9:
        return False
    raise InconclusiveError(f"decade mass ratio {ratio:.3f} at the origin is ambiguous")


def deficiency_scan(spec: RadialOperatorSpec, r_probe: float = 24.0, rtol: float = 1e-10) -> tuple[int, int]:
    """(n_+, n_-): square-integrable solutions of (L_k -+ i) u = 0.

    Both Frobenius branches are tested for square integrability at the
    origin (through the mass of [r0, 1] as r0 shrinks); if only the regular
    branch survives, it is integrated out to ``r_probe`` and must decay.
    """
    nu = abs(spec.k + spec.alpha)
    counts = []
    for sign in (1, -1):
        e = sign * 1j
        if _singular_branch_l2(nu, spec.coulomb, e):
            # both branches are L^2 at 0; a decaying combination exists at infinity
            counts.append(1)
            continue
        (ur, wr), _ = frobenius_branches(nu, spec.coulomb, e, 1e-3)
        ka = spec.k + spec.alpha
        b = spec.coulomb

        def f(t, y):
            r = math.exp(t)
            return [y[1], y[1] + (ka * ka - 0.25 + b * r - e * r * r) * y[0]]

        sol = integrate.solve_ivp(
            f, (math.log(1e-3), math.log(r_probe)), [complex(ur), complex(wr)], method="DOP853",
            rtol=rtol, atol=1e-300, dense_output=True,
        )
        if sol.status != 0:
            raise InconclusiveError(sol.message)
        a1 = abs(sol.sol(math.log(0.5 * r_probe))[0])
        a2 = abs(sol.sol(math.log(r_probe))[0])
        growth = math.log(a2 / a1) / (0.5 * r_probe)
        # decaying solutions shrink like exp(-r/sqrt 2), growing ones grow like exp(r/sqrt 2)
        if growth > 0.5:
            counts.append(0)
        elif growth < -0.5:
            counts.append(1)
        else:
            raise InconclusiveError(f"tail growth rate {growth:.3f} is ambiguous at r = {r_probe}")
    return counts[0], counts[1]
