"""Self-adjoint extensions labelled by 2x2 unitaries U acting between the
deficiency subspaces spanned by Upsilon^(0)_+-, Upsilon^(-1)_+-.

A domain element is psi = phi + c_+ . Upsilon_+ + c_- . Upsilon_- with
c_- = U c_+; the regular part phi is a smooth function supplied by the caller.
Everything here works with the constant-S(0) Whittaker basis; a radial
perpendicular S enters the action only through the bounded remainder W_k.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .fields import RadialPerp, Zero
from .harmonic import GridWarning, RadialOperatorSpec, apply_whittaker, log_grid, plane_operator
from .quadrature import RadialIntegrand, integrate_radial
from .radial import Eigenpair, SpectrumResult, boundary_ratio, frobenius_branches, whittaker_defect
from .specfun import whittaker_w

__all__ = [
    "ExtensionU",
    "DeficiencyElement",
    "Extension",
    "RatioExtractionError",
    "DeficiencyReport",
    "upsilon",
    "make_extension",
    "is_friedrichs",
    "is_krein",
    "is_anyonic",
    "classify",
    "anyonic_beta_match",
    "branch_coefficients",
    "extension_spectrum",
    "deficiency_residual",
    "deficiency_norm",
    "symmetry_defect",
]

SECTORS = (0, -1)


class RatioExtractionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ExtensionU:
    """U = e^(i eta) [[a, -conj(b)], [b, conj(a)]] with |a|^2 + |b|^2 = 1."""

    eta: float
    a: complex
    b: complex = 0j

    def __post_init__(self) -> None:
        if not math.isfinite(self.eta):
            raise ValueError("eta must be finite")
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > 1e-12:
            raise ValueError("need |a|^2 + |b|^2 = 1")

    @property
    def matrix(self) -> np.ndarray:
        a, b = complex(self.a), complex(self.b)
        return cmath.exp(1j * self.eta) * np.array([[a, -b.conjugate()], [b, a.conjugate()]])

    @classmethod
    def from_matrix(cls, m, tol: float = 1e-12) -> "ExtensionU":
        """Inverse of ``matrix``, with eta taken in [0, pi)."""
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix")
        if np.max(np.abs(m @ m.conj().T - np.eye(2))) > tol:
            raise ValueError("matrix is not unitary")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        eta = (cmath.phase(det) / 2) % math.pi
        ph = cmath.exp(-1j * eta)
        return cls(eta, complex(ph * m[0, 0]), complex(ph * m[1, 0]))

    @classmethod
    def friedrichs(cls) -> "ExtensionU":
        return cls(0.0, 1.0 + 0j)

    @classmethod
    def krein(cls) -> "ExtensionU":
        return cls(math.pi, 1.0 + 0j)

    @classmethod
    def anyonic(cls, tau: float) -> "ExtensionU":
        """diag(e^(2i tau), 1)."""
        return cls(tau, cmath.exp(1j * tau))

    def unitarity_defect(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m @ m.conj().T - np.eye(2))))


def is_friedrichs(U: ExtensionU, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(U.matrix - np.eye(2))) <= tol)


def is_krein(U: ExtensionU, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(U.matrix + np.eye(2))) <= tol)


def is_anyonic(U: ExtensionU, tol: float = 1e-12) -> tuple[bool, float | None]:
    """(True, tau) when U = diag(e^(2i tau), 1), tau in [0, pi); else (False, None)."""
    m = U.matrix
    if abs(m[0, 1]) > tol or abs(m[1, 0]) > tol or abs(m[1, 1] - 1.0) > tol:
        return False, None
    return True, (cmath.phase(m[0, 0]) / 2) % math.pi


def classify(U: ExtensionU, alpha: float | None = None, s0: float = 0.0, tol: float = 1e-12) -> dict:
    anyonic, tau = is_anyonic(U, tol)
    out = {
        "unitarity_defect": U.unitarity_defect(),
        "friedrichs": is_friedrichs(U, tol),
        "krein": is_krein(U, tol),
        "anyonic": anyonic,
        "tau": tau,
        "beta": None,
    }
    if anyonic and alpha is not None:
        out["beta"] = anyonic_beta_match(alpha, tau, s0)
    return out


# ---------------------------------------------------------------------------
# Deficiency basis
# ---------------------------------------------------------------------------


def upsilon(alpha: float, s0: float, k: int, sign: int) -> Callable:
    """(r, theta) -> (2 pi)^(-1/2) r^(-1/2) g(r) e^(ik theta)."""
    g = whittaker_defect(alpha, s0, k, sign)

    def f(r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return g(r) / np.sqrt(2 * np.pi * r) * np.exp(1j * k * theta)

    return f


def branch_coefficients(
    fn: Callable[[float], complex], nu: float, b: float, mu: complex, radii=(0.05, 0.1, 0.2)
) -> tuple[complex, complex]:
    """(regular, singular) coefficients of a solution of the Whittaker-type ODE
    in the Frobenius basis, from samples at two radii, checked at a third."""
    rows, rhs = [], []
    for r in radii[:2]:
        (ur, _), (us, _) = frobenius_branches(nu, b, mu, r)
        rows.append([ur, us])
        rhs.append(fn(r))
    cr, cs = np.linalg.solve(np.array(rows), np.array(rhs))
    (ur, _), (us, _) = frobenius_branches(nu, b, mu, radii[2])
    want = fn(radii[2])
    if abs(cr * ur + cs * us - want) > 1e-9 * max(abs(want), abs(cs * us)):
        raise RatioExtractionError("branch decomposition is not consistent across radii")
    return complex(cr), complex(cs)


def _upsilon_data(alpha: float, s0: float, k: int, sign: int) -> tuple[complex, complex]:
    nu = abs(alpha + k)
    g = whittaker_defect(alpha, s0, k, sign)
    return branch_coefficients(g, nu, 2 * (alpha + k) * s0, sign * 1j)


def anyonic_beta_match(alpha: float, tau: float, s0: float = 0.0) -> float:
    """beta whose origin condition reproduces Upsilon^(0)_+ + e^(2i tau) Upsilon^(0)_-.

    Computed from the singular/regular branch coefficients of the
    combination; +inf when the singular coefficient vanishes.
    """
    pr, ps = _upsilon_data(alpha, s0, 0, 1)
    mr, ms = _upsilon_data(alpha, s0, 0, -1)
    w = cmath.exp(2j * tau)
    reg, sing = pr + w * mr, ps + w * ms
    if abs(sing) <= 1e-10 * max(abs(ps), abs(reg)):
        return math.inf
    if abs(reg) <= 1e-10 * abs(ps):
        return 0.0
    ratio = sing / reg
    if abs(ratio.imag) > 1e-8 * abs(ratio):
        raise RatioExtractionError(f"branch ratio {ratio} is not real")
    return boundary_ratio(alpha, 1.0) / ratio.real


# ---------------------------------------------------------------------------
# Extension handle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeficiencyElement:
    c_plus: np.ndarray
    c_minus: np.ndarray
    regular_part: Callable | None = None


def deficiency_norm(alpha: float, s0: float, k: int) -> float:
    """||Upsilon^(k)_+|| = ||Upsilon^(k)_-|| (the two are conjugate up to sign)."""
    g = whittaker_defect(alpha, s0, k, 1)
    nu = abs(alpha + k)
    res = integrate_radial(RadialIntegrand(lambda r: np.abs(g(r)) ** 2, 1 - 2 * nu, math.sqrt(2.0)), rel_tol=1e-11)
    return math.sqrt(res.value.real)


class Extension:
    """H^(U) for flux alpha and a radial perpendicular S (None means S = 0).

    With ``normalize`` (the default) U acts on the unit-norm basis
    Upsilon^(k)_+- / ||Upsilon^(k)||.  The two sectors have different norms,
    so on the raw basis only diagonal U give a symmetric operator; diagonal
    U, including the Friedrichs, Krein and anyonic members, mean the same
    operator either way.

    Points are given in polar form (r, theta); ``regular_part`` callables take
    Cartesian (x, y).
    """

    def __init__(self, U: ExtensionU, alpha: float, S: RadialPerp | None = None, normalize: bool = True):
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        self.U = U
        self.alpha = alpha
        self.S = S
        self.s0 = 0.0 if S is None else S.s0
        self._g = {(k, sg): whittaker_defect(alpha, self.s0, k, sg) for k in SECTORS for sg in (1, -1)}
        self.scale = {k: 1.0 / deficiency_norm(alpha, self.s0, k) if normalize else 1.0 for k in SECTORS}

    def element(self, c_plus, regular_part: Callable | None = None) -> DeficiencyElement:
        c_plus = np.asarray(c_plus, dtype=complex).reshape(2)
        return DeficiencyElement(c_plus, self.U.matrix @ c_plus, regular_part)

    def contains(self, elem: DeficiencyElement, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(elem.c_minus - self.U.matrix @ elem.c_plus)) <= tol)

    def _remainder(self, k: int, r: np.ndarray) -> np.ndarray:
        if self.S is None:
            return np.zeros_like(r)
        s = np.asarray(self.S.S(r), dtype=float)
        return 2 * (k + self.alpha) * (s - self.s0) / r + s * s

    def _singular(self, elem: DeficiencyElement, r, theta, act: bool):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        rr, inv = np.unique(r, return_inverse=True)
        out = 0j
        for i, k in enumerate(SECTORS):
            ang = self.scale[k] * np.exp(1j * k * theta) / np.sqrt(2 * np.pi * r)
            wk = self._remainder(k, r) if act else 0.0
            for sg, c in ((1, elem.c_plus[i]), (-1, elem.c_minus[i])):
                if c == 0:
                    continue
                prof = self._g[(k, sg)](rr)[inv].reshape(r.shape)
                fac = (sg * 1j + wk) if act else 1.0
                out = out + c * fac * prof * ang
        return out

    def evaluate(self, elem: DeficiencyElement, r, theta):
        val = self._singular(elem, r, theta, act=False)
        if elem.regular_part is not None:
            val = val + elem.regular_part(r * np.cos(theta), r * np.sin(theta))
        return val

    def apply(self, elem: DeficiencyElement, r, theta, h: float = 1e-3):
        """H^(U) psi: the regular part by Cartesian stencils, the deficiency part
        as (+-i + W_k) Upsilon^(k)_+-."""
        val = self._singular(elem, r, theta, act=True)
        if elem.regular_part is not None:
            x, y = r * np.cos(theta), r * np.sin(theta)
            val = val + plane_operator(self.alpha, self.S if self.S is not None else Zero(), elem.regular_part, x, y, h)
        return val


def make_extension(U: ExtensionU, alpha: float, S: RadialPerp | None = None, normalize: bool = True) -> Extension:
    if U.unitarity_defect() > 1e-12:
        raise ValueError("U is not unitary")
    return Extension(U, alpha, S, normalize)


def symmetry_defect(
    ext: Extension, e1: DeficiencyElement, e2: DeficiencyElement, angular_nodes: int = 16, rel_tol: float = 1e-9
) -> float:
    """|<H psi1|psi2> - <psi1|H psi2>| relative to ||H psi1|| ||psi2|| + ||psi1|| ||H psi2||."""
    th = 2 * np.pi * np.arange(angular_nodes) / angular_nodes
    mu = max(ext.alpha, 1 - ext.alpha)
    decay = math.sqrt(2.0)

    def integral(fn):
        def prof(r):
            R = np.repeat(r[:, None], angular_nodes, axis=1)
            T = np.broadcast_to(th, R.shape)
            v = fn(R, T)
            return 2 * np.pi * r * v.mean(axis=1), 2 * np.pi * r * np.abs(v).mean(axis=1)

        return integrate_radial(RadialIntegrand(prof, 1 - 2 * mu - 1e-3, decay), rel_tol=rel_tol).value

    lhs = integral(lambda R, T: np.conj(ext.apply(e1, R, T)) * ext.evaluate(e2, R, T))
    rhs = integral(lambda R, T: np.conj(ext.evaluate(e1, R, T)) * ext.apply(e2, R, T))
    n = [
        math.sqrt(abs(integral(lambda R, T, f=f, e=e: np.abs(f(e, R, T)) ** 2)))
        for f, e in ((ext.apply, e1), (ext.evaluate, e2), (ext.evaluate, e1), (ext.apply, e2))
    ]
    return abs(lhs - rhs) / (n[0] * n[1] + n[2] * n[3])


# ---------------------------------------------------------------------------
# Spectrum of H^(U) for constant S = s0 (S^2 shifts every sector by s0^2)
# ---------------------------------------------------------------------------


def _decaying_data(alpha: float, s0: float, k: int, energy: float) -> tuple[float, float]:
    lam = math.sqrt(s0 * s0 - energy)
    b = 2 * (alpha + k) * s0
    kap = -b / (2 * lam)
    nu = abs(alpha + k)
    fn = lambda r: whittaker_w(kap, nu, 2 * lam * r)
    return branch_coefficients(fn, nu, b, -lam * lam)


def _matching_unitary(alpha: float, s0: float, U: np.ndarray, energy: float, data) -> np.ndarray:
    # sector condition: c+ P + c- M parallel to the decaying solution's boundary data
    p, m = [], []
    for k, (P, M) in zip(SECTORS, data):
        fr, fs = _decaying_data(alpha, s0, k, energy)
        fr, fs = fr.real, fs.real
        p.append(P[1] * fr - P[0] * fs)
        m.append(M[1] * fr - M[0] * fs)
    return -np.diag(np.array(m) / np.array(p)) @ U


def _phase_near_one(W: np.ndarray) -> float:
    ph = np.angle(np.linalg.eigvals(W))
    return float(ph[np.argmin(np.abs(ph))])


def extension_spectrum(
    U: ExtensionU, alpha: float, s0: float, window: tuple[float, float], points_per_decade: int = 12, tol: float = 1e-10
) -> SpectrumResult:
    """Eigenvalues of H^(U) in ``window`` for constant S = s0.

    E is an eigenvalue when the unitary -diag(m/p) U built from the boundary
    data of the decaying solutions and of Upsilon_+- has eigenvalue 1.
    ``nodes`` holds the sector (0 or -1) of the eigenvector, or 2 when mixed.
    """
    e_min, e_max = window
    if not e_min < e_max < s0 * s0:
        raise ValueError("window must lie below the essential spectrum")
    data = [(_upsilon_data(alpha, s0, k, 1), _upsilon_data(alpha, s0, k, -1)) for k in SECTORS]
    Um = U.matrix
    shift = s0 * s0
    # scan in the distance to the threshold s0^2
    d = np.geomspace(shift - e_min, shift - e_max, max(16, int(points_per_decade * math.log10((shift - e_min) / (shift - e_max))) + 1))
    energies = shift - d
    f = lambda e: _phase_near_one(_matching_unitary(alpha, s0, Um, e, data))
    vals = [f(float(e)) for e in energies]
    pairs = []
    for i in range(len(energies) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots = [float(energies[i])]
        elif a * b < 0 and abs(a) < 1.5 and abs(b) < 1.5:
            lo, hi = float(energies[i]), float(energies[i + 1])
            roots = [optimize.brentq(f, lo, hi, xtol=tol * abs(lo), rtol=max(tol, 4 * np.finfo(float).eps))]
        else:
            continue
        for e in roots:
            W = _matching_unitary(alpha, s0, Um, e, data)
            w, v = np.linalg.eig(W)
            j = int(np.argmin(np.abs(w - 1)))
            # a jump between the two eigenphases also changes sign; skip it
            if abs(w[j] - 1) > 1e-6:
                continue
            vec = np.abs(v[:, j])
            sector = 0 if vec[1] < 1e-8 * vec[0] else -1 if vec[0] < 1e-8 * vec[1] else 2
            pairs.append(Eigenpair(e, float(abs(w[j] - 1)), sector))
    return SpectrumResult(sorted(pairs, key=lambda p: p.energy), shift)


# ---------------------------------------------------------------------------
# Deficiency residuals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeficiencyReport:
    residuals: dict
    orthogonality: float
    unitarity_defect: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


def deficiency_residual(
    alpha: float, s0: float, U: ExtensionU | None = None, r_min: float = 1e-2, r_max: float = 40.0, n: int = 801
) -> DeficiencyReport:
    """||(L -+ i) Upsilon_+-|| / ||Upsilon_+-|| for the four basis elements.

    The plane operator acts mode by mode, so each residual is the radial
    one of g = sqrt(2 pi r) Upsilon on a log grid (weight dr = r dt).  The
    grid is deliberately coarse: rounding noise in g, amplified by the
    second difference, dominates the truncation error on finer grids.
    """
    grid = log_grid(r_min, r_max, n)
    inner = grid[2:-2]
    t = np.log(inner)
    res = {}
    for k in SECTORS:
        spec = RadialOperatorSpec(k, alpha, s0)
        for sg in (1, -1):
            u = whittaker_defect(alpha, s0, k, sg)(grid)
            out = (apply_whittaker(spec, u, grid) - sg * 1j * u)[2:-2]
            num = integrate.trapezoid(np.abs(out) ** 2 * inner, t)
            den = integrate.trapezoid(np.abs(u[2:-2]) ** 2 * inner, t)
            res[(k, sg)] = math.sqrt(num / den)
    if max(res.values()) > 1e-5:
        warnings.warn(f"deficiency residual {max(res.values()):.2e} is grid-limited", GridWarning, stacklevel=2)
    # distinct angular harmonics: the trapezoid mean of e^(-i theta) vanishes
    th = 2 * np.pi * np.arange(16) / 16
    orth = float(abs(np.mean(np.exp(-1j * th))))
    return DeficiencyReport(res, orth, 0.0 if U is None else U.unitarity_defect())
