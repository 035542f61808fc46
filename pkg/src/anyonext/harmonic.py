"""Cylindrical-harmonic decomposition and the radial operators

    h_k = -d^2/dr^2 + ((k + alpha + r S(r))^2 - 1/4) / r^2

acting on u = sqrt(r) psi_k, split as h_k = L_k + W_k with the Whittaker
operator L_k (S frozen at S(0)) and a bounded remainder W_k.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fields import RadialPerp, ab_potential_xy, field_xy

__all__ = [
    "HarmonicMode",
    "RadialOperatorSpec",
    "AliasingWarning",
    "GridWarning",
    "UnboundedRemainderError",
    "log_grid",
    "decompose",
    "reconstruct",
    "apply_radial",
    "apply_whittaker",
    "potential_split",
    "plane_operator",
    "project_mode",
    "write_modes_csv",
]


class AliasingWarning(UserWarning):
    pass


class GridWarning(UserWarning):
    pass


class UnboundedRemainderError(ValueError):
    pass


def log_grid(r_min: float, r_max: float, n: int) -> np.ndarray:
    return np.geomspace(r_min, r_max, n)


@dataclass(frozen=True)
class HarmonicMode:
    k: int
    u: np.ndarray
    grid: np.ndarray


@dataclass(frozen=True)
class RadialOperatorSpec:
    k: int
    alpha: float
    s0: float = 0.0
    s_full: Callable | None = None
    lipschitz_bound: float | None = None
    sup_bound: float | None = None

    @property
    def centrifugal(self) -> float:
        return (self.k + self.alpha) ** 2 - 0.25

    @property
    def coulomb(self) -> float:
        return 2.0 * (self.k + self.alpha) * self.s0

    @classmethod
    def from_perturbation(cls, k: int, alpha: float, S: RadialPerp | None) -> "RadialOperatorSpec":
        if S is None:
            return cls(k, alpha)
        return cls(k, alpha, S.s0, S.S, S.lipschitz_bound, S.sup_bound)

    def potential(self, r):
        """((k + alpha + r S(r))^2 - 1/4) / r^2."""
        r = np.asarray(r, dtype=float)
        s = self.s0 if self.s_full is None else np.asarray(self.s_full(r), dtype=float)
        return ((self.k + self.alpha + r * s) ** 2 - 0.25) / (r * r)


def decompose(psi: Callable, k_max: int, grid, angular_nodes: int | None = None) -> list[HarmonicMode]:
    """Modes k = -k_max..k_max of psi, returned as u_k = sqrt(r) psi_k."""
    grid = np.asarray(grid, dtype=float)
    n = angular_nodes or 4 * (k_max + 1)
    if n <= 2 * k_max:
        raise ValueError("need more than 2*k_max angular nodes")
    th = 2 * np.pi * np.arange(n) / n
    vals = np.asarray(psi(grid[:, None] * np.cos(th), grid[:, None] * np.sin(th)), dtype=complex)
    coef = np.fft.fft(vals, axis=1) * (math.sqrt(2 * np.pi) / n)
    modes = []
    for k in range(-k_max, k_max + 1):
        modes.append(HarmonicMode(k, np.sqrt(grid) * coef[:, k % n], grid))
    scale = max(float(np.max(np.abs(m.u))) for m in modes)
    edge = max(float(np.max(np.abs(m.u))) for m in modes if abs(m.k) == k_max)
    if scale > 0 and edge > 1e-10 * scale:
        warnings.warn(f"|k| = {k_max} modes carry {edge / scale:.2e} of the peak", AliasingWarning, stacklevel=2)
    return modes


def reconstruct(modes: list[HarmonicMode], theta) -> np.ndarray:
    """sum_k u_k r^(-1/2) e^(ik theta) / sqrt(2 pi) on grid x theta."""
    grid = modes[0].grid
    theta = np.asarray(theta, dtype=float)
    out = np.zeros((len(grid), len(theta)), dtype=complex)
    for m in modes:
        out += (m.u / np.sqrt(grid))[:, None] * np.exp(1j * m.k * theta)[None, :]
    return out / math.sqrt(2 * np.pi)


def _fd_weights(offsets, order: int) -> np.ndarray:
    """Finite-difference weights on integer offsets (unit spacing)."""
    offs = np.asarray(offsets, dtype=float)
    m = len(offs)
    A = np.vander(offs, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(A, rhs)


# 4th-order stencils in t = log r (uniform); 6-point one-sided closures at the ends
_CENTRAL = np.arange(-2, 3)
_W1, _W2 = _fd_weights(_CENTRAL, 1), _fd_weights(_CENTRAL, 2)
_EDGE = [np.arange(0, 6) - i for i in range(2)]
_E1 = [_fd_weights(o, 1) for o in _EDGE]
_E2 = [_fd_weights(o, 2) for o in _EDGE]


def _derivs(u: np.ndarray, h: float):
    n = len(u)
    if n < 7:
        raise ValueError("need at least 7 grid points")
    d1 = np.empty_like(u)
    d2 = np.empty_like(u)
    d1[2:-2] = sum(_W1[j] * u[j : n - 4 + j] for j in range(5))
    d2[2:-2] = sum(_W2[j] * u[j : n - 4 + j] for j in range(5))
    rev = u[::-1]
    for i in range(2):
        d1[i] = _E1[i] @ u[:6]
        d2[i] = _E2[i] @ u[:6]
        d1[n - 1 - i] = -(_E1[i] @ rev[:6])
        d2[n - 1 - i] = _E2[i] @ rev[:6]
    return d1 / h, d2 / (h * h)


def _second_derivative(u: np.ndarray, grid: np.ndarray) -> np.ndarray:
    t = np.log(grid)
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=0):
        raise ValueError("grid must be log-spaced")
    ut, utt = _derivs(u, h)
    return (utt - ut) / (grid * grid)


def apply_radial(spec: RadialOperatorSpec, u, grid=None, tol: float = 1e-6) -> np.ndarray:
    """h_k u on a log-spaced grid by 4th-order finite differences.

    Without ``s_full`` the potential is the Whittaker one with S = s0, plus
    the constant s0^2.  A grid-too-coarse warning is raised when the
    Richardson estimate from the half-resolution grid exceeds ``tol``.
    """
    if isinstance(u, HarmonicMode):
        grid, u = u.grid, u.u
    u = np.asarray(u)
    grid = np.asarray(grid, dtype=float)
    out = -_second_derivative(u, grid) + spec.potential(grid) * u
    if len(grid) >= 15:
        coarse = -_second_derivative(u[::2], grid[::2]) + spec.potential(grid[::2]) * u[::2]
        inner = slice(2, -2)
        err = np.abs(out[::2][inner] - coarse[inner]) / 15.0
        scale = float(np.max(np.abs(out[::2][inner]))) or 1.0
        if float(np.max(err)) > tol * scale:
            warnings.warn(f"finite-difference error estimate {float(np.max(err)) / scale:.2e}", GridWarning, stacklevel=2)
    return out


def apply_whittaker(spec: RadialOperatorSpec, u, grid) -> np.ndarray:
    """L_k u = -u'' + ((k+alpha)^2 - 1/4) u / r^2 + 2 (k+alpha) s0 u / r."""
    grid = np.asarray(grid, dtype=float)
    u = np.asarray(u)
    return -_second_derivative(u, grid) + (spec.centrifugal / grid**2 + spec.coulomb / grid) * u


def potential_split(spec: RadialOperatorSpec):
    """(b, W_k, sup bound) with b = 2(k+alpha)S(0) and W_k = 2(k+alpha)(S - S(0))/r + S^2."""
    if spec.s_full is None:
        s0 = spec.s0
        return spec.coulomb, (lambda r: s0 * s0 + 0.0 * np.asarray(r, dtype=float)), s0 * s0
    if spec.lipschitz_bound is None or spec.sup_bound is None or not math.isfinite(spec.sup_bound):
        raise UnboundedRemainderError("Lipschitz and sup metadata are required to bound the remainder")
    ka = spec.k + spec.alpha
    S, s0 = spec.s_full, spec.s0

    def remainder(r):
        r = np.asarray(r, dtype=float)
        s = np.asarray(S(r), dtype=float)
        return 2 * ka * (s - s0) / r + s * s

    return spec.coulomb, remainder, 2 * abs(ka) * spec.lipschitz_bound + spec.sup_bound**2


# ---------------------------------------------------------------------------
# Plane-side oracle
# ---------------------------------------------------------------------------


def plane_operator(alpha: float, S, psi: Callable, x, y, h: float = 1e-3) -> np.ndarray:
    """(-i grad + A + S)^2 psi for a divergence-free S by Cartesian stencils.

    Uses -Lap psi - 2i (A+S).grad psi + |A+S|^2 psi with 4th-order centred
    differences of step h.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c1 = [(-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12)]
    c2 = [(-2, -1 / 12), (-1, 16 / 12), (0, -30 / 12), (1, 16 / 12), (2, -1 / 12)]
    gx = sum(w * psi(x + j * h, y) for j, w in c1) / h
    gy = sum(w * psi(x, y + j * h) for j, w in c1) / h
    lap = (sum(w * psi(x + j * h, y) for j, w in c2) + sum(w * psi(x, y + j * h) for j, w in c2)) / (h * h)
    ax, ay = ab_potential_xy(alpha, x, y)
    sx, sy = field_xy(S, x, y)
    bx, by = ax + sx, ay + sy
    p = psi(x, y)
    # grouped so that |A|^2 ~ r^-2 never forms on its own near the origin
    return -lap - 2j * (bx * gx + by * gy) + (bx * (bx * p) + by * (by * p))


def project_mode(values: np.ndarray, grid, k: int) -> np.ndarray:
    """sqrt(r) times the k-th angular coefficient of samples on grid x equispaced angles."""
    n = values.shape[1]
    coef = np.fft.fft(values, axis=1)[:, k % n] * (math.sqrt(2 * np.pi) / n)
    return np.sqrt(np.asarray(grid, dtype=float)) * coef


def write_modes_csv(modes: list[HarmonicMode], path) -> None:
    """Columns k, r, Re u, Im u."""
    with open(path, "w") as fh:
        fh.write("k,r,re_u,im_u\n")
        for m in modes:
            for r, v in zip(m.grid, m.u):
                fh.write(f"{m.k},{r:.17g},{v.real:.17g},{v.imag:.17g}\n")
