"""Pointwise Wigner functions for oscillator and infinite-square-well states.

Units are m = omega = hbar = 1. The square well has width pi and occupies
0 <= x <= pi. All evaluators broadcast over numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from cgneg import _fallback, _kernels
from cgneg.specfun import assoc_laguerre, laguerre, sqrt_factorial_ratio

WELL_WIDTH = np.pi


@dataclass(frozen=True)
class PhasePoint:
    x: float
    p: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.p)):
            raise ValueError("phase-space coordinates must be finite")


@dataclass(frozen=True, order=True)
class HODiagonal:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("HODiagonal requires n >= 0")

    kind = "ho"

    @property
    def m(self):
        return None

    def __str__(self):
        return f"ho:n={self.n}"


@dataclass(frozen=True, order=True)
class HOOffDiagonal:
    """Wigner transform of |m><n| (real part), m >= n."""

    m: int
    n: int

    def __post_init__(self):
        if not (self.m >= self.n >= 0):
            raise ValueError("HOOffDiagonal requires m >= n >= 0")

    kind = "ho"

    @property
    def harmonic(self):
        return self.m - self.n

    def __str__(self):
        return f"ho:m={self.m},n={self.n}"


@dataclass(frozen=True, order=True)
class SquareWell:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("SquareWell requires n >= 1")

    kind = "well"

    @property
    def m(self):
        return None

    def __str__(self):
        return f"well:n={self.n}"


StateSpec = Union[HODiagonal, HOOffDiagonal, SquareWell]


def _coords(x, p):
    if p is None:
        if not isinstance(x, PhasePoint):
            raise TypeError("pass a PhasePoint or both x and p")
        return x.x, x.p
    return np.asarray(x, dtype=float), np.asarray(p, dtype=float)


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def ho_radial(n: int, s):
    """Radial profile of the n-th oscillator Wigner function, s = x**2 + p**2."""
    s = np.asarray(s, dtype=float)
    return 2.0 * (-1) ** n / np.pi * np.exp(-2.0 * s) * laguerre(n, 4.0 * s)


def ho_wigner(n: int, x, p=None):
    x, p = _coords(x, p)
    return _scalar(ho_radial(n, x * x + p * p))


def offdiag_radial(m: int, n: int, s):
    """R(s) with W_mn = R(s) cos((m-n) theta)."""
    k = m - n
    s = np.asarray(s, dtype=float)
    amp = 2.0 * (-1) ** n / np.pi * sqrt_factorial_ratio(n, m)
    return amp * np.exp(-2.0 * s) * (4.0 * s) ** (0.5 * k) * assoc_laguerre(n, k, 4.0 * s)


def ho_offdiag_wigner(m: int, n: int, x, p=None):
    """Off-diagonal oscillator Wigner function.

    The angle is the full polar angle of (x, p); (2r)^k cos(k theta) is
    computed as Re[(2x + 2ip)^k], a polynomial in x and p, so the result is
    smooth through the p axis and zero at the origin for k > 0.
    """
    if not m >= n >= 0:
        raise ValueError("requires m >= n >= 0")
    x, p = _coords(x, p)
    k = m - n
    s = x * x + p * p
    amp = 2.0 * (-1) ** n / np.pi * sqrt_factorial_ratio(n, m)
    harmonic = np.real((2.0 * x + 2.0j * p) ** k) if k else 1.0
    return _scalar(amp * np.exp(-2.0 * s) * harmonic * assoc_laguerre(n, k, 4.0 * s))


def square_well_wigner(n: int, x, p=None):
    """Square-well Wigner function; zero outside 0 <= x <= pi."""
    if n < 1:
        raise ValueError("requires n >= 1")
    x, p = _coords(x, p)
    x, p = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(p, dtype=float))
    inside = (x >= 0.0) & (x <= np.pi)
    xt = np.where(x <= np.pi - x, x, np.pi - x)
    hs = _fallback._half_sinc
    val = (2.0 / np.pi**2) * (hs(p + n, xt) + hs(p - n, xt) - 2.0 * np.cos(2.0 * n * xt) * hs(p, xt))
    return _scalar(np.where(inside, val, 0.0))


def square_well_grid(n: int, xs, ps):
    """Tensor evaluation: result[i, j] = W(xs[i], ps[j])."""
    return _kernels.well_wigner_grid(
        int(n), np.ascontiguousarray(xs, dtype=float), np.ascontiguousarray(ps, dtype=float)
    )


def wigner(spec: StateSpec, x, p=None):
    if isinstance(spec, HODiagonal):
        return ho_wigner(spec.n, x, p)
    if isinstance(spec, HOOffDiagonal):
        return ho_offdiag_wigner(spec.m, spec.n, x, p)
    if isinstance(spec, SquareWell):
        return square_well_wigner(spec.n, x, p)
    raise TypeError(f"unknown state spec {spec!r}")


def wigner_tensor(spec: StateSpec, xs, ps):
    """result[i, j] = W(xs[i], ps[j])."""
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    if isinstance(spec, SquareWell):
        return square_well_grid(spec.n, xs, ps)
    return np.asarray(wigner(spec, xs[:, None], ps[None, :]))


def max_wavenumber(spec: StateSpec, p_max: float = 0.0) -> float:
    """Largest local angular wavenumber of W over the sampled region.

    Square well: sin(2(p + n)x) oscillates at 2(|p|max + n) in x.
    Oscillator: near the origin L_n^k(4r^2) e^{-2r^2} behaves like
    J_k(4 r sqrt(nu)), nu = (m + n + 1)/2, giving 4 sqrt(nu).
    """
    if isinstance(spec, SquareWell):
        return 2.0 * (abs(p_max) + spec.n)
    m = spec.m if isinstance(spec, HOOffDiagonal) else spec.n
    return 4.0 * np.sqrt((m + spec.n + 1) / 2.0)


def support_radius(spec: StateSpec, floor: float = 1e-12) -> float:
    """Radius beyond which an oscillator W stays below ``floor``."""
    if isinstance(spec, SquareWell):
        raise ValueError("the square well has unbounded momentum support")
    m = spec.m if isinstance(spec, HOOffDiagonal) else spec.n
    # outside the classical turning circle r^2 = m + n + 1 the Gaussian wins;
    # scan outward on a coarse grid of radii
    r = np.sqrt(m + spec.n + 1.0)
    while True:
        rs = np.linspace(r, r + 1.0, 41)
        vals = np.abs(wigner(spec, rs, np.zeros_like(rs)))
        if isinstance(spec, HOOffDiagonal):
            vals = np.abs(offdiag_radial(spec.m, spec.n, rs * rs))
        if np.all(vals < floor):
            return float(r)
        r += 0.5
