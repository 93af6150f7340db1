"""Coarse-graining routes that reduce the 2D convolution to 1D integrals.

Square well
    Writing the Wigner function as (1/pi) int psi(x+y) psi(x-y) e^{2ipy} dy
    and integrating the Gaussian over momentum first, the smoothed function
    becomes a double integral over x1 = x'+y, x2 = x'-y of
    psi(x1) psi(x2) e^{ip(x1-x2)} times a Gaussian in (x1, x2). In
    u = x1 - x2, v = x1 + x2 the v integral is elementary (erf and the
    Faddeeva function), leaving

        W_cg(x, p) = 2K int_0^pi cos(p u) G(x, u) du,   K = sqrt(pi/delta) / (4 pi^2)

    with G smooth in u. The u integral is done Filon-style: G is expanded in
    Legendre polynomials and each term is integrated against cos(p u) exactly
    through spherical Bessel functions, so accuracy does not degrade with p.

Off-diagonal oscillator elements
    W_mn = R(r) cos(k theta) stays in angular harmonic k under an isotropic
    Gaussian, with radial profile
        R_cg(r) = 2 pi int r' R(r') e^{-delta (r - r')^2} ive(k, 2 delta r r') dr'.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import erf, eval_legendre, ive, roots_legendre, spherical_jn, wofz

from cgneg.states import offdiag_radial, support_radius, HOOffDiagonal


@lru_cache(maxsize=64)
def _gauss_legendre(n: int):
    t, w = roots_legendre(n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def _scaled_erf(a, b):
    """exp(-b^2) * erf(a - i b) for real a and b >= 0, overflow-free."""
    a = np.asarray(a, dtype=float)
    aa = np.abs(a)
    # erfc(z) = exp(-z^2) w(iz) with iz = b + i|a| in the upper half plane
    val = np.exp(-b * b) - np.exp(-aa * aa + 2j * aa * b) * wofz(b + 1j * aa)
    return np.where(a < 0, -np.conj(val), val)


def _well_profile(n: int, delta: float, x, u):
    """G(x, u) = exp(-u^2 / (4 delta)) * int_u^{2pi-u} e^{-delta (v - 2x)^2 / 4} (cos nu - cos nv) dv."""
    sd = math.sqrt(delta)
    root = math.sqrt(np.pi / delta)
    hi = sd * (2.0 * np.pi - u - 2.0 * x) / 2.0
    lo = sd * (u - 2.0 * x) / 2.0
    i0 = root * (erf(hi) - erf(lo))
    b = n / sd
    i1 = np.real(np.exp(2j * n * x) * root * (_scaled_erf(hi, b) - _scaled_erf(lo, b)))
    return np.exp(-u * u / (4.0 * delta)) * (np.cos(n * u) * i0 - i1)


def legendre_order(n: int, delta: float) -> int:
    """Number of Legendre terms used for G on [0, pi]."""
    return int(48 + 3 * n + 8 * math.sqrt(delta))


def well_profile_coeffs(n: int, delta: float, xs, order: int | None = None):
    """Legendre coefficients of G(x, u(t)), u = pi (1 + t) / 2; shape (len(xs), order)."""
    m = order or legendre_order(n, delta)
    t, w = _gauss_legendre(m + 24)
    u = 0.5 * np.pi * (1.0 + t)
    g = _well_profile(n, delta, np.asarray(xs, dtype=float)[:, None], u[None, :])
    ks = np.arange(m)
    basis = eval_legendre(ks[:, None], t[None, :])  # (m, nodes)
    return (g * w) @ basis.T * (ks + 0.5)


def _cos_moments(ps, order: int):
    """int_{-1}^{1} cos(omega (1 + t)) P_k(t) dt with omega = |p| pi / 2; shape (order, len(ps))."""
    omega = 0.5 * np.pi * np.abs(np.asarray(ps, dtype=float))
    ks = np.arange(order)[:, None]
    return 2.0 * np.cos(omega[None, :] + 0.5 * np.pi * ks) * spherical_jn(ks, omega[None, :])


def well_cg_tensor(n: int, cg, xs, ps, chunk: int = 2048, noise: bool = False):
    """Coarse-grained square-well Wigner function on the tensor grid xs x ps.

    With ``noise=True`` returns (values, bound) where bound estimates the
    rounding error of each value: 8 eps times the sum of |term| over the
    Legendre expansion.
    """
    delta = float(cg.delta)
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    coeffs = well_profile_coeffs(n, delta, xs)
    scale = 2.0 * math.sqrt(np.pi / delta) / (4.0 * np.pi**2) * 0.5 * np.pi * cg.mass_factor
    out = np.empty((xs.size, ps.size))
    err = np.empty((xs.size, ps.size)) if noise else None
    for lo in range(0, ps.size, chunk):
        sl = slice(lo, lo + chunk)
        mom = _cos_moments(ps[sl], coeffs.shape[1])
        out[:, sl] = scale * (coeffs @ mom)
        if noise:
            err[:, sl] = 8.0 * np.finfo(float).eps * abs(scale) * (np.abs(coeffs) @ np.abs(mom))
    return (out, err) if noise else out


# ---------------------------------------------------------------------------
# off-diagonal oscillator elements
# ---------------------------------------------------------------------------


def _radial_nodes(m: int, n: int, delta: float):
    r_max = support_radius(HOOffDiagonal(m, n))
    panel = min(0.25, 0.5 / math.sqrt(delta))
    npan = int(math.ceil(r_max / panel))
    t, w = _gauss_legendre(12)
    edges = np.linspace(0.0, r_max, npan + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def offdiag_cg_radial(m: int, n: int, cg, s):
    """Radial profile of the coarse-grained |m><n| Wigner function at s = r^2."""
    delta = float(cg.delta)
    k = m - n
    s = np.asarray(s, dtype=float)
    r = np.sqrt(s).ravel()
    rp, wp = _radial_nodes(m, n, delta)
    src = wp * rp * offdiag_radial(m, n, rp * rp)
    out = np.empty_like(r)
    for lo in range(0, r.size, 512):
        rr = r[lo:lo + 512, None]
        kern = np.exp(-delta * (rr - rp[None, :]) ** 2) * ive(k, 2.0 * delta * rr * rp[None, :])
        out[lo:lo + 512] = kern @ src
    return (2.0 * np.pi * cg.mass_factor * out).reshape(s.shape)


def offdiag_cg_tensor(m: int, n: int, cg, xs, ps):
    xs = np.asarray(xs, dtype=float)[:, None]
    ps = np.asarray(ps, dtype=float)[None, :]
    s = xs * xs + ps * ps
    k = m - n
    radial = offdiag_cg_radial(m, n, cg, s)
    if k == 0:
        return radial
    r = np.sqrt(s)
    safe = np.where(r > 0, r, 1.0)
    ang = np.real(((xs + 1j * ps) / safe) ** k)
    return np.where(r > 0, radial * ang, 0.0)
