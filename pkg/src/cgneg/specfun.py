"""Laguerre polynomials and factorial-scale helpers.

Floating-point values always come from the three-term recurrence, which is
forward-stable for nonnegative arguments. Exact rational coefficients are a
separate path used only to build closed-form coarse-grained functions.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb, factorial, lgamma

import numpy as np

from cgneg import _kernels
from cgneg.errors import DegreeTooLarge

MAX_EXACT_DEGREE = 64

PolyCoeffs = tuple  # tuple of Fraction (or float), index k -> coefficient of t**k


def laguerre(n: int, x):
    """L_n(x) via (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}.

    Accepts scalars or arrays; scalars come back as Python floats.
    """
    return assoc_laguerre(n, 0, x)


def assoc_laguerre(n: int, a: int, x):
    """Generalized Laguerre polynomial L_n^a(x) for integer a >= 0."""
    if n < 0 or a < 0:
        raise ValueError("n and a must be nonnegative")
    arr = np.asarray(x, dtype=float)
    out = _kernels.laguerre_array(int(n), float(a), np.ascontiguousarray(arr.ravel()))
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def laguerre_coeffs(n: int) -> PolyCoeffs:
    """Exact monomial coefficients of L_n, lowest power first."""
    return assoc_laguerre_coeffs(n, 0)


def assoc_laguerre_coeffs(n: int, a: int = 0) -> PolyCoeffs:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > MAX_EXACT_DEGREE:
        raise DegreeTooLarge(f"degree {n} exceeds exact-arithmetic cap {MAX_EXACT_DEGREE}")
    return tuple(
        Fraction((-1) ** k * comb(n + a, n - k), factorial(k)) for k in range(n + 1)
    )


def poly_eval(coeffs, t):
    """Horner evaluation of a coefficient tuple (lowest power first)."""
    t = np.asarray(t, dtype=float)
    acc = np.zeros_like(t)
    for c in reversed(coeffs):
        acc = acc * t + float(c)
    return acc


def poly_eval_exact(coeffs, t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def log_factorial(n: int) -> float:
    return lgamma(n + 1.0)


def sqrt_factorial_ratio(n: int, m: int) -> float:
    """sqrt(n!/m!) without forming either factorial."""
    return float(np.exp(0.5 * (log_factorial(n) - log_factorial(m))))
