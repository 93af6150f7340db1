"""Pure numpy versions of the compiled kernels in ``_core.pyx``.

Each function computes the same sums in the same order as its compiled twin.
"""
import numpy as np


def laguerre_array(n, a, x):
    x = np.asarray(x, dtype=float)
    l0 = np.ones_like(x)
    if n == 0:
        return l0
    l1 = 1.0 + a - x
    for k in range(1, n):
        l0, l1 = l1, ((2.0 * k + 1.0 + a - x) * l1 - (k + a) * l0) / (k + 1.0)
    return l1


def _half_sinc(a, x):
    small = np.abs(a) < 1e-4
    safe = np.where(small, 1.0, a)
    return np.where(small, 0.5 * x - a * a * x * x * x / 3.0, np.sin(2.0 * a * x) / (4.0 * safe))


def well_wigner_grid(n, xs, ps):
    xs = np.asarray(xs, dtype=float)[:, None]
    ps = np.asarray(ps, dtype=float)[None, :]
    inside = (xs >= 0.0) & (xs <= np.pi)
    xt = np.where(xs <= np.pi - xs, xs, np.pi - xs)
    c2 = np.cos(2.0 * n * xt)
    val = (2.0 / (np.pi * np.pi)) * (
        _half_sinc(ps + n, xt) + _half_sinc(ps - n, xt) - 2.0 * c2 * _half_sinc(ps, xt)
    )
    return np.where(inside, val, 0.0)


def conv_axis0(v, k):
    v = np.asarray(v, dtype=float)
    nx = v.shape[0]
    r = (len(k) - 1) // 2
    out = np.zeros_like(v)
    for t, kt in enumerate(k):
        shift = t - r
        lo, hi = max(0, -shift), min(nx, nx - shift)
        if lo >= hi:
            continue
        out[lo:hi] += kt * v[lo + shift:hi + shift]
    return out


def neg_line_integrals(v, h):
    v = np.asarray(v, dtype=float)
    f0, f1 = v[:, :-1], v[:, 1:]
    both_neg = (f0 <= 0.0) & (f1 <= 0.0)
    cross = (f0 < 0.0) != (f1 < 0.0)
    cross &= ~both_neg
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.minimum(f0, f1)
        part = np.where(cross, 0.5 * h * lo * lo / np.abs(f1 - f0), 0.0)
    part = np.where(both_neg, -0.5 * h * (f0 + f1), part)
    return part.sum(axis=1)
