"""Integration helpers for integrands with kinks at sign changes.

The 1D engine brackets every sign change of a smooth function, pins the roots
with Brent's method, and integrates the pieces with adaptive Gauss-Kronrod
(7/15). Between roots the integrand of neg() or abs() is smooth again, so the
high-order rule keeps its convergence rate.

The 2D engine works on tensor samples: each line is integrated with the
trapezoid rule with the zero crossings of the linear interpolant located
exactly, and refinement doubles the resolution until successive levels agree.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from cgneg import _kernels

# Kronrod 15-point nodes on [-1, 1] (nonnegative half) and weights;
# every odd-indexed node is a Gauss 7-point node.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss weights aligned to the 15 nodes (zero at Kronrod-only nodes)
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[7] = _WG[3]
_GW[[9, 11, 13]] = _WG[:3][::-1]


def gauss_kronrod(f, a, b):
    """Vectorized G7/K15 over segments: returns (kronrod, |kronrod - gauss|)."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    k = half * (fx @ _KW)
    g = half * (fx @ _GW)
    return k, np.abs(k - g)


def adaptive_gk(f, a, b, tol, max_depth=40):
    """Adaptive bisection with G7/K15.

    Returns (value, error_estimate, converged). Each segment must reach an
    error share proportional to its length; segments are processed level by
    level so every f call is vectorized, and the final sum runs in
    left-to-right order.
    """
    if b <= a:
        return 0.0, 0.0, True
    length = b - a
    done = []
    segs = np.array([[a, b]])
    converged = True
    for depth in range(max_depth + 1):
        val, err = gauss_kronrod(f, segs[:, 0], segs[:, 1])
        share = tol * (segs[:, 1] - segs[:, 0]) / length
        ok = (err <= share) | (depth == max_depth)
        if depth == max_depth and not np.all(err <= share):
            converged = False
        for s, v, e in zip(segs[ok], val[ok], err[ok]):
            done.append((s[0], v, e))
        bad = segs[~ok]
        if bad.size == 0:
            break
        mid = 0.5 * (bad[:, 0] + bad[:, 1])
        segs = np.concatenate([np.stack([bad[:, 0], mid], 1), np.stack([mid, bad[:, 1]], 1)])
        segs = segs[np.argsort(segs[:, 0], kind="stable")]
    done.sort(key=lambda t: t[0])
    return math.fsum(v for _, v, _ in done), math.fsum(e for _, _, e in done), converged


def find_roots(f, a, b, samples):
    """Roots of f in [a, b] located from sign changes on ``samples`` uniform points."""
    xs = np.linspace(a, b, int(samples))
    fx = np.asarray(f(xs), dtype=float)
    roots = []
    scalar = lambda t: float(np.asarray(f(np.array([t])), dtype=float)[0])  # noqa: E731
    for i in range(len(xs) - 1):
        f0, f1 = fx[i], fx[i + 1]
        if f0 == 0.0:
            roots.append(xs[i])
        elif f0 * f1 < 0.0:
            roots.append(brentq(scalar, xs[i], xs[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return np.unique(np.array(roots, dtype=float))


def integrate_signed(f, a, b, mode="neg", tol=1e-10, samples=4000, max_depth=40):
    """Integral of neg(f) or abs(f) over [a, b].

    Splits [a, b] at the roots of f, integrates f on each piece, and keeps
    the part selected by ``mode``. Returns (value, error, converged, roots).
    """
    roots = find_roots(f, a, b, samples)
    edges = np.concatenate([[a], roots[(roots > a) & (roots < b)], [b]])
    pieces = []
    err_total = 0.0
    converged = True
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        share = tol * (hi - lo) / (b - a)
        v, e, ok = adaptive_gk(f, lo, hi, share, max_depth)
        converged &= ok
        err_total += e
        if mode == "neg":
            pieces.append(max(-v, 0.0))
        elif mode == "abs":
            pieces.append(abs(v))
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return math.fsum(pieces), err_total, converged, roots


def tensor_neg_integral(values, x_nodes, p_nodes):
    """Trapezoid integral of neg(values) over a tensor grid of nodes.

    Along p the zero crossings of the piecewise-linear interpolant are found
    exactly; the resulting line integrals are combined with the trapezoid
    rule in x.
    """
    dp = p_nodes[1] - p_nodes[0]
    lines = _kernels.neg_line_integrals(np.ascontiguousarray(values, dtype=float), float(dp))
    return float(np.trapezoid(lines, x_nodes))


def _chunked_lines(evaluate, xs, ps, max_cells):
    rows = max(1, max_cells // ps.size)
    dp = ps[1] - ps[0]
    parts = []
    for i in range(0, xs.size, rows):
        block = np.ascontiguousarray(evaluate(xs[i:i + rows], ps), dtype=float)
        parts.append(_kernels.neg_line_integrals(block, float(dp)))
    return np.concatenate(parts)


def refine_neg_integral(evaluate, x_lo, x_hi, p_lo, p_hi, dx0, dp0, tol, max_levels=6, max_cells=2_000_000):
    """Refine a tensor neg() integral with Richardson extrapolation.

    Each level halves both steps. The trapezoid values I_L are extrapolated
    as R_L = I_L + (I_L - I_{L-1}) / 3 and the error is estimated by
    |R_L - R_{L-1}|, so at least three levels are evaluated.
    ``evaluate(xs, ps)`` returns the tensor of samples; it is called on row
    blocks of at most ``max_cells`` samples. Returns
    (value, error_estimate, converged, level).
    """
    nx0 = max(2, int(math.ceil((x_hi - x_lo) / dx0)))
    np0 = max(2, int(math.ceil((p_hi - p_lo) / dp0)))
    plain = []
    extrap = []
    for level in range(max(max_levels, 2) + 1):
        xs = np.linspace(x_lo, x_hi, nx0 * 2**level + 1)
        ps = np.linspace(p_lo, p_hi, np0 * 2**level + 1)
        plain.append(float(np.trapezoid(_chunked_lines(evaluate, xs, ps, max_cells), xs)))
        if level >= 1:
            extrap.append(plain[-1] + (plain[-1] - plain[-2]) / 3.0)
        if level >= 2:
            err = abs(extrap[-1] - extrap[-2])
            if err <= tol:
                return max(extrap[-1], 0.0), err, True, level
    return max(extrap[-1], 0.0), err, False, level
