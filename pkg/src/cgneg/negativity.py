"""Negativity (negative volume) of Wigner functions with error control."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma, gammaincc

from cgneg.quadrature import integrate_signed, refine_neg_integral
from cgneg.smoothing import (
    CoarseGrainSpec,
    WignerGrid,
    analytic_cg_ho,
    raw_ho_closed_form,
)
from cgneg.specfun import assoc_laguerre_coeffs, sqrt_factorial_ratio
from cgneg.states import (
    HODiagonal,
    HOOffDiagonal,
    SquareWell,
    StateSpec,
    offdiag_radial,
    square_well_grid,
    support_radius,
)

UNBOUNDED = math.inf
HO_TOLERANCE = 1e-6
GRID_TOLERANCE = 1e-4


class Status(enum.Enum):
    CONVERGED = "Converged"
    NON_CONVERGENT = "NonConvergent"
    MAX_REFINEMENT = "MaxRefinement"


def neg_part(w):
    """max(-w, 0), elementwise for arrays."""
    if np.ndim(w) == 0:
        w = float(w)
        return -w if w < 0.0 else 0.0
    return np.maximum(-np.asarray(w, dtype=float), 0.0)


@dataclass(frozen=True)
class QuadratureSpec:
    """Cutoffs and tolerances for the negativity integrals.

    ``radial_cutoff`` is a radius in phase space (oscillator states) and
    ``momentum_cutoff`` the start of the momentum tail panels (square well).
    ``None`` selects the automatic extent rules and the default tolerance of
    the route taken.
    """

    radial_cutoff: Optional[float] = None
    momentum_cutoff: Optional[float] = None
    abs_tolerance: Optional[float] = None
    max_refinement_levels: int = 6
    max_tail_panels: int = 16

    def __post_init__(self):
        for name in ("radial_cutoff", "momentum_cutoff", "abs_tolerance"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")
        if self.max_refinement_levels < 1:
            raise ValueError("max_refinement_levels must be a positive integer")
        if self.max_tail_panels < 1:
            raise ValueError("max_tail_panels must be a positive integer")

    def tolerance(self, default: float) -> float:
        return default if self.abs_tolerance is None else self.abs_tolerance


@dataclass(frozen=True)
class NegativityResult:
    eta: float
    error_estimate: float
    truncation_bound: float
    status: Status
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.eta >= 0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")
        if self.status is Status.NON_CONVERGENT and self.truncation_bound != UNBOUNDED:
            raise ValueError("a nonconvergent result has an unbounded truncation error")

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def to_dict(self, details: bool = False) -> dict:
        out = {
            "eta": self.eta,
            "error_estimate": self.error_estimate,
            "truncation_bound": "Unbounded" if self.truncation_bound == UNBOUNDED else self.truncation_bound,
            "status": self.status.value,
        }
        if details and self.details:
            out["details"] = self.details
        return out

    def to_json(self, details: bool = False) -> str:
        return json.dumps(self.to_dict(details))

    @classmethod
    def from_json(cls, text: str) -> "NegativityResult":
        d = json.loads(text)
        tb = d["truncation_bound"]
        return cls(
            float(d["eta"]),
            float(d["error_estimate"]),
            UNBOUNDED if tb == "Unbounded" else float(tb),
            Status(d["status"]),
            d.get("details", {}),
        )


# ---------------------------------------------------------------------------
# radial route
# ---------------------------------------------------------------------------


def negativity_radial(
    f: Callable,
    R: float,
    tol: float = HO_TOLERANCE,
    harmonic: int = 0,
    samples: Optional[int] = None,
    tail_bound: Optional[Callable[[float], float]] = None,
) -> NegativityResult:
    """Negativity of R(r) cos(k theta) given the radial profile f(s), s = r^2.

    For k = 0 this is pi * int neg(f) ds; for k >= 1 the angular average of
    neg(cos k theta) is 1/pi, giving int |f| ds. The range s in [0, R^2] is
    split at the sign changes of f (bracketed on ``samples`` points and
    refined by Brent's method) and each piece is integrated by adaptive
    Gauss-Kronrod.
    """
    if R <= 0:
        raise ValueError("cutoff must be positive")
    s_max = R * R
    mode, scale = ("neg", np.pi) if harmonic == 0 else ("abs", 1.0)
    samples = samples or 4000
    val, err, ok, roots = integrate_signed(f, 0.0, s_max, mode=mode, tol=0.1 * tol / scale, samples=samples)
    trunc = tail_bound(s_max) if tail_bound is not None else 0.0
    status = Status.CONVERGED if ok and scale * err <= tol else Status.MAX_REFINEMENT
    return NegativityResult(
        scale * val,
        scale * err,
        trunc,
        status,
        {"route": "radial", "cutoff": R, "roots": int(roots.size)},
    )


def _root_samples(s_max: float, n: int, k: int, beta: float) -> int:
    # four samples per smallest Laguerre root gap, roughly 24.7 / ((4n+2k+2) beta)
    return int(min(4_000_000, max(4000, 4.0 * s_max * (4 * n + 2 * k + 2) * beta / 24.0)))


def _offdiag_tail(m: int, n: int):
    """Envelope bound for int_S^inf |R_mn(s)| ds of the raw off-diagonal profile."""
    k = m - n
    amp = 2.0 / np.pi * sqrt_factorial_ratio(n, m) * 2.0**k
    coeffs = [abs(float(c)) * 4.0**j for j, c in enumerate(assoc_laguerre_coeffs(n, k))]

    def bound(s_cut: float) -> float:
        tot = 0.0
        for j, c in enumerate(coeffs):
            a = j + 0.5 * k + 1.0
            tot += c * gamma(a) * gammaincc(a, 2.0 * s_cut) / 2.0**a
        return float(amp * tot)

    return bound


def _empirical_extent(f, s0: float, floor: float = 1e-15):
    """Grow s until |f| stays below floor * max|f| on [s, 2s]; returns (s, tail estimate)."""
    probe = np.linspace(0.0, s0, 400)
    peak = float(np.max(np.abs(f(probe)))) or 1.0
    s = s0
    for _ in range(40):
        win = np.linspace(s, 2.0 * s, 200)
        vals = np.abs(f(win))
        if np.max(vals) <= floor * peak:
            # |f| decays at least geometrically past s; integrate the window twice
            return s, float(2.0 * np.trapezoid(vals, win))
        s *= 1.5
    return s, UNBOUNDED


def _ho_negativity(spec: StateSpec, cg: Optional[CoarseGrainSpec], q: QuadratureSpec) -> NegativityResult:
    tol = q.tolerance(HO_TOLERANCE)
    if isinstance(spec, HODiagonal):
        cf = raw_ho_closed_form(spec.n) if cg is None else analytic_cg_ho(spec.n, cg)
        if q.radial_cutoff is not None:
            R = q.radial_cutoff
        else:
            R = math.sqrt(cf.cutoff(min(1e-13, 1e-3 * tol)))
        beta = abs(cf.laguerre_scale) if cf.laguerre_scale is not None else 4.0
        res = negativity_radial(
            cf.radial, R, tol, 0, _root_samples(R * R, spec.n, 0, beta), cf.tail_bound
        )
        return res
    m, n = spec.m, spec.n
    k = m - n
    if cg is None:
        f = lambda s: offdiag_radial(m, n, s)  # noqa: E731
        R = q.radial_cutoff or support_radius(spec, 1e-15)
        tail = _offdiag_tail(m, n)
        beta = 4.0
    else:
        from cgneg.semianalytic import offdiag_cg_radial

        delta = float(cg.delta)
        f = lambda s: offdiag_cg_radial(m, n, cg, s)  # noqa: E731
        if q.radial_cutoff is not None:
            R = q.radial_cutoff
            tail = None
        else:
            s0 = (support_radius(spec) + 4.0 * cg.width) ** 2
            s_cut, est = _empirical_extent(f, s0)
            R = math.sqrt(s_cut)
            tail = lambda _s, est=est: est  # noqa: E731
        beta = 4.0 * max(1.0, min(250.0, delta * delta / max(abs(delta * delta - 4.0), 1e-12)))
    return negativity_radial(f, R, tol, k, _root_samples(R * R, n, k, beta), tail)


# ---------------------------------------------------------------------------
# grid route (the brute-force oracle)
# ---------------------------------------------------------------------------


def negativity_grid(g: WignerGrid) -> NegativityResult:
    """Midpoint sum of neg(W) over a cell-centred grid.

    The error estimate compares against the midpoint rule at three times the
    step, whose cell centres are every third sample. All nine such coarse
    sublattices are tried and the largest |eta_h - eta_3h| is reported; it
    bounds the fine error whenever the coarse error is at least twice the
    fine one. The kinks of neg(W) along nodal curves make the error too
    erratic in h for a Richardson factor. (At twice the step the centres fall
    between samples, and an every-other-cell subsample reproduces the fine sum
    exactly on mirror-symmetric grids.)
    """
    v = g.values
    cell = g.dx * g.dp
    fine = float(np.sum(neg_part(v))) * cell
    spread = 0.0
    if min(v.shape) >= 3:
        for i in range(3):
            for j in range(3):
                coarse = float(np.sum(neg_part(v[i::3, j::3]))) * 9.0 * cell
                spread = max(spread, abs(fine - coarse))
    return NegativityResult(
        fine,
        spread,
        0.0,
        Status.CONVERGED,
        {"route": "grid", "nx": g.geometry.nx, "np": g.geometry.np},
    )


# ---------------------------------------------------------------------------
# square well: 2D integration with momentum tail panels
# ---------------------------------------------------------------------------


class _Recorder:
    """Wraps a tensor evaluator and keeps the running max of |W| p^2."""

    def __init__(self, fn):
        self.fn = fn
        self.k = 0.0

    def __call__(self, xs, ps):
        v = self.fn(xs, ps)
        self.k = max(self.k, float(np.max(np.abs(v) * (ps * ps)[None, :])))
        return v


@dataclass(frozen=True)
class WellIntegrand:
    """A function on the half well x <= pi/2, p >= 0, mirrored to the full plane.

    ``fn(xs, ps)`` returns the tensor of samples, ``x_lo`` is the left end
    of the x range, ``kx(p_hi)`` the largest x-wavenumber on a panel ending
    at p_hi and ``kp`` the largest p-wavenumber. ``noise(xs, ps)``, when
    given, bounds the rounding error of each sample.
    """

    fn: Callable
    x_lo: float
    kx: Callable[[float], float]
    kp: float
    noise: Optional[Callable] = None


def well_integrand(n: int, cg: Optional[CoarseGrainSpec] = None) -> WellIntegrand:
    """Raw or coarse-grained square-well Wigner function as a WellIntegrand."""
    if cg is None:
        return WellIntegrand(
            lambda xs, ps: square_well_grid(n, xs, ps),
            0.0,
            lambda p_hi: 2.0 * (p_hi + n),
            np.pi,
        )
    from cgneg.semianalytic import well_cg_tensor

    x_lo = -cg.truncation_radius
    # the kernel damps wavenumbers q by exp(-q^2 / (4 delta))
    cap = 2.0 * math.sqrt(30.0 * float(cg.delta))
    return WellIntegrand(
        lambda xs, ps: well_cg_tensor(n, cg, xs, ps),
        x_lo,
        lambda p_hi: min(2.0 * (p_hi + n), 2.0 * n + cap),
        min(np.pi + 2.0 * abs(x_lo), cap),
        lambda xs, ps: well_cg_tensor(n, cg, xs, ps, noise=True)[1],
    )


def panel_negativity(f: WellIntegrand, p_lo: float, p_hi: float, tol: float, levels: int = 6):
    """Negativity over p_lo <= |p| <= p_hi (both halves of the well, both signs of p).

    Returns (eta, error_estimate, converged, k) where k = max |W| p^2 seen.
    """
    # four samples per shortest period before refinement; three Richardson
    # levels are always taken, so the finest level has sixteen
    dx0 = np.pi / (2.0 * f.kx(p_hi))
    dp0 = np.pi / (2.0 * f.kp)
    floor = 0.0
    if f.noise is not None:
        # rounding in the samples can create or hide negative volume of at most its integral
        xs = np.linspace(f.x_lo, 0.5 * np.pi, max(2, int(math.ceil((0.5 * np.pi - f.x_lo) / dx0))) + 1)
        ps = np.linspace(p_lo, p_hi, max(2, int(math.ceil((p_hi - p_lo) / dp0))) + 1)
        floor = float(np.trapezoid(np.trapezoid(f.noise(xs, ps), ps, axis=1), xs))
    rec = _Recorder(f.fn)
    val, err, ok, _ = refine_neg_integral(
        rec, f.x_lo, 0.5 * np.pi, p_lo, p_hi, dx0, dp0, max(tol / 4.0, floor), levels
    )
    err += floor
    return 4.0 * val, 4.0 * err, ok, rec.k


def _log_slope(edges, contribs):
    """Least-squares slope of cumulative negativity against ln p at the panel ends."""
    cum = np.cumsum(contribs)
    lp = np.log(np.asarray(edges[1:], dtype=float))
    if lp.size < 2:
        return float("nan")
    return float(np.polyfit(lp, cum, 1)[0])


def octave_negativity(f: WellIntegrand, P: float, q: QuadratureSpec, tol: float) -> NegativityResult:
    """Core panel |p| <= P plus octaves [P, 2P], [2P, 4P], ...

    Stops when an octave contributes less than ``tol`` (Converged), when
    three successive octave ratios exceed 0.85, i.e. a constant share per
    octave and logarithmic growth (NonConvergent), or after
    ``q.max_tail_panels`` octaves (MaxRefinement).
    """
    levels = q.max_refinement_levels
    core, core_err, ok, _ = panel_negativity(f, 0.0, P, 0.25 * tol, levels)
    contribs, errs, edges = [], [], [P]
    all_ok = ok
    status = None
    k_last = 0.0
    lo = P
    for _ in range(q.max_tail_panels):
        hi = 2.0 * lo
        c, e, ok, k_last = panel_negativity(f, lo, hi, 0.125 * tol, levels)
        all_ok &= ok
        contribs.append(c)
        errs.append(e)
        edges.append(hi)
        lo = hi
        if c < tol:
            status = Status.CONVERGED
            break
        if len(contribs) >= 4:
            r = [contribs[-i] / contribs[-i - 1] for i in (1, 2, 3) if contribs[-i - 1] > 0]
            if len(r) == 3 and all(x > 0.85 for x in r):
                status = Status.NON_CONVERGENT
                break
    details = {
        "route": "octave-panels",
        "core": core,
        "panel_edges": edges,
        "panel_contributions": contribs,
        "envelope_k": k_last,
    }
    eta = math.fsum([core] + contribs)
    err = math.fsum([core_err] + errs)
    if status is Status.NON_CONVERGENT:
        details["log_slope"] = _log_slope(edges, contribs)
        return NegativityResult(eta, err, UNBOUNDED, status, details)
    # |W| <= k / p^2 beyond the last panel, over both x halves and p signs
    trunc = 4.0 * (0.5 * np.pi - f.x_lo) * k_last / lo
    if status is None or not all_ok:
        status = Status.MAX_REFINEMENT
    return NegativityResult(eta, err, trunc, status, details)


def negativity_adaptive(
    spec: StateSpec,
    cg: Optional[CoarseGrainSpec] = None,
    q: Optional[QuadratureSpec] = None,
) -> NegativityResult:
    """Negativity of a (possibly coarse-grained) state with error control.

    Oscillator states use the radial route on the exact or semi-analytic
    profile; the square well is integrated in 2D over a core momentum panel
    plus doubling tail panels until a panel contributes less than the
    tolerance.
    """
    q = q or QuadratureSpec()
    if isinstance(spec, SquareWell):
        P = q.momentum_cutoff or (4.0 * spec.n + 8.0)
        return octave_negativity(well_integrand(spec.n, cg), P, q, q.tolerance(GRID_TOLERANCE))
    if isinstance(spec, (HODiagonal, HOOffDiagonal)):
        return _ho_negativity(spec, cg, q)
    raise TypeError(f"unsupported state {spec!r}")
