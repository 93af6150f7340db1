"""Gaussian coarse-graining of Wigner functions.

Three routes are provided:

* exact Gaussian-times-polynomial closed forms for oscillator eigenstates,
* direct truncated-kernel convolution of sampled grids (the reference
  numerical route, used as an oracle for everything else),
* semi-analytic evaluators for the square well and off-diagonal oscillator
  elements (see :mod:`cgneg.semianalytic`).

The kernel is exp(-delta((x-x')^2 + (p-p')^2)). With ``KernelMass.PAPER`` it
is used as is (total mass pi/delta); ``KernelMass.UNIT`` rescales it by
delta/pi so smoothing preserves the integral.
"""
from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Optional

import numpy as np
from scipy.special import gammaincc

from cgneg import _kernels
from cgneg.errors import DegreeTooLarge, KernelUnderresolved, ResolutionTooCoarse
from cgneg.specfun import MAX_EXACT_DEGREE, laguerre, laguerre_coeffs, poly_eval
from cgneg.states import (
    HODiagonal,
    HOOffDiagonal,
    PhasePoint,
    SquareWell,
    StateSpec,
    max_wavenumber,
    support_radius,
    wigner_tensor,
)

# exp(-delta u^2) < KERNEL_FLOOR is dropped
KERNEL_FLOOR = 1e-14


class KernelMass(enum.Enum):
    PAPER = "paper"
    UNIT = "unit"


@dataclass(frozen=True)
class CoarseGrainSpec:
    delta: float
    kernel_mass: KernelMass = KernelMass.PAPER

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(float(self.delta))):
            raise ValueError("delta must be a positive finite number")
        if isinstance(self.kernel_mass, str):
            object.__setattr__(self, "kernel_mass", KernelMass(self.kernel_mass))

    @property
    def mass_factor(self) -> float:
        """Multiplier applied to the bare kernel."""
        return 1.0 if self.kernel_mass is KernelMass.PAPER else float(self.delta) / np.pi

    @property
    def total_mass(self) -> float:
        return np.pi / float(self.delta) * self.mass_factor

    @property
    def width(self) -> float:
        return 1.0 / math.sqrt(float(self.delta))

    @property
    def truncation_radius(self) -> float:
        """Distance beyond which the kernel falls below KERNEL_FLOOR."""
        return math.sqrt(-math.log(KERNEL_FLOOR) / float(self.delta))


def _exact_delta(delta):
    """Return delta as a Fraction when it is (representably) rational, else None."""
    if isinstance(delta, (int, Fraction)):
        return Fraction(delta)
    f = Fraction(float(delta)).limit_denominator(10**6)
    return f if float(f) == float(delta) else None


# ---------------------------------------------------------------------------
# closed forms for oscillator eigenstates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedFormCG:
    """prefactor * exp(-decay * s) * poly(s), s = x^2 + p^2.

    ``poly`` is monic (exact rationals when delta is rational). When
    ``laguerre_scale`` is set the same function equals
    ``laguerre_amp * exp(-decay s) * L_n(laguerre_scale * s)``, which is what
    floating-point evaluation uses: the power basis cancels badly for large n.
    """

    n: int
    decay: float
    poly: tuple
    prefactor: float
    laguerre_scale: Optional[float] = None
    laguerre_amp: Optional[float] = None
    prefactor_exact: Optional[Fraction] = None
    delta: Optional[float] = None

    def radial(self, s):
        s = np.asarray(s, dtype=float)
        if self.laguerre_scale is not None:
            return self.laguerre_amp * np.exp(-self.decay * s) * laguerre(self.n, self.laguerre_scale * s)
        return self.prefactor * np.exp(-self.decay * s) * poly_eval(self.poly, s)

    def tail_bound(self, s_cut: float) -> float:
        """Upper bound on pi * int_{s_cut}^inf |f(s)| ds.

        Uses |P(s)| <= sum_j |c_j| s^j and the upper incomplete gamma function.
        """
        c = self.decay
        total = 0.0
        for j, cj in enumerate(self.poly):
            if cj == 0:
                continue
            total += abs(float(cj)) * factorial(j) * gammaincc(j + 1, c * s_cut) / c ** (j + 1)
        return float(np.pi * abs(self.prefactor) * total)

    def cutoff(self, floor: float = 1e-13) -> float:
        """Smallest probed s with tail_bound(s) < floor."""
        s = max(1.0, 2.0 * self.n / self.decay)
        while self.tail_bound(s) >= floor:
            s *= 1.25
        return s


def _moment_poly(n: int, delta):
    """Power-basis coefficients (in s) of the smoothed n-th oscillator Wigner function.

    Term by term over L_n(4 s') = sum_k l_k 4^k s'^k: after completing the
    square the s'^k e^{-2 s'} moment against the kernel becomes a noncentral
    complex-Gaussian moment,
        int e^{-a|w|^2} |w + c|^{2k} d^2w = (pi/a) sum_j C(k,j) k!/j! a^{j-k} |c|^{2j},
    with a = delta + 2 and |c|^2 = delta^2 s / a^2.
    Returns coefficients without the common factor 2 (-1)^n / pi * pi / a.
    """
    a = delta + 2
    ell = laguerre_coeffs(n)
    out = [0] * (n + 1)
    shift = delta * delta / (a * a)
    for k, lk in enumerate(ell):
        base = lk * 4**k
        for j in range(k + 1):
            out[j] += base * comb(k, j) * Fraction(factorial(k), factorial(j)) * (1 / a) ** (k - j) * shift**j
    return out


def analytic_cg_ho(n: int, cg: CoarseGrainSpec) -> ClosedFormCG:
    """Exact Gaussian coarse-graining of the n-th oscillator eigenstate."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > MAX_EXACT_DEGREE:
        raise DegreeTooLarge(f"n={n} exceeds {MAX_EXACT_DEGREE}")
    d_exact = _exact_delta(cg.delta)
    d = d_exact if d_exact is not None else float(cg.delta)
    if d_exact is None:
        # float route: same algebra, coefficients in floating point
        a = d + 2.0
        ell = [float(c) for c in laguerre_coeffs(n)]
        shift = d * d / (a * a)
        raw = [0.0] * (n + 1)
        for k, lk in enumerate(ell):
            for j in range(k + 1):
                raw[j] += lk * 4.0**k * comb(k, j) * factorial(k) / factorial(j) * a ** (j - k) * shift**j
    else:
        raw = _moment_poly(n, d)
    a = d + 2
    lead = raw[n]
    poly = tuple(c / lead for c in raw)
    if d_exact is None and abs(float(d) - 2.0) >= 1e-3:
        # the float moment sums cancel near delta = 2; the monic coefficients of
        # L_n(beta s) are C(n, j) n!/j! (-beta)^(j-n), free of cancellation
        beta = 4.0 * d * d / (d * d - 4.0)
        poly = tuple(comb(n, j) * factorial(n) / factorial(j) * (-beta) ** (j - n) for j in range(n + 1))
    # 2(-1)^n/pi from the Wigner function times pi/a from the Gaussian moment
    scale = 2 * (-1) ** n * lead / a
    prefactor = float(scale) * cg.mass_factor
    pref_exact = Fraction(scale) if (d_exact is not None and cg.kernel_mass is KernelMass.PAPER) else None
    df = float(d)
    decay = 2.0 * df / (df + 2.0)
    lag_scale = lag_amp = None
    if abs(df - 2.0) >= 1e-3:
        lag_scale = 4.0 * df * df / (df * df - 4.0)
        lag_amp = (2.0 / (df + 2.0)) * ((2.0 - df) / (df + 2.0)) ** n * cg.mass_factor
    return ClosedFormCG(
        n=n,
        decay=decay,
        poly=poly,
        prefactor=prefactor,
        laguerre_scale=lag_scale,
        laguerre_amp=lag_amp,
        prefactor_exact=pref_exact,
        delta=df,
    )


def raw_ho_closed_form(n: int) -> ClosedFormCG:
    """The unsmoothed oscillator Wigner function in ClosedFormCG form."""
    ell = laguerre_coeffs(n)
    lead = ell[n] * 4**n
    poly = tuple(c * 4**k / lead for k, c in enumerate(ell))
    return ClosedFormCG(
        n=n,
        decay=2.0,
        poly=poly,
        prefactor=float(2 * (-1) ** n * lead) / np.pi,
        laguerre_scale=4.0,
        laguerre_amp=2.0 * (-1) ** n / np.pi,
        delta=None,
    )


def eval_closed_form(cf: ClosedFormCG, x, p=None):
    if p is None:
        if not isinstance(x, PhasePoint):
            raise TypeError("pass a PhasePoint or both x and p")
        x, p = x.x, x.p
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    out = cf.radial(x * x + p * p)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridGeometry:
    x0: float
    p0: float
    dx: float
    dp: float
    nx: int
    np: int

    def __post_init__(self):
        if not (self.dx > 0 and self.dp > 0):
            raise ValueError("cell sizes must be positive")
        if self.nx < 1 or self.np < 1:
            raise ValueError("cell counts must be positive")

    @classmethod
    def covering(cls, x_lo, x_hi, p_lo, p_hi, dx, dp):
        """Smallest grid with cells of at most (dx, dp) covering the box."""
        nx = max(1, int(math.ceil((x_hi - x_lo) / dx)))
        npp = max(1, int(math.ceil((p_hi - p_lo) / dp)))
        return cls(x_lo, p_lo, (x_hi - x_lo) / nx, (p_hi - p_lo) / npp, nx, npp)

    @property
    def xs(self):
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def ps(self):
        return self.p0 + (np.arange(self.np) + 0.5) * self.dp

    def to_dict(self):
        return {"x0": self.x0, "p0": self.p0, "dx": self.dx, "dp": self.dp, "nx": self.nx, "np": self.np}


@dataclass(frozen=True)
class WignerGrid:
    """Cell-centred samples; values[i, j] is W at (xs[i], ps[j])."""

    geometry: GridGeometry
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.shape != (self.geometry.nx, self.geometry.np):
            raise ValueError(f"values shape {v.shape} does not match geometry")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dx(self):
        return self.geometry.dx

    @property
    def dp(self):
        return self.geometry.dp

    @property
    def xs(self):
        return self.geometry.xs

    @property
    def ps(self):
        return self.geometry.ps

    def integral(self) -> float:
        return float(self.values.sum() * self.dx * self.dp)

    def scaled(self, factor: float) -> "WignerGrid":
        return WignerGrid(self.geometry, self.values * factor)

    # serialization -------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({"geometry": self.geometry.to_dict(), "values": self.values.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "WignerGrid":
        obj = json.loads(text)
        geom = GridGeometry(**obj["geometry"])
        return cls(geom, np.array(obj["values"], dtype=float).reshape(geom.nx, geom.np))

    def write_csv(self, fh) -> None:
        """Geometry comment line, then header ``x,p,w`` and row-major samples."""
        g = self.geometry
        fh.write("# " + ",".join(f"{k}={v!r}" for k, v in g.to_dict().items()) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "p", "w"])
        xs, ps = self.xs, self.ps
        for i in range(g.nx):
            for j in range(g.np):
                w.writerow([f"{xs[i]:.17g}", f"{ps[j]:.17g}", f"{self.values[i, j]:.17g}"])

    @classmethod
    def read_csv(cls, fh) -> "WignerGrid":
        first = fh.readline()
        geom = None
        if first.startswith("#"):
            fields = dict(item.split("=", 1) for item in first[1:].strip().split(","))
            geom = GridGeometry(
                float(fields["x0"]), float(fields["p0"]), float(fields["dx"]), float(fields["dp"]),
                int(fields["nx"]), int(fields["np"]),
            )
            header = fh.readline()
        else:
            header = first
        if header.strip() != "x,p,w":
            raise ValueError(f"unexpected CSV header {header.strip()!r}")
        rows = np.array([[float(t) for t in line.split(",")] for line in fh if line.strip()])
        if geom is None:
            xs = np.unique(rows[:, 0])
            ps = np.unique(rows[:, 1])
            dx = (xs[-1] - xs[0]) / max(len(xs) - 1, 1) if len(xs) > 1 else 1.0
            dp = (ps[-1] - ps[0]) / max(len(ps) - 1, 1) if len(ps) > 1 else 1.0
            geom = GridGeometry(xs[0] - dx / 2, ps[0] - dp / 2, dx, dp, len(xs), len(ps))
        return cls(geom, rows[:, 2].reshape(geom.nx, geom.np))


def resolution_limits(spec: StateSpec, p_max: float = 0.0, delta: Optional[float] = None):
    """Largest admissible (dx, dp): eight cells per shortest period of W,
    and eight cells per kernel width when ``delta`` is given."""
    k = max_wavenumber(spec, p_max)
    dx = np.pi / (4.0 * k)
    if isinstance(spec, SquareWell):
        # p-oscillation of sin(2 p x) has wavenumber 2 x <= 2 pi
        dp = np.pi / (4.0 * 2.0 * np.pi)
    else:
        dp = dx
    if delta is not None:
        kern = 1.0 / (8.0 * math.sqrt(delta))
        dx, dp = min(dx, kern), min(dp, kern)
    return dx, dp


def auto_geometry(
    spec: StateSpec,
    cg: Optional[CoarseGrainSpec] = None,
    p_max: Optional[float] = None,
    refine: float = 1.0,
) -> GridGeometry:
    """Grid obeying the extent and resolution rules for ``spec``.

    Oscillator states: a square of half-width support_radius + 4 kernel
    widths. Square well: x in [0, pi] padded by 4 kernel widths, |p| up to
    ``p_max`` plus the kernel truncation radius (the output is meaningful only
    on |p| <= p_max since the momentum tails are cut).
    """
    delta = None if cg is None else float(cg.delta)
    pad = 0.0 if cg is None else 4.0 * cg.width
    if isinstance(spec, SquareWell):
        if p_max is None:
            p_max = 4.0 * spec.n + 8.0
        p_ext = p_max + (0.0 if cg is None else cg.truncation_radius)
        dx, dp = resolution_limits(spec, p_ext, delta)
        return GridGeometry.covering(-pad, np.pi + pad, -p_ext, p_ext, dx / refine, dp / refine)
    r = support_radius(spec) + pad
    dx, dp = resolution_limits(spec, 0.0, delta)
    d = min(dx, dp) / refine
    return GridGeometry.covering(-r, r, -r, r, d, d)


def grid_sample(spec: StateSpec, geometry: GridGeometry, p_max: Optional[float] = None) -> WignerGrid:
    """Cell-centred samples of W for ``spec``.

    Raises ResolutionTooCoarse when the cells exceed eight per shortest period.
    """
    if p_max is None:
        p_max = max(abs(geometry.p0), abs(geometry.p0 + geometry.np * geometry.dp))
    dx_max, dp_max = resolution_limits(spec, p_max)
    if geometry.dx > dx_max * (1 + 1e-12) or geometry.dp > dp_max * (1 + 1e-12):
        raise ResolutionTooCoarse(
            f"cells ({geometry.dx:.4g}, {geometry.dp:.4g}) exceed limits ({dx_max:.4g}, {dp_max:.4g}) for {spec}"
        )
    return WignerGrid(geometry, wigner_tensor(spec, geometry.xs, geometry.ps))


def _kernel_taps(delta: float, h: float) -> np.ndarray:
    r = int(math.floor(math.sqrt(-math.log(KERNEL_FLOOR) / delta) / h))
    t = np.arange(-r, r + 1) * h
    return np.exp(-delta * t * t)


def grid_convolve(g: WignerGrid, cg: CoarseGrainSpec, method: str = "direct") -> WignerGrid:
    """Discrete Gaussian coarse-graining of a sampled grid.

    ``direct`` sums the truncated separable kernel explicitly (x pass, then p
    pass, each tap in ascending order); ``fft`` uses scipy's FFT convolution
    and is only an accelerator for the same sum.
    """
    delta = float(cg.delta)
    if cg.width < 4 * g.dx or cg.width < 4 * g.dp:
        raise KernelUnderresolved(
            f"kernel width {cg.width:.4g} spans fewer than 4 cells (dx={g.dx:.4g}, dp={g.dp:.4g})"
        )
    kx = _kernel_taps(delta, g.dx) * g.dx
    kp = _kernel_taps(delta, g.dp) * (g.dp * cg.mass_factor)
    if method == "direct":
        tmp = _kernels.conv_axis0(np.ascontiguousarray(g.values), kx)
        out = _kernels.conv_axis0(np.ascontiguousarray(tmp.T), kp).T
    elif method == "fft":
        from scipy.signal import fftconvolve

        out = fftconvolve(g.values, np.outer(kx, kp), mode="same")
    else:
        raise ValueError(f"unknown method {method!r}")
    return WignerGrid(g.geometry, np.ascontiguousarray(out))


def smooth_grid(spec: StateSpec, cg: Optional[CoarseGrainSpec], geometry: GridGeometry) -> WignerGrid:
    """Coarse-grained samples from the most accurate available route.

    Oscillator eigenstates use the closed form, off-diagonal elements the
    angular-harmonic radial convolution, the square well the semi-analytic
    evaluator. With ``cg=None`` this is plain sampling.
    """
    from cgneg import semianalytic

    xs, ps = geometry.xs, geometry.ps
    if cg is None:
        return WignerGrid(geometry, wigner_tensor(spec, xs, ps))
    if isinstance(spec, HODiagonal):
        cf = analytic_cg_ho(spec.n, cg)
        vals = eval_closed_form(cf, xs[:, None], ps[None, :])
    elif isinstance(spec, HOOffDiagonal):
        vals = semianalytic.offdiag_cg_tensor(spec.m, spec.n, cg, xs, ps)
    else:
        vals = semianalytic.well_cg_tensor(spec.n, cg, xs, ps)
    return WignerGrid(geometry, np.asarray(vals))
