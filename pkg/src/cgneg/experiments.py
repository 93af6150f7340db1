"""Parameter sweeps and tail scans behind the figure data."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from cgneg.errors import NoInteriorMaximum
from cgneg.negativity import (
    QuadratureSpec,
    WellIntegrand,
    negativity_adaptive,
    panel_negativity,
    well_integrand,
)
from cgneg.smoothing import CoarseGrainSpec, KernelMass
from cgneg.states import HODiagonal, HOOffDiagonal, SquareWell

HO_N_DEFAULT = tuple(range(0, 41))
HO_DELTA_DEFAULT = tuple(float(d) for d in range(3, 15))
OFFDIAG_M_DEFAULT = tuple(range(0, 11))
OFFDIAG_DM_DEFAULT = tuple(range(0, 5))
OFFDIAG_DELTA_DEFAULT = (3.0, 50.0)
WELL_N_DEFAULT = tuple(range(1, 9))
WELL_DELTA_DEFAULT = (1.0, 2.0, 4.0, 8.0, 16.0)

CSV_COLUMNS = ("kind", "n", "m", "delta", "eta", "eta_err", "status")


@dataclass(frozen=True)
class SweepRow:
    kind: str
    n: int
    m: Optional[int]
    delta: Optional[float]
    eta: float
    eta_err: float
    status: str

    def __post_init__(self):
        if not self.eta >= 0:
            raise ValueError("eta must be nonnegative")

    @property
    def key(self):
        return (self.kind, self.n, self.m, self.delta)


@dataclass(frozen=True)
class RowJob:
    """One sweep cell; picklable so it can run in a worker process."""

    kind: str
    n: int
    m: Optional[int] = None
    delta: Optional[float] = None
    kernel_mass: str = "paper"
    q: QuadratureSpec = field(default_factory=QuadratureSpec)

    def state(self):
        if self.kind == "well":
            return SquareWell(self.n)
        if self.m is None:
            return HODiagonal(self.n)
        return HOOffDiagonal(self.m, self.n)

    def cg(self):
        return None if self.delta is None else CoarseGrainSpec(self.delta, KernelMass(self.kernel_mass))


def evaluate_row(job: RowJob) -> SweepRow:
    res = negativity_adaptive(job.state(), job.cg(), job.q)
    return SweepRow(job.kind, job.n, job.m, job.delta, res.eta, res.error_estimate, res.status.value)


def run_jobs(jobs: Sequence[RowJob], workers: int = 1) -> list:
    """Evaluate jobs, preserving their order regardless of the worker count."""
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [evaluate_row(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(evaluate_row, jobs, chunksize=1))


def _nonempty(name, seq):
    seq = list(seq)
    if not seq:
        raise ValueError(f"{name} must be nonempty")
    return seq


def sweep_ho(n_range: Iterable[int] = HO_N_DEFAULT, delta_range: Iterable[float] = HO_DELTA_DEFAULT,
             q: Optional[QuadratureSpec] = None, kernel_mass: str = "paper", workers: int = 1) -> list:
    """Smoothed oscillator negativity over (delta, n), rows in (delta, n) order."""
    q = q or QuadratureSpec()
    ns = sorted(_nonempty("n_range", n_range))
    ds = sorted(float(d) for d in _nonempty("delta_range", delta_range))
    jobs = [RowJob("ho", n, None, d, kernel_mass, q) for d in ds for n in ns]
    return run_jobs(jobs, workers)


def sweep_offdiag(m_range: Iterable[int] = OFFDIAG_M_DEFAULT, dm_range: Iterable[int] = OFFDIAG_DM_DEFAULT,
                  delta_set: Iterable[float] = OFFDIAG_DELTA_DEFAULT, q: Optional[QuadratureSpec] = None,
                  kernel_mass: str = "paper", workers: int = 1) -> list:
    """Smoothed |m><n| negativity; pairs with m - n > m are skipped.

    Rows are ordered by (delta, m - n, m).
    """
    q = q or QuadratureSpec()
    ms = sorted(_nonempty("m_range", m_range))
    dms = sorted(_nonempty("dm_range", dm_range))
    if any(dm < 0 for dm in dms):
        raise ValueError("m - n must be nonnegative")
    ds = sorted(float(d) for d in _nonempty("delta_set", delta_set))
    jobs = [RowJob("ho", m - dm, m, d, kernel_mass, q) for d in ds for dm in dms for m in ms if dm <= m]
    return run_jobs(jobs, workers)


def sweep_well(n_range: Iterable[int] = WELL_N_DEFAULT, delta_range: Iterable[float] = WELL_DELTA_DEFAULT,
               q: Optional[QuadratureSpec] = None, kernel_mass: str = "paper", workers: int = 1) -> list:
    """Smoothed square-well negativity over (delta, n)."""
    q = q or QuadratureSpec()
    ns = sorted(_nonempty("n_range", n_range))
    ds = sorted(float(d) for d in _nonempty("delta_range", delta_range))
    jobs = [RowJob("well", n, None, d, kernel_mass, q) for d in ds for n in ns]
    return run_jobs(jobs, workers)


# ---------------------------------------------------------------------------
# n_max extraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NmaxFit:
    nmax: dict
    slope: float
    intercept: float
    slope_stderr: float

    def to_dict(self):
        return {
            "nmax": {repr(d): n for d, n in sorted(self.nmax.items())},
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_stderr": self.slope_stderr,
        }


def _columns(rows):
    cols = {}
    for r in rows:
        if r.kind == "ho" and r.m is None and r.delta is not None:
            cols.setdefault(r.delta, []).append(r)
    return {d: sorted(c, key=lambda r: r.n) for d, c in sorted(cols.items())}


def column_nmax(column: Sequence[SweepRow]) -> int:
    """argmax of eta over n, ties toward smaller n; the maximum must be interior."""
    etas = np.array([r.eta for r in column])
    i = int(np.argmax(etas))
    if i == 0 or i == len(etas) - 1:
        raise NoInteriorMaximum(f"delta={column[0].delta}: maximum at the edge n={column[i].n}")
    return column[i].n


def nmax_fit(rows: Sequence[SweepRow]) -> NmaxFit:
    """Per-delta n_max and a least-squares line through (delta, n_max)."""
    cols = _columns(rows)
    if not cols:
        raise ValueError("no smoothed oscillator rows")
    nmax = {d: column_nmax(c) for d, c in cols.items()}
    ds = np.array(list(nmax))
    ns = np.array([nmax[d] for d in ds], dtype=float)
    if ds.size < 2:
        return NmaxFit(nmax, float("nan"), float("nan"), float("nan"))
    fit = stats.linregress(ds, ns)
    return NmaxFit(nmax, float(fit.slope), float(fit.intercept), float(fit.stderr))


def nmax_fragility(rows: Sequence[SweepRow], trials: int = 32, seed: int = 0) -> list:
    """Deltas whose n_max moves by more than one step when eta is jittered by its error estimate."""
    rng = np.random.default_rng(seed)
    fragile = []
    for d, col in _columns(rows).items():
        base = column_nmax(col)
        for _ in range(trials):
            jit = [r.eta + r.eta_err * rng.uniform(-1.0, 1.0) for r in col]
            i = int(np.argmax(jit))
            if abs(col[i].n - base) > 1:
                fragile.append(d)
                break
    return fragile


# ---------------------------------------------------------------------------
# tail scans
# ---------------------------------------------------------------------------


def leading_order_integrand(n: int) -> WellIntegrand:
    """(1/pi^2)(1 - cos 2nx) sin(2px) / p, the large-p model with n dropped from p +- n."""

    def fn(xs, ps):
        x = np.asarray(xs, dtype=float)[:, None]
        p = np.asarray(ps, dtype=float)[None, :]
        safe = np.where(p == 0.0, 1.0, p)
        val = np.where(p == 0.0, 2.0 * x, np.sin(2.0 * p * x) / safe)
        return (1.0 - np.cos(2.0 * n * x)) * val / np.pi**2

    return WellIntegrand(fn, 0.0, lambda p_hi: 2.0 * (p_hi + n), np.pi)


@dataclass(frozen=True)
class DivergenceScan:
    n: int
    p0: float
    p_max: float
    model: str
    edges: list
    contributions: list
    errors: list
    cumulative: list
    fitted_log_slope: float
    fit_intercept: float
    fit_residual: float

    def to_dict(self):
        return asdict(self)


def _check_scan_start(n: int, p0: float):
    if n < 1:
        raise ValueError("n must be >= 1")
    if p0 < 50 * n:
        raise ValueError(f"p0={p0} must be at least 50*n={50 * n}")


def divergence_scan(n: int, p0: float, p_max: float, panels: Optional[int] = None,
                    model: str = "exact", tol: float = 1e-7, levels: int = 3) -> DivergenceScan:
    """Unsmoothed square-well negativity on x in [0, pi], p in [p0, p_max].

    The momentum range is cut into geometric panels and the cumulative
    negativity is fitted against ln p (including the point (ln p0, 0)).
    ``model="leading-order"`` integrates the large-p model instead of the
    exact Wigner function.
    """
    _check_scan_start(n, p0)
    if p_max < 8 * p0:
        raise ValueError(f"p_max={p_max} must be at least 8*p0={8 * p0}")
    if panels is None:
        panels = int(round(math.log2(p_max / p0)))
    if panels < 2:
        raise ValueError("need at least two panels")
    if model == "exact":
        f = well_integrand(n)
    elif model == "leading-order":
        f = leading_order_integrand(n)
    else:
        raise ValueError(f"unknown model {model!r}")
    edges = np.geomspace(p0, p_max, panels + 1)
    contribs, errs = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        # panel_negativity counts both signs of p
        v, e, _, _ = panel_negativity(f, float(lo), float(hi), 2.0 * tol, levels)
        contribs.append(0.5 * v)
        errs.append(0.5 * e)
    cum = np.concatenate([[0.0], np.cumsum(contribs)])
    lp = np.log(edges)
    fit = stats.linregress(lp, cum)
    resid = float(np.sqrt(np.mean((cum - (fit.slope * lp + fit.intercept)) ** 2)))
    return DivergenceScan(
        n, float(p0), float(p_max), model,
        [float(e) for e in edges], contribs, errs, [float(c) for c in cum[1:]],
        float(fit.slope), float(fit.intercept), resid,
    )


@dataclass(frozen=True)
class TailOctave:
    p_lo: float
    p_hi: float
    contribution: float
    error_estimate: float


def tail_convergence_scan(n: int, delta: float, p_start: Optional[float] = None, octaves: int = 4,
                          kernel_mass: str = "paper", tol: float = 1e-14, levels: int = 3) -> list:
    """Negativity of the smoothed well in each octave 2^k p_start <= |p| <= 2^(k+1) p_start."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if p_start is None:
        p_start = 50.0 * n
    _check_scan_start(n, p_start)
    if octaves < 1:
        raise ValueError("octaves must be positive")
    f = well_integrand(n, CoarseGrainSpec(delta, KernelMass(kernel_mass)))
    out = []
    lo = float(p_start)
    for _ in range(octaves):
        v, e, _, _ = panel_negativity(f, lo, 2.0 * lo, tol, levels)
        out.append(TailOctave(lo, 2.0 * lo, v, e))
        lo *= 2.0
    return out


def octaves_decay(octs: Sequence[TailOctave], ratio: float = 0.75) -> bool:
    """c_{k+1} <= ratio * c_k up to the error estimates, for every k >= 1."""
    return all(
        b.contribution <= ratio * a.contribution + a.error_estimate + b.error_estimate
        for a, b in zip(octs[1:], octs[2:])
    )


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def rows_from_csv(text: str) -> list:
    rd = csv.DictReader(io.StringIO(text))
    if tuple(rd.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected columns {rd.fieldnames}")
    out = []
    for d in rd:
        out.append(SweepRow(
            d["kind"],
            int(d["n"]),
            int(d["m"]) if d["m"] else None,
            float(d["delta"]) if d["delta"] else None,
            float(d["eta"]),
            float(d["eta_err"]),
            d["status"],
        ))
    return out


def spearman_by_delta(rows: Sequence[SweepRow]) -> dict:
    """Spearman rank correlation of eta with n for each delta column."""
    cols = {}
    for r in rows:
        cols.setdefault(r.delta, []).append(r)
    out = {}
    for d, col in sorted(cols.items(), key=lambda t: (t[0] is None, t[0])):
        col = sorted(col, key=lambda r: r.n)
        etas = [r.eta for r in col]
        if len(set(etas)) < 2:
            out[d] = float("nan")
        else:
            out[d] = float(stats.spearmanr([r.n for r in col], etas).statistic)
    return out


def scan_to_json(obj) -> str:
    if isinstance(obj, list):
        return json.dumps([asdict(o) for o in obj])
    return json.dumps(obj.to_dict())
