"""Command-line front end.

Exit codes: 0 success (a NonConvergent result is a valid finding), 2 usage
error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import List, Optional


from cgneg import experiments as ex
from cgneg.config import ConfigError, RunConfig, load_config
from cgneg.negativity import QuadratureSpec, negativity_adaptive, negativity_grid
from cgneg.smoothing import (
    CoarseGrainSpec,
    KernelMass,
    analytic_cg_ho,
    auto_geometry,
    eval_closed_form,
    grid_convolve,
    grid_sample,
    smooth_grid,
)
from cgneg.states import HODiagonal, HOOffDiagonal, SquareWell, wigner

EXIT_USAGE = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def parse_state(text: str):
    """``ho:n=4``, ``ho:m=3,n=1`` or ``well:n=2``."""
    kind, sep, rest = text.partition(":")
    if not sep or kind not in ("ho", "well"):
        raise UsageError(f"bad state kind {kind!r} in {text!r} (expected ho:... or well:...)")
    params = {}
    for tok in rest.split(","):
        key, eq, val = tok.partition("=")
        key = key.strip()
        if not eq or key not in ("n", "m") or key in params:
            raise UsageError(f"bad token {tok!r} in state {text!r}")
        try:
            params[key] = int(val)
        except ValueError:
            raise UsageError(f"bad token {tok!r} in state {text!r}: not an integer") from None
    if "n" not in params:
        raise UsageError(f"state {text!r} lacks n=")
    try:
        if kind == "well":
            if "m" in params:
                raise UsageError(f"bad token 'm={params['m']}' in state {text!r}: wells take n only")
            return SquareWell(params["n"])
        if "m" in params:
            return HOOffDiagonal(params["m"], params["n"])
        return HODiagonal(params["n"])
    except ValueError as err:
        raise UsageError(f"state {text!r}: {err}") from None


def parse_point(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"bad point {text!r} (expected X,P)")
    try:
        x, p = float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"bad point {text!r}") from None
    if not (math.isfinite(x) and math.isfinite(p)):
        raise UsageError(f"point {text!r} must be finite")
    return x, p


def parse_values(text: str, cast=int) -> list:
    """Comma list of values and inclusive ``a..b`` ranges with unit step."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            if ".." in tok:
                a, b = (cast(t) for t in tok.split(".."))
                if b < a:
                    raise UsageError(f"empty range {tok!r}")
                k = 0
                while a + k <= b:
                    out.append(cast(a + k))
                    k += 1
            else:
                out.append(cast(tok))
        except ValueError:
            raise UsageError(f"bad value {tok!r} in {text!r}") from None
    if not out:
        raise UsageError(f"empty list {text!r}")
    return sorted(set(out))


def _cg(cfg: RunConfig) -> Optional[CoarseGrainSpec]:
    if cfg.delta is None:
        return None
    if not cfg.delta > 0:
        raise UsageError(f"delta must be positive, got {cfg.delta}")
    return CoarseGrainSpec(cfg.delta, KernelMass(cfg.kernel))


def _qspec(cfg: RunConfig, spec=None) -> QuadratureSpec:
    try:
        well = isinstance(spec, SquareWell)
        return QuadratureSpec(
            radial_cutoff=None if well else cfg.cutoff,
            momentum_cutoff=cfg.cutoff if well else None,
            abs_tolerance=cfg.tol,
            max_refinement_levels=cfg.max_refinement_levels,
            max_tail_panels=cfg.max_tail_panels,
        )
    except ValueError as err:
        raise UsageError(str(err)) from None


def _write_text(path: str, text: str) -> None:
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_eval(args, cfg: RunConfig) -> int:
    spec = parse_state(args.state)
    x, p = parse_point(args.at)
    cg = _cg(cfg)
    if cg is None:
        val = wigner(spec, x, p)
    elif isinstance(spec, HODiagonal):
        val = eval_closed_form(analytic_cg_ho(spec.n, cg), x, p)
    else:
        from cgneg.semianalytic import offdiag_cg_tensor, well_cg_tensor

        if isinstance(spec, SquareWell):
            val = float(well_cg_tensor(spec.n, cg, [x], [p])[0, 0])
        else:
            val = float(offdiag_cg_tensor(spec.m, spec.n, cg, [x], [p])[0, 0])
    print(format(float(val), f".{args.digits}g"))
    return 0


def _grid_for(spec, cfg: RunConfig, smoothed: bool):
    cg = _cg(cfg) if smoothed else None
    geom = auto_geometry(spec, cg, cfg.pmax, cfg.refine)
    return geom, cg


def _emit_grid(g, path: Optional[str], fmt: str) -> None:
    if fmt == "json":
        text = g.to_json() + "\n"
    else:
        import io

        buf = io.StringIO()
        g.write_csv(buf)
        text = buf.getvalue()
    if path:
        _write_text(path, text)
    else:
        sys.stdout.write(text)


def cmd_grid(args, cfg: RunConfig) -> int:
    spec = parse_state(args.state)
    geom, _ = _grid_for(spec, cfg, smoothed=False)
    _emit_grid(grid_sample(spec, geom), args.out, args.format)
    return 0


def cmd_smooth(args, cfg: RunConfig) -> int:
    spec = parse_state(args.state)
    if cfg.delta is None:
        raise UsageError("smooth needs --delta")
    geom, cg = _grid_for(spec, cfg, smoothed=True)
    if args.method == "analytic":
        g = smooth_grid(spec, cg, geom)
    else:
        g = grid_convolve(grid_sample(spec, geom), cg, args.method)
    _emit_grid(g, args.out, args.format)
    return 0


def cmd_negativity(args, cfg: RunConfig) -> int:
    spec = parse_state(args.state)
    cg = _cg(cfg)
    if args.route == "grid":
        geom, _ = _grid_for(spec, cfg, smoothed=cg is not None)
        res = negativity_grid(smooth_grid(spec, cg, geom))
    else:
        res = negativity_adaptive(spec, cg, _qspec(cfg, spec))
    print(res.to_json(details=args.details))
    return 0


def _sweep_rows(kind: str, args, cfg: RunConfig):
    q = _qspec(cfg, SquareWell(1) if kind == "well" else None)
    deltas = parse_values(args.delta, float) if args.delta else None
    if kind == "ho":
        ns = parse_values(args.n) if args.n else ex.HO_N_DEFAULT
        return ex.sweep_ho(ns, deltas or ex.HO_DELTA_DEFAULT, q, cfg.kernel, cfg.workers)
    if kind == "offdiag":
        ms = parse_values(args.m) if args.m else ex.OFFDIAG_M_DEFAULT
        dms = parse_values(args.dm) if args.dm else ex.OFFDIAG_DM_DEFAULT
        return ex.sweep_offdiag(ms, dms, deltas or ex.OFFDIAG_DELTA_DEFAULT, q, cfg.kernel, cfg.workers)
    ns = parse_values(args.n) if args.n else ex.WELL_N_DEFAULT
    return ex.sweep_well(ns, deltas or ex.WELL_DELTA_DEFAULT, q, cfg.kernel, cfg.workers)


def cmd_sweep(args, cfg: RunConfig) -> int:
    rows = _sweep_rows(args.kind, args, cfg)
    text = ex.rows_to_csv(rows)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


_PLOT_STUB = '''"""Plot {csv} (generated stub; edit freely)."""
import csv

import matplotlib.pyplot as plt

with open("{csv}", newline="") as fh:
    rows = list(csv.DictReader(fh))

{body}
plt.savefig("{png}")
'''

_PLOT_BODIES = {
    "curves": '''series = {{}}
for r in rows:
    series.setdefault(r["{group}"], []).append((float(r["{x}"]), float(r["{y}"])))
for key, pts in sorted(series.items(), key=lambda t: float(t[0]) if t[0] else 0.0):
    pts.sort()
    plt.plot([p[0] for p in pts], [p[1] for p in pts], label=f"{group}={{key}}")
plt.xlabel("{x}")
plt.ylabel("{y}")
plt.legend(fontsize="small")''',
    "line": '''xs = [float(r["{x}"]) for r in rows]
ys = [float(r["{y}"]) for r in rows]
plt.plot(xs, ys, "o-")
plt.xlabel("{x}")
plt.ylabel("{y}")''',
}


def _stub(csv_name: str, kind: str, **kw) -> str:
    body = _PLOT_BODIES[kind].format(**kw)
    return _PLOT_STUB.format(csv=csv_name, png=csv_name.replace(".csv", ".png"), body=body)


def cmd_fig(args, cfg: RunConfig) -> int:
    which = parse_values(args.which)
    bad = [w for w in which if w not in (1, 2, 3, 4)]
    if bad:
        raise UsageError(f"bad figure number {bad[0]} (expected 1..4)")
    out = args.out or cfg.output_dir
    q = _qspec(cfg)
    ho_rows = None
    for w in which:
        if w in (1, 2) and ho_rows is None:
            ho_rows = ex.sweep_ho(q=q, kernel_mass=cfg.kernel, workers=cfg.workers)
        if w == 1:
            _write_text(os.path.join(out, "fig1.csv"), ex.rows_to_csv(ho_rows))
            _write_text(os.path.join(out, "fig1_plot.py"), _stub("fig1.csv", "curves", group="delta", x="n", y="eta"))
        elif w == 2:
            fit = ex.nmax_fit(ho_rows)
            lines = ["delta,nmax"] + [f"{d!r},{n}" for d, n in sorted(fit.nmax.items())]
            _write_text(os.path.join(out, "fig2.csv"), "\n".join(lines) + "\n")
            _write_text(os.path.join(out, "fig2_fit.json"), json.dumps(fit.to_dict()) + "\n")
            _write_text(os.path.join(out, "fig2_plot.py"), _stub("fig2.csv", "line", x="delta", y="nmax"))
        elif w == 3:
            rows = ex.sweep_offdiag(q=q, kernel_mass=cfg.kernel, workers=cfg.workers)
            _write_text(os.path.join(out, "fig3.csv"), ex.rows_to_csv(rows))
            _write_text(os.path.join(out, "fig3_plot.py"), _stub("fig3.csv", "curves", group="delta", x="m", y="eta"))
        else:
            rows = ex.sweep_well(q=_qspec(cfg, SquareWell(1)), kernel_mass=cfg.kernel, workers=cfg.workers)
            _write_text(os.path.join(out, "fig4.csv"), ex.rows_to_csv(rows))
            _write_text(os.path.join(out, "fig4_plot.py"), _stub("fig4.csv", "curves", group="delta", x="n", y="eta"))
    return 0


def cmd_scan(args, cfg: RunConfig) -> int:
    try:
        if args.what == "divergence":
            p0 = args.p0 if args.p0 is not None else 50.0 * args.n
            pmax = args.pmax if args.pmax is not None else 16.0 * p0
            res = ex.divergence_scan(args.n, p0, pmax, args.panels, args.model)
            text = ex.scan_to_json(res)
        else:
            delta = cfg.delta if cfg.delta is not None else 1.0
            res = ex.tail_convergence_scan(args.n, delta, args.p0, args.octaves, cfg.kernel)
            text = ex.scan_to_json(res)
    except ValueError as err:
        raise UsageError(str(err)) from None
    if args.out:
        _write_text(args.out, text + "\n")
    else:
        print(text)
    return 0


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, delta_list: bool = False) -> None:
    p.add_argument("--config", help="config file (key = value lines); default $CGNEG_CONFIG")
    if delta_list:
        p.add_argument("--delta", help="delta values, e.g. 3..14 or 1,2,4")
    else:
        p.add_argument("--delta", type=float, help="coarse-graining sharpness; omit for the raw Wigner function")
    p.add_argument("--kernel", choices=("paper", "unit"), help="kernel normalization (default paper)")
    p.add_argument("--tol", type=float, help="absolute negativity tolerance")
    p.add_argument("--cutoff", type=float, help="radial cutoff (oscillator) or first tail panel (well)")
    p.add_argument("--max-refinement-levels", type=int, dest="max_refinement_levels")
    p.add_argument("--workers", type=int, help="worker processes for sweeps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgneg", description="Coarse-grained Wigner negativity")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate W(x, p)")
    _add_common(p)
    p.add_argument("--state", required=True)
    p.add_argument("--at", required=True, help="X,P")
    p.add_argument("--digits", type=int, default=12, help="significant digits printed")
    p.set_defaults(func=cmd_eval)

    for name, func, helptext in (("grid", cmd_grid, "sample W on a grid"), ("smooth", cmd_smooth, "coarse-grained grid")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        p.add_argument("--state", required=True)
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--refine", type=float, help="refinement factor over the resolution rule")
        p.add_argument("--pmax", type=float, help="momentum extent for square-well grids")
        if name == "smooth":
            p.add_argument("--method", choices=("analytic", "direct", "fft"), default="analytic")
        p.set_defaults(func=func)

    p = sub.add_parser("negativity", help="negativity as JSON")
    _add_common(p)
    p.add_argument("--state", required=True)
    p.add_argument("--route", choices=("adaptive", "grid"), default="adaptive")
    p.add_argument("--details", action="store_true", help="include per-panel details")
    p.add_argument("--refine", type=float)
    p.add_argument("--pmax", type=float)
    p.set_defaults(func=cmd_negativity)

    p = sub.add_parser("sweep", help="negativity sweep to CSV")
    _add_common(p, delta_list=True)
    p.add_argument("--kind", choices=("ho", "offdiag", "well"), required=True)
    p.add_argument("--n", help="n values, e.g. 0..30 or 1,2,5")
    p.add_argument("--m", help="m values (offdiag)")
    p.add_argument("--dm", help="m - n values (offdiag)")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fig", help="figure data and plot-script stubs")
    _add_common(p)
    p.add_argument("--which", required=True, help="figure numbers, e.g. 2 or 1..4")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_fig)

    p = sub.add_parser("scan", help="momentum tail scans as JSON")
    _add_common(p)
    p.add_argument("what", choices=("divergence", "tail"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p0", type=float, help="first momentum (default 50 n)")
    p.add_argument("--pmax", type=float, help="last momentum for divergence scans (default 16 p0)")
    p.add_argument("--panels", type=int, help="geometric panels for divergence scans")
    p.add_argument("--octaves", type=int, default=4)
    p.add_argument("--model", choices=("exact", "leading-order"), default="exact")
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=cmd_scan)
    return parser


def resolve_config(args) -> RunConfig:
    base = load_config(getattr(args, "config", None))
    return base.merged(
        tol=getattr(args, "tol", None),
        cutoff=getattr(args, "cutoff", None),
        max_refinement_levels=getattr(args, "max_refinement_levels", None),
        delta=args.delta if isinstance(getattr(args, "delta", None), float) else None,
        kernel=getattr(args, "kernel", None),
        refine=getattr(args, "refine", None),
        pmax=getattr(args, "pmax", None) if args.command != "scan" else None,
        workers=getattr(args, "workers", None),
    )


def _glue_values(argv: List[str]) -> List[str]:
    # let "--at -1,0" through: argparse would read "-1,0" as an option
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--at":
            out.append("--at=" + next(it, ""))
        else:
            out.append(tok)
    return out


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_values(sys.argv[1:] if argv is None else list(argv)))
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except (UsageError, ConfigError) as err:
        print(f"cgneg: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"cgneg: I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
