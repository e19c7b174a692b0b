"""Command-line front end.

Subcommands map onto the analysis and Monte Carlo operations:

    threshold   decision thresholds for a range of particle counts
    pe          closed-form or Monte Carlo error probability
    exponent    error exponents of the two detection rules
    mismatch    bound on full-likelihood vs first-arrival disagreement
    sweep       Monte Carlo sweeps (incl. bundled figure recipes 4..8)
    required-m  particles needed to reach a target error probability

Sweeps write delimited output plus a rendered PNG next to it.  Exit codes:
0 ok, 2 usage, 3 numeric failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import os
import sys
from pathlib import Path

from .analysis import (
    err_exp_fa,
    err_exp_ml,
    mismatch_bound,
    pe_fa,
    pe_gray,
    pe_ml_single,
)
from .channels import BadWeights, ChannelSpec, stable_linear_dispersion
from .detectors import LengthMismatch, fa_threshold, ml_threshold_single
from .montecarlo import (
    IG_DETECTORS,
    LEVY_DETECTORS,
    SweepSpec,
    TargetUnreachable,
    required_m,
    simulate_pe,
    sweep,
)
from .numerics import MaxIterations, NonFinite, NoSignChange, Tolerance

__all__ = ["main", "build_parser"]

CONFIG_ENV = "MOLTIMING_CONFIG"
DEFAULT_CONFIG = "moltiming-presets.ini"

BUILTIN_PRESETS = {
    # pure diffusion, scale c = d^2/(2D) = 2 s
    "no-flow-c2": {"d": 2.0 * math.sqrt(10.0), "D": 10.0, "v": 0.0, "dim_scale": 1.0},
    # drift channel with shape lam = 1 s and kappa = 1/v
    "drift-lambda1": {"d": 1.0, "D": 0.5, "v": 1.0, "dim_scale": 1.0},
}

SWEEP_COLUMNS = ["param", "value", "detector", "p_hat", "ci_lo", "ci_hi", "trials", "seed"]


def load_presets() -> dict:
    presets = {name: dict(vals) for name, vals in BUILTIN_PRESETS.items()}
    path = os.environ.get(CONFIG_ENV, DEFAULT_CONFIG)
    if Path(path).is_file():
        parser = configparser.ConfigParser()
        parser.optionxform = str  # d and D are distinct keys
        parser.read(path)
        for section in parser.sections():
            entry = {
                "d": parser.getfloat(section, "d"),
                "D": parser.getfloat(section, "D"),
                "v": parser.getfloat(section, "v", fallback=0.0),
                "dim_scale": parser.getfloat(section, "dim_scale", fallback=1.0),
            }
            presets[section] = entry
    return presets


def preset_channel(name: str) -> ChannelSpec:
    presets = load_presets()
    if name not in presets:
        raise ValueError(f"unknown channel preset {name!r}; known: {sorted(presets)}")
    p = presets[name]
    return ChannelSpec(p["d"], p["D"], p.get("v", 0.0), p.get("dim_scale", 1.0))


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def write_rows(rows: list[dict], columns: list[str], out: str | None, fmt: str) -> list[str]:
    """Serialize rows to --out; returns the paths written.  CSV floats use
    the shortest round-trip decimal, and the JSON encoding carries the same
    digits."""
    if out is None:
        return []
    path = Path(out)
    if fmt == "json":
        payload = {"columns": columns, "rows": rows}
        path.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_fmt(r[c]) if r.get(c) is not None else "" for c in columns])
    return [str(path)]


def print_rows(rows: list[dict], columns: list[str]) -> None:
    widths = [max(len(c), *(len(_fmt(r.get(c, ""))) for r in rows)) if rows else len(c) for c in columns]
    print("  ".join(c.ljust(w) for c, w in zip(columns, widths)))
    for r in rows:
        print("  ".join(_fmt(r.get(c, "")).ljust(w) for c, w in zip(columns, widths)))


def _parse_int_list(text: str) -> list[int]:
    return [int(float(tok)) for tok in text.split(",") if tok.strip()]


def _parse_float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _resolve_c(args, parser) -> float:
    if getattr(args, "channel_preset", None):
        if args.c is not None:
            parser.error("give either --c or --channel-preset, not both")
        return preset_channel(args.channel_preset).levy_scale
    if args.c is None:
        parser.error("--c (or --channel-preset) is required")
    if args.c <= 0:
        parser.error("c must be > 0")
    return args.c


def _check_common(args, parser) -> None:
    if getattr(args, "delta", None) is not None and args.delta <= 0:
        parser.error("delta must be > 0")
    if getattr(args, "trials", None) is not None and args.trials < 1:
        parser.error("trials must be >= 1")
    if getattr(args, "seed", None) is not None and args.seed < 0:
        parser.error("seed must be >= 0")


# ---------------------------------------------------------------- commands


def cmd_threshold(args, parser) -> int:
    c = _resolve_c(args, parser)
    _check_common(args, parser)
    ms = _parse_int_list(args.m)
    if not ms or any(m < 1 for m in ms):
        parser.error("M must be >= 1")
    rows = [{"name": f"theta(m={m})", "value": fa_threshold(c, args.delta, m)} for m in ms]
    print_rows(rows, ["name", "value"])
    write_rows(rows, ["name", "value"], args.out, args.format)
    return 0


def cmd_pe(args, parser) -> int:
    c = _resolve_c(args, parser)
    _check_common(args, parser)
    m = int(args.m)
    if m < 1:
        parser.error("M must be >= 1")
    det = args.detector.replace("-", "_")

    if args.mc:
        params = {"c": c, "delta": args.delta, "m": m}
        if det == "ml_single":
            det, params["m"] = "ml", 1
        if det in IG_DETECTORS:
            if args.kappa is None or args.lam is None:
                parser.error("IG detectors need --kappa and --lam")
            params = {"kappa": args.kappa, "lam": args.lam, "delta": args.delta, "m": m}
        if det == "gray_fa":
            if args.bits is None:
                parser.error("gray-fa needs --bits")
            params["bits"] = args.bits
        stats = simulate_pe(det, params, args.trials, args.seed, workers=args.workers)
        rows = [
            {"name": "p_hat", "value": stats.p_hat},
            {"name": "ci_lo", "value": stats.ci_95[0]},
            {"name": "ci_hi", "value": stats.ci_95[1]},
            {"name": "errors", "value": stats.errors},
            {"name": "trials", "value": stats.trials},
        ]
    else:
        if det == "fa":
            value = pe_fa(c, args.delta, m)
        elif det == "ml_single":
            if m != 1:
                parser.error("ml-single is the single-particle rule; use --m 1 or --mc")
            value = pe_ml_single(c, args.delta)
        elif det == "gray_fa":
            if args.bits is None:
                parser.error("gray-fa needs --bits")
            value = pe_gray(c, args.delta, args.bits, m)
        elif det == "linear":
            c_lin = stable_linear_dispersion(c, 0.5, [1.0 / m] * m)
            value = pe_ml_single(c_lin, args.delta)
        else:
            parser.error(f"no closed form for detector {args.detector!r}; use --mc")
        rows = [{"name": f"pe_{det}", "value": value}]
    print_rows(rows, ["name", "value"])
    write_rows(rows, ["name", "value"], args.out, args.format)
    return 0


def cmd_exponent(args, parser) -> int:
    c = _resolve_c(args, parser)
    _check_common(args, parser)
    tol = Tolerance(abs_x=args.tol_x, rel_f=args.tol_f)
    fa = err_exp_fa(c, args.delta)
    ml = err_exp_ml(c, args.delta, tol)
    rows = [
        {"name": "e_fa", "value": fa.value},
        {"name": "e_ml", "value": ml.value},
        {"name": "e_ml_optimizer_s", "value": ml.optimizer_s},
    ]
    print_rows(rows, ["name", "value"])
    write_rows(rows, ["name", "value"], args.out, args.format)
    return 0


def cmd_mismatch(args, parser) -> int:
    c = _resolve_c(args, parser)
    _check_common(args, parser)
    if args.m < 1:
        parser.error("M must be >= 1")
    mb = mismatch_bound(c, args.delta, args.m)
    rows = [
        {"name": "bound", "value": mb.bound},
        {"name": "x_star", "value": mb.x_star},
        {"name": "x1", "value": mb.x1},
    ]
    print_rows(rows, ["name", "value"])
    write_rows(rows, ["name", "value"], args.out, args.format)
    return 0


def cmd_required_m(args, parser) -> int:
    _check_common(args, parser)
    if not 0.0 < args.target < 0.5:
        parser.error("target must be in (0, 0.5)")
    cs = _parse_float_list(args.c)
    if any(c <= 0 for c in cs):
        parser.error("c must be > 0")
    rows = []
    for c in cs:
        m = required_m(
            c, args.delta, args.target,
            use_closed_form=not args.mc, trials=args.trials, seed=args.seed,
        )
        rows.append({"name": f"m_required(c={c})", "value": m})
    print_rows(rows, ["name", "value"])
    write_rows(rows, ["name", "value"], args.out, args.format)
    return 0


# ------------------------------------------------------------------ sweeps


def _fig_bundle(fig: int, trials: int, seed: int):
    """Named sweep bundles reproducing the reference experiments."""
    if fig == 4:
        grid = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
        specs = [
            (f"{det} m={m}", SweepSpec(det, "delta", grid, {"c": 1.0, "m": m}, trials, seed))
            for det in ("ml", "fa", "linear")
            for m in (1, 2, 3)
        ]
        return specs, "spacing delta [s]", "error vs spacing, c = 1 s", False
    if fig == 5:
        grid = (1, 2, 5, 10, 20, 50, 100, 200)
        specs = [
            (f"{det} delta={d}", SweepSpec(det, "m", grid, {"c": 2.0, "delta": d}, trials, seed))
            for det in ("ml", "fa")
            for d in (0.2, 0.5)
        ]
        return specs, "particles per symbol m", "error vs particle count, c = 2 s", True
    if fig == 7:
        grid = (1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)
        specs = [
            (
                f"gray_fa L={bits} m={m}",
                SweepSpec(
                    "gray_fa", "delta", grid, {"c": 1.0, "m": m, "bits": bits}, trials, seed
                ),
            )
            for (m, bits) in ((25, 3), (90, 4), (350, 5))
        ]
        return specs, "total spacing delta [s]", "symbol error vs spacing, c = 1 s", False
    if fig == 8:
        # body-text channel: d = 1 um, D = 0.5 um^2/s, so lam = 1 s
        grid = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0)
        fixed = {"delta": 1.0, "d": 1.0, "D": 0.5}
        specs = [
            (
                f"{det} m={m}",
                SweepSpec(det, "velocity", grid, {**fixed, "m": m}, trials, seed),
            )
            for det in ("ig_ml", "ig_fa", "ig_linear")
            for m in (1, 2, 4)
        ]
        return specs, "drift velocity v [um/s]", "drift channel: error vs velocity", False
    raise ValueError(f"no bundled recipe for figure {fig}")


def _run_fig6(args) -> tuple[list[dict], list[str]]:
    rows = []
    for delta in (0.25, 0.5, 1.0):
        for c in (0.25, 0.5, 1.0, 2.0, 4.0):
            m = required_m(c, delta, 0.01)
            rows.append(
                {"label": f"delta={delta}", "value": c, "m_required": m, "target": 0.01}
            )
    return rows, ["label", "value", "m_required", "target"]


def cmd_sweep(args, parser) -> int:
    _check_common(args, parser)
    out = args.out
    if args.fig is not None:
        if args.fig == 6:
            rows, columns = _run_fig6(args)
            out = out or "fig6.csv"
            print_rows(rows, columns)
            paths = write_rows(rows, columns, out, args.format)
            if not args.no_plot:
                from .plotting import render_required_m_figure

                png = str(Path(out).with_suffix(".png"))
                paths.append(render_required_m_figure(rows, png, title="particles for 1% error"))
            for p in paths:
                print(f"wrote {p}", file=sys.stderr)
            return 0
        specs, xlabel, title, logx = _fig_bundle(args.fig, args.trials, args.seed)
        out = out or f"fig{args.fig}.csv"
        columns = SWEEP_COLUMNS + ["label"]
    else:
        if not args.detector or not args.vary or not args.grid:
            parser.error("manual sweeps need --detector, --vary, and --grid (or use --fig)")
        det = args.detector.replace("-", "_")
        fixed = {}
        for key in ("c", "delta", "kappa", "lam", "d", "D"):
            v = getattr(args, key if key != "D" else "diffusion", None)
            if v is not None:
                fixed[key] = v
        if args.channel_preset:
            ch = preset_channel(args.channel_preset)
            if det in IG_DETECTORS:
                fixed.setdefault("d", ch.distance_d)
                fixed.setdefault("D", ch.diffusion_D)
                if ch.drift_v > 0:
                    ig = ch.ig()
                    fixed.setdefault("kappa", ig.kappa)
                    fixed.setdefault("lam", ig.lam)
            else:
                fixed.setdefault("c", ch.levy_scale)
        if args.m is not None:
            fixed["m"] = int(args.m)
        if args.bits is not None:
            fixed["bits"] = args.bits
        fixed.pop(args.vary, None)
        specs = [(None, SweepSpec(det, args.vary, tuple(_parse_float_list(args.grid)),
                                  fixed, args.trials, args.seed))]
        xlabel, title, logx = args.vary, None, args.vary == "m"
        out = out or "sweep.csv"
        columns = list(SWEEP_COLUMNS)

    rows = []
    for label, spec in specs:
        for point in sweep(spec, workers=args.workers):
            if point.error is not None:
                print(f"point {spec.vary}={point.value}: {point.error}", file=sys.stderr)
                continue
            st = point.stats
            row = {
                "param": spec.vary,
                "value": point.value,
                "detector": spec.detector,
                "p_hat": st.p_hat,
                "ci_lo": st.ci_95[0],
                "ci_hi": st.ci_95[1],
                "trials": st.trials,
                "seed": spec.seed,
            }
            if label is not None:
                row["label"] = label
            rows.append(row)

    print_rows(rows, columns)
    paths = write_rows(rows, columns, out, args.format)
    if not args.no_plot and rows:
        from .plotting import render_sweep_figure

        png = str(Path(out).with_suffix(".png"))
        paths.append(render_sweep_figure(rows, png, xlabel, title=title, logx=logx))
    for p in paths:
        print(f"wrote {p}", file=sys.stderr)
    return 0


# ------------------------------------------------------------------ parser


def _add_common(sp, *, mc: bool = False) -> None:
    sp.add_argument("--out", help="write results to this path")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--channel-preset", help="named channel from the presets file")
    sp.add_argument("--tol-x", type=float, default=1e-6, help="abscissa tolerance")
    sp.add_argument("--tol-f", type=float, default=1e-9, help="relative function tolerance")
    if mc:
        sp.add_argument("--trials", type=lambda s: int(float(s)), default=10**6)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moltiming",
        description="Detectors and error analysis for molecular timing channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("threshold", help="decision thresholds theta_M")
    sp.add_argument("--c", type=float)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--m", default="1", help="comma-separated particle counts")
    _add_common(sp)
    sp.set_defaults(func=cmd_threshold)

    sp = sub.add_parser("pe", help="error probability (closed form or --mc)")
    sp.add_argument("--detector", required=True,
                    choices=("fa", "ml-single", "ml", "linear", "gray-fa",
                             "ig-ml", "ig-fa", "ig-linear"))
    sp.add_argument("--c", type=float)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--bits", type=int)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--lam", type=float)
    sp.add_argument("--mc", action="store_true", help="Monte Carlo instead of closed form")
    _add_common(sp, mc=True)
    sp.set_defaults(func=cmd_pe)

    sp = sub.add_parser("exponent", help="error exponents of both rules")
    sp.add_argument("--c", type=float)
    sp.add_argument("--delta", type=float, required=True)
    _add_common(sp)
    sp.set_defaults(func=cmd_exponent)

    sp = sub.add_parser("mismatch", help="rule-disagreement probability bound")
    sp.add_argument("--c", type=float)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--m", type=int, required=True)
    _add_common(sp)
    sp.set_defaults(func=cmd_mismatch)

    sp = sub.add_parser("sweep", help="Monte Carlo sweeps and figure recipes")
    sp.add_argument("--fig", type=int, choices=(4, 5, 6, 7, 8))
    sp.add_argument("--detector",
                    choices=("ml", "fa", "linear", "gray-fa", "ig-ml", "ig-fa", "ig-linear"))
    sp.add_argument("--vary", choices=("delta", "m", "c", "velocity", "L"))
    sp.add_argument("--grid", help="comma-separated grid values")
    sp.add_argument("--c", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--m", type=int)
    sp.add_argument("--bits", type=int)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--lam", type=float)
    sp.add_argument("--d", type=float, help="distance (for velocity sweeps)")
    sp.add_argument("--diffusion", type=float, help="diffusion coefficient (for velocity sweeps)")
    sp.add_argument("--no-plot", action="store_true", help="skip the rendered figure")
    _add_common(sp, mc=True)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("required-m", help="particles needed for a target error")
    sp.add_argument("--c", required=True, help="comma-separated scale values")
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--target", type=float, required=True)
    sp.add_argument("--mc", action="store_true", help="search on Monte Carlo estimates")
    _add_common(sp, mc=True)
    sp.set_defaults(func=cmd_required_m)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args, parser)
    except SystemExit as exc:  # parser.error inside a command
        return int(exc.code) if exc.code else 0
    except (NoSignChange, MaxIterations, NonFinite, TargetUnreachable) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return 3
    except (BadWeights, LengthMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
