"""Command-line front end: ``simulate``, ``analyze``, ``sweep`` and ``verify``.

Every subcommand writes CSV (or a text report for ``verify``) to ``--out`` or
stdout.  A YAML file given with ``--config`` supplies defaults using the flag
names (``p_range: "0.8:0.9"``); explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import yaml

from .analysis import (
    ChannelConfig,
    conv_complexity_approx,
    expected_delay,
    mean_formula_ops,
)
from .circring import admissible_values, is_admissible
from .errors import InvalidParameter, NonConvergence
from .rng import PURPOSE_CHANNEL, derive_seed
from .schemes import Scheme, SchemeConfig, parse_p0
from .sim import ExperimentSpec, ExperimentStats, UniformChannel, draw_channel, run_experiment
from .verify import verify_all

SCHEME_NAMES = ("gf2", "gf", "perfect", "circ", "circ-red")

SIMULATE_COLUMNS = (
    "scheme", "L", "p0", "P", "M", "R", "trials", "seed",
    "mean_D", "mean_D_per_P", "ci95_D", "mean_ops", "mean_ops_per_bit", "mean_Ur", "mean_absA",
)
ANALYZE_COLUMNS = ("scheme", "L", "p0", "P", "M", "R", "quantity", "value", "remainder_bound", "lower_bound")
SWEEP_COLUMNS = (
    "figure", "scheme", "L", "p0", "P", "M", "R", "trials", "seed",
    "mean_D", "mean_D_per_P", "ci95_D", "ops_per_bit", "ops_measured_per_bit", "lower_bound",
    "norm_delay", "norm_ops",
)


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Fixed textual form for CSV cells: ints as-is, floats to 10 significant digits."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, str, Fraction)):
        return str(x)
    if math.isnan(x):
        return ""
    return format(float(x), ".10g")


def write_csv(rows: Sequence[Sequence], columns: Sequence[str], out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(x) for x in row])


def parse_range(text: str, kind=float) -> tuple:
    parts = str(text).split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"expected lo:hi or a:b:step, got {text!r}")
    try:
        return tuple(kind(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}") from exc


def parse_p_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad probability list {text!r}") from exc


@dataclass(frozen=True)
class Built:
    cfg: SchemeConfig
    name: str
    padding: int


def build_scheme(name: str, P: int, L: int | None, p0: str | None, M: int, forced_nonzero: bool = False) -> Built:
    if name not in SCHEME_NAMES:
        raise UsageError(f"unknown scheme {name!r}; choose from {', '.join(SCHEME_NAMES)}")
    if name == "gf2":
        L = 1
    elif L is None:
        L = 4 if name != "perfect" else 1
    if name in ("circ", "circ-red") and not is_admissible(L):
        raise UsageError(f"L={L} is not admissible for circular-shift coding; valid values: "
                         f"{', '.join(map(str, admissible_values(30)))}, ...")
    kind = {
        "gf2": Scheme.CONV_GF, "gf": Scheme.CONV_GF, "perfect": Scheme.PERFECT,
        "circ": Scheme.CIRC, "circ-red": Scheme.CIRC_RED,
    }[name]
    frac = None
    if kind.is_circ:
        if p0 is None:
            raise UsageError(f"scheme {name} needs --p0 N/D")
        try:
            frac = parse_p0(p0)
        except InvalidParameter as exc:
            raise UsageError(str(exc)) from exc
    padded = -(-M // L) * L
    try:
        cfg = SchemeConfig(kind, P, L, M=padded, p0=frac, forced_nonzero=forced_nonzero)
    except InvalidParameter as exc:
        raise UsageError(str(exc)) from exc
    return Built(cfg, name, padded - M)


def build_channel(args) -> ChannelConfig | UniformChannel:
    if args.p_list is not None:
        probs = parse_p_list(args.p_list)
        if args.R is not None and len(probs) == 1:
            probs = probs * args.R
        if args.R is not None and len(probs) != args.R:
            raise UsageError(f"--p-list has {len(probs)} values but --R is {args.R}")
        try:
            return ChannelConfig(probs)
        except InvalidParameter as exc:
            raise UsageError(str(exc)) from exc
    lo, hi = parse_range(args.p_range)
    try:
        return UniformChannel(args.R if args.R is not None else 60, lo, hi)
    except InvalidParameter as exc:
        raise UsageError(str(exc)) from exc


def note_padding(built: Built, M: int) -> None:
    if built.padding:
        print(f"note: M padded from {M} to {built.cfg.M} ({built.padding} dummy bits) for L={built.cfg.L}",
              file=sys.stderr)


def p0_cell(cfg: SchemeConfig) -> str:
    return str(cfg.p0) if cfg.p0 is not None else ""


def run_sim(built: Built, channel, trials: int, seed: int, decode: bool, fixed_channel: bool) -> ExperimentStats:
    spec = ExperimentSpec(
        built.cfg, channel, trials, seed,
        decode=decode and built.cfg.kind != Scheme.PERFECT,
        redraw_channel=not fixed_channel,
    )
    return run_experiment(spec)


def simulate_row(built: Built, R: int, trials: int, seed: int, st: ExperimentStats) -> list:
    cfg = built.cfg
    return [
        built.name, cfg.L, p0_cell(cfg), cfg.P, cfg.M, R, trials, seed,
        st.mean_D, st.mean_D_per_P, st.ci95_D, st.mean_ops, st.mean_ops_per_bit, st.mean_Ur, st.mean_absA,
    ]


def cmd_simulate(args, out) -> int:
    built = build_scheme(args.scheme, args.P, args.L, args.p0, args.M, args.forced_nonzero)
    note_padding(built, args.M)
    channel = build_channel(args)
    stats = run_sim(built, channel, args.trials, args.seed, args.decode == "on", args.fixed_channel)
    write_csv([simulate_row(built, channel.R, args.trials, args.seed, stats)], SIMULATE_COLUMNS, out)
    return 0


def read_means(path: str, built: Built) -> tuple[float | None, float | None]:
    """``(mean_absA, mean_Ur)`` from a simulate CSV row matching the scheme, L, p0 and P."""
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if (row["scheme"], int(row["L"]), row["p0"], int(row["P"])) == (
                built.name, built.cfg.L, p0_cell(built.cfg), built.cfg.P
            ):
                a = float(row["mean_absA"]) if row["mean_absA"] else None
                u = float(row["mean_Ur"]) if row["mean_Ur"] else None
                return a, u
    raise UsageError(f"no row for {built.name} L={built.cfg.L} p0={p0_cell(built.cfg)} P={built.cfg.P} in {path}")


def cmd_analyze(args, out) -> int:
    # formulas are linear in M, so no padding is needed here
    built = build_scheme(args.scheme, args.P, args.L, args.p0, args.M)
    cfg = built.cfg
    M = args.M
    rule = build_channel(args)
    channel = draw_channel(rule, derive_seed(args.seed, PURPOSE_CHANNEL))
    if cfg.kind.is_circ and args.what in ("delay", "both"):
        raise UsageError(
            "no closed-form delay for circular-shift schemes; use 'simulate', or compare against "
            "the GF(q) bound with q <= 1/p0"
        )
    head = [built.name, cfg.L, p0_cell(cfg), cfg.P, M, channel.R]
    rows = []
    if args.what in ("delay", "both"):
        q = math.inf if cfg.kind == Scheme.PERFECT else cfg.q
        try:
            exp = expected_delay(q, channel, cfg.P)
        except NonConvergence as exc:
            raise UsageError(str(exc)) from exc
        rows.append(head + ["mean_D", exp.value, exp.remainder_bound, False])
        rows.append(head + ["mean_D_per_P", exp.value / cfg.P, exp.remainder_bound / cfg.P, False])
    if args.what in ("complexity", "both"):
        if cfg.kind == Scheme.PERFECT:
            raise UsageError("the perfect scheme has no decoding-complexity formula")
        mean_A, mean_Ur = args.mean_A, args.mean_Ur
        if args.means_from:
            mean_A, mean_Ur = read_means(args.means_from, built)
        if cfg.kind == Scheme.CONV_GF and cfg.L > 1:
            approx = math.fsum(conv_complexity_approx(cfg, p, M) for p in channel.p) / channel.R
            rows.append(head + ["ops_approx", approx, None, False])
        if mean_A is None:
            if cfg.kind == Scheme.CONV_GF and cfg.L > 1:
                pass
            else:
                raise UsageError("complexity for this scheme needs --mean-A or --means-from")
        else:
            terms = mean_formula_ops(cfg, channel.p, mean_A, mean_Ur, M=M)
            rows.append(head + ["ops", terms.total, None, terms.lower_bound])
            rows.append(head + ["ops_per_bit", terms.total / (cfg.P * M), None, terms.lower_bound])
    write_csv(rows, ANALYZE_COLUMNS, out)
    return 0


FIGURE_SCHEMES = {
    1: (
        ("perfect", None, None), ("gf2", 1, None), ("gf", 2, None), ("gf", 4, None), ("gf", 10, None),
        ("circ", 4, "1/4"), ("circ", 4, "1/2"), ("circ", 10, "1/4"), ("circ", 10, "1/2"),
    ),
    2: (
        ("perfect", None, None), ("gf2", 1, None), ("gf", 4, None), ("gf", 10, None),
        ("circ", 4, "1/4"), ("circ", 4, "1/2"), ("circ", 10, "1/4"), ("circ", 10, "1/2"),
    ),
    3: (
        ("perfect", None, None), ("gf2", 1, None),
        *(("circ", 4, p0) for p0 in ("1/6", "1/5", "1/4", "1/3", "1/2", "2/3")),
        *(("circ-red", 4, p0) for p0 in ("1/6", "1/5", "1/4", "1/3", "1/2", "2/3")),
    ),
}


def cmd_sweep(args, out) -> int:
    a, b, step = parse_range(args.P_range, int) if args.P_range.count(":") == 2 else (*parse_range(args.P_range, int), 1)
    if not 1 <= a <= b or step < 1:
        raise UsageError("--P-range needs 1 <= a <= b and step >= 1")
    channel = build_channel(args)
    decode = args.figure in (2, 3)
    rows = []
    for P in range(a, b + 1, step):
        results = []
        for name, L, p0 in FIGURE_SCHEMES[args.figure]:
            built = build_scheme(name, P, L, p0, args.M)
            if P == a:
                note_padding(built, args.M)
            stats = run_sim(built, channel, args.trials, args.seed, decode, args.fixed_channel)
            formula = None
            if decode and built.cfg.kind != Scheme.PERFECT:
                formula = mean_formula_ops(built.cfg, stats.p_values, stats.mean_absA, stats.mean_Ur)
            results.append((built, stats, formula))
        perfect = next(st for bt, st, _ in results if bt.cfg.kind == Scheme.PERFECT)
        gf2 = next(((bt, f) for bt, _, f in results if bt.name == "gf2"), None)
        for built, st, formula in results:
            cfg = built.cfg
            ops_bit = formula.total / (cfg.P * cfg.M) if formula else None
            norm_ops = None
            if formula and gf2 is not None and gf2[1] is not None:
                norm_ops = ops_bit / (gf2[1].total / (gf2[0].cfg.P * gf2[0].cfg.M))
            norm_delay = st.mean_D / perfect.mean_D if perfect.mean_D > 0 else None
            rows.append([
                args.figure, built.name, cfg.L, p0_cell(cfg), P, cfg.M, channel.R, args.trials, args.seed,
                st.mean_D, st.mean_D_per_P, st.ci95_D, ops_bit, st.mean_ops_per_bit,
                formula.lower_bound if formula else None, norm_delay, norm_ops,
            ])
    write_csv(rows, SWEEP_COLUMNS, out)
    return 0


def cmd_verify(args, out) -> int:
    only = args.check or None
    report = verify_all(args.budget, args.seed, only=only)
    out.write(report.text())
    if args.jsonl:
        with open(args.jsonl, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.jsonl())
    return 0 if report.ok else 1


def _channel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--R", type=int, default=None, help="receiver count (default 60, or the --p-list length)")
    p.add_argument("--p-list", dest="p_list", default=None, help="comma-separated success probabilities")
    p.add_argument("--p-range", dest="p_range", default="0.8:0.9", help="lo:hi for uniform per-receiver draws")
    p.add_argument("--fixed-channel", dest="fixed_channel", action="store_true",
                   help="draw p_r once per experiment instead of once per trial")


def _scheme_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", default="circ", help="gf2 | gf | perfect | circ | circ-red")
    p.add_argument("--L", type=int, default=None, help="symbol length in bits (default 4)")
    p.add_argument("--p0", default=None, help="zero-coefficient probability as N/D")
    p.add_argument("--P", type=int, default=10, help="packets per generation")
    p.add_argument("--M", type=int, default=1024, help="bits per packet, padded up to a multiple of L")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="YAML file with defaults keyed by flag name")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output path (default stdout)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csrlnc", description="Circular-shift RLNC experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Monte Carlo broadcast experiment, one CSV row")
    _common(sim)
    _scheme_flags(sim)
    _channel_flags(sim)
    sim.add_argument("--trials", type=int, default=1000)
    sim.add_argument("--decode", choices=("on", "off"), default="off", help="decode payloads and count operations")
    sim.add_argument("--forced-nonzero", dest="forced_nonzero", action="store_true",
                     help="conventional coefficients drawn from nonzero elements only")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="closed-form delay and complexity")
    _common(ana)
    _scheme_flags(ana)
    _channel_flags(ana)
    ana.add_argument("--what", choices=("delay", "complexity", "both"), default="delay")
    ana.add_argument("--mean-A", dest="mean_A", type=float, default=None, help="mean residual system size")
    ana.add_argument("--mean-Ur", dest="mean_Ur", type=float, default=None, help="mean uncoded receptions")
    ana.add_argument("--means-from", dest="means_from", default=None, help="simulate CSV supplying the means")
    ana.set_defaults(func=cmd_analyze)

    sw = sub.add_parser("sweep", help="figure-ready long-format CSV over P")
    _common(sw)
    _channel_flags(sw)
    sw.add_argument("--figure", type=int, choices=(1, 2, 3), required=True)
    sw.add_argument("--P-range", dest="P_range", default="5:30:5", help="a:b:step")
    sw.add_argument("--M", type=int, default=1024)
    sw.add_argument("--trials", type=int, default=1000)
    sw.set_defaults(func=cmd_sweep)

    ver = sub.add_parser("verify", help="run the check suite")
    ver.add_argument("--budget", choices=("quick", "full"), default="quick")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out", default=None)
    ver.add_argument("--jsonl", default=None, help="also write a JSON-lines report here")
    ver.add_argument("--check", action="append", default=None, help="run only this check (repeatable)")
    ver.add_argument("--config", default=None)
    ver.set_defaults(func=cmd_verify)
    return parser


def _load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a mapping")
    return {str(k).replace("-", "_"): (str(v) if k in ("p0", "p_range", "p-range", "P_range", "p_list") else v)
            for k, v in data.items()}


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    try:
        if args.config:
            config = _load_config(args.config)
            sub = parser._subparsers._group_actions[0].choices[args.command]
            known = {a.dest for a in sub._actions}
            unknown = set(config) - known
            if unknown:
                raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
            sub.set_defaults(**config)
            args = parser.parse_args(argv)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                return args.func(args, fh)
        buf = io.StringIO()
        code = args.func(args, buf)
        sys.stdout.write(buf.getvalue())
        return code
    except UsageError as exc:
        print(f"csrlnc {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
