"""Command-line front end.

Exit status: 0 success, 2 bad arguments, 3 numerical failure (bracketing or
convergence), 4 a reproduced value outside its tolerance.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import reproduce as rp
from .analytics import gain_zero, p_click, p_click_given_first, p_click_recursive
from .bounds import (
    BracketError,
    ChannelParams,
    expected_gain_ideal,
    l_zero,
    mu_max,
    r_upp,
    sweep_mu_max,
    sweep_r_upp,
    to_csv,
)
from .simulation import DEFAULT_SEED, run_simulation
from .usd import ProtocolParams, optimal_usd

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_REPRO = 0, 2, 3, 4
DIGITS = 10


class UsageError(Exception):
    pass


def _num(x) -> float | int:
    if isinstance(x, float):
        return float(f"{x:.{DIGITS}g}")
    return x


def _emit(fmt: str, header: list[str], rows: list[list], human: str) -> str:
    if fmt == "csv":
        return to_csv(header, rows, DIGITS)
    if fmt == "json":
        recs = [{h: _num(v) for h, v in zip(header, row)} for row in rows]
        return json.dumps(recs[0] if len(recs) == 1 else recs, indent=2) + "\n"
    return human


def _protocol(args, mu=None) -> ProtocolParams:
    return ProtocolParams(args.mu if mu is None else mu, args.f, args.mmax)


def cmd_usd(args) -> tuple[str, int]:
    sol = optimal_usd(_protocol(args))
    header = ["regime", "q_ss", "q_ds", "p_c", "p0_c", "p1_c", "p2_c"]
    row = [sol.regime.name, sol.q_ss, sol.q_ds, sol.p_c, *sol.p_cond]
    human = (
        f"regime {sol.regime.name}\n"
        f"q_ss = {sol.q_ss:.6g}  q_ds = {sol.q_ds:.6g}\n"
        f"p_c  = {sol.p_c:.6g}\n"
        f"p(j|c) = ({sol.p_cond[0]:.6g}, {sol.p_cond[1]:.6g}, {sol.p_cond[2]:.6g})\n"
    )
    return _emit(args.format, header, [row], human), EXIT_OK


def cmd_gain(args) -> tuple[str, int]:
    g = gain_zero(_protocol(args))
    lg = math.log10(g) if g > 0 else float("-inf")
    human = f"G_zero = {g:.4e}\nlog10(G_zero) = {lg:.2f}\n"
    return _emit(args.format, ["gain_zero", "log10_gain_zero"], [[g, lg]], human), EXIT_OK


def cmd_pclick(args) -> tuple[str, int]:
    if args.p1c is not None:
        p1c = args.p1c
    else:
        p1c = optimal_usd(_protocol(args)).p1c
    header = ["k", "p_click", "p_click_recursive", "given_0", "given_1", "given_2"]
    rows = []
    for k in range(2, args.kmax + 1):
        rows.append([k, p_click(k, p1c), p_click_recursive(k, p1c),
                     *(p_click_given_first(k, j, p1c) for j in range(3))])
    lines = [f"p(1|c) = {p1c:.6g}", f"{'k':>3} {'p_click':>12} {'|0':>12} {'|1':>12} {'|2':>12}"]
    lines += [f"{r[0]:>3} {r[1]:>12.6f} {r[3]:>12.6f} {r[4]:>12.6f} {r[5]:>12.6f}" for r in rows]
    return _emit(args.format, header, rows, "\n".join(lines) + "\n"), EXIT_OK


def cmd_simulate(args) -> tuple[str, int]:
    rep = run_simulation(_protocol(args), args.n, args.seed,
                         segments=args.segments, workers=args.workers)
    if args.format == "json":
        d = {k: _num(v) for k, v in rep.to_dict().items()}
        return json.dumps(d, indent=2) + "\n", EXIT_OK
    header = list(rep.to_dict())[:-1]
    row = [rep.to_dict()[h] for h in header]
    g = gain_zero(rep.params)
    human = (
        f"signals {rep.n_signals}  clicks {rep.clicks}  seed {rep.seed}\n"
        f"gain = {rep.gain_estimate:.4e} +/- {rep.gain_std_error:.1e}  (analytic {g:.4e})\n"
        f"qber violations {rep.qber_violations}  monitored-pair violations "
        f"{rep.monitored_pair_violations}\n"
        f"block histogram (k=0..{len(rep.block_length_histogram) - 1}): "
        f"{rep.block_length_histogram}\n"
    )
    return _emit(args.format, header, [row], human), EXIT_OK


def _channel(args) -> ChannelParams:
    if args.attenuation_db is not None or args.length_km is not None:
        if args.attenuation_db is None or args.length_km is None:
            raise UsageError("--attenuation-db and --length-km must be given together")
        return ChannelParams.from_link(args.pd, args.eta_det, args.tb,
                                       args.attenuation_db, args.length_km)
    return ChannelParams(args.pd, args.eta_det, args.tb, args.alpha_att)


def cmd_lzero(args) -> tuple[str, int]:
    L = l_zero(_channel(args), _protocol(args))
    return _emit(args.format, ["l_zero_km"], [[L]], f"L_zero = {L:.2f} km\n"), EXIT_OK


def cmd_mumax(args) -> tuple[str, int]:
    m = mu_max(args.eta, args.f, args.mmax)
    return _emit(args.format, ["eta", "mu_max"], [[args.eta, m]], f"mu_max = {m:.6g}\n"), EXIT_OK


def cmd_rupp(args) -> tuple[str, int]:
    r = r_upp(args.eta, args.f, args.mmax)
    human = f"R_upp = {r:.6g}  (eta^2 = {args.eta ** 2:.6g})\n"
    return _emit(args.format, ["eta", "r_upp", "eta_squared"], [[args.eta, r, args.eta**2]], human), EXIT_OK


def cmd_sweep(args) -> tuple[str, int]:
    if args.kind == "gain":
        grid = np.linspace(args.start, args.stop, args.num)
        header = ["mu", "gain_zero"]
        rows = [(float(m), gain_zero(_protocol(args, mu=float(m)))) for m in grid]
        if args.eta is not None:
            header.append("expected_gain")
            rows = [(m, g, expected_gain_ideal(args.eta, _protocol(args, mu=m))) for m, g in rows]
    else:
        if args.start <= 0:
            raise UsageError("eta sweeps need a positive --start")
        grid = np.logspace(math.log10(args.start), math.log10(args.stop), args.num)
        if args.kind == "mumax":
            header, rows = ["eta", "mu_max"], sweep_mu_max(grid, args.f, args.mmax)
        else:
            header, rows = ["eta", "r_upp", "eta_squared"], sweep_r_upp(grid, args.f, args.mmax)
    fmt = "csv" if args.format == "human" else args.format
    return _emit(fmt, header, [list(r) for r in rows], ""), EXIT_OK


def cmd_reproduce(args) -> tuple[str, int]:
    data = None
    if args.target == "table3":
        checks = rp.reproduce_table3(args.mmax)
    elif args.target == "table4":
        checks = rp.reproduce_table4(args.mmax)
    elif args.target == "fig6":
        checks, data = rp.reproduce_fig6(args.f, args.mmax)
        header = ["eta", "mu_max"]
    else:
        checks, data = rp.reproduce_fig7(args.f, args.mmax)
        header = ["eta", "r_upp", "eta_squared"]
    if data is not None and args.data:
        Path(args.data).write_text(to_csv(header, data, DIGITS))

    rows = [[c.name, c.computed, c.reported, c.tolerance, "PASS" if c.passed else "FAIL"]
            for c in checks]
    lines = []
    for c in checks:
        prec = 2 if ("km" in c.name or "log10" in c.name) else 4
        lines.append(f"{c.name:<32} {c.computed:>10.{prec}f}  reported {c.reported:>8.{prec}f}"
                     f"  +/- {c.tolerance:g}{' (rel)' if c.relative else ''}  "
                     f"{'PASS' if c.passed else 'FAIL'}")
    if args.target == "table3":
        for mu, (lg, dist) in rp.REPORTED_PRIOR_ATTACK.items():
            lines.append(f"earlier attack, mu={mu}: log10(G_zero) = {lg:.1f}, "
                         f"L_zero = {dist:.0f} km (quoted, not recomputed)")
    ok = all(c.passed for c in checks)
    lines.append("PASS" if ok else "FAIL")
    out = _emit(args.format, ["check", "computed", "reported", "tolerance", "status"], rows,
                "\n".join(lines) + "\n")
    return out, EXIT_OK if ok else EXIT_REPRO


def _add_protocol(p, mu=True):
    if mu:
        p.add_argument("--mu", type=float, required=True, help="mean photon number per pulse")
    p.add_argument("--f", type=float, default=0.155, help="decoy probability (default 0.155)")
    p.add_argument("--mmax", type=int, default=10, help="attack depth M_max (default 10)")


def _add_common(p):
    p.add_argument("--format", choices=["human", "csv", "json"], default="human")
    p.add_argument("--output", "-o", help="write the report to this file instead of stdout")
    p.add_argument("--config", help="file of key=value lines; explicit flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cowzero",
        description="Zero-error sequential attack on COW QKD: USD optimum, attack gain, "
        "distance and key-rate limits, Monte Carlo validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("usd", help="optimal USD measurement")
    _add_protocol(p)
    p.set_defaults(func=cmd_usd)

    p = sub.add_parser("gain", help="maximum zero-error gain G_zero")
    _add_protocol(p)
    p.set_defaults(func=cmd_gain)

    p = sub.add_parser("pclick", help="mean clicks per block, k = 2..kmax")
    p.add_argument("--mu", type=float, default=0.06, help="used when --p1c is absent (default 0.06)")
    _add_protocol(p, mu=False)
    p.add_argument("--p1c", type=float, help="conditional probability p(1|c) in (0, 1/2]")
    p.add_argument("--kmax", type=int, default=10)
    p.set_defaults(func=cmd_pclick)

    p = sub.add_parser("simulate", help="Monte Carlo run of the attack")
    _add_protocol(p)
    p.add_argument("--n", type=int, default=10**6, help="number of signals (default 1e6)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help=f"64-bit seed (default {DEFAULT_SEED})")
    p.add_argument("--segments", type=int, default=1)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lzero", help="distance at which the honest gain equals G_zero")
    _add_protocol(p)
    p.add_argument("--pd", type=float, required=True, help="dark-count probability")
    p.add_argument("--eta-det", type=float, required=True, help="detector efficiency")
    p.add_argument("--tb", type=float, default=0.9, help="Bob's beamsplitter transmittance (0.9)")
    p.add_argument("--alpha-att", type=float, default=0.2, help="fibre loss dB/km (0.2)")
    p.add_argument("--attenuation-db", type=float, help="total loss; with --length-km")
    p.add_argument("--length-km", type=float, help="fibre length for --attenuation-db")
    p.set_defaults(func=cmd_lzero)

    for name, func, text in (("mumax", cmd_mumax, "maximum safe intensity"),
                             ("rupp", cmd_rupp, "key-rate upper bound")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--eta", type=float, required=True, help="overall transmittance")
        _add_protocol(p, mu=False)
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="CSV sweep over eta (mumax, rupp) or mu (gain)")
    p.add_argument("--kind", choices=["mumax", "rupp", "gain"], default="rupp")
    p.add_argument("--start", type=float, default=1e-4)
    p.add_argument("--stop", type=float, default=1e-2)
    p.add_argument("--num", type=int, default=21)
    p.add_argument("--eta", type=float, help="gain sweeps: also emit the honest gain at this eta")
    _add_protocol(p, mu=False)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproduce", help="recompute reported values with pass/fail")
    p.add_argument("target", choices=["table3", "table4", "fig6", "fig7"])
    p.add_argument("--data", help="figure targets: write the curve CSV here")
    _add_protocol(p, mu=False)
    p.set_defaults(func=cmd_reproduce)

    for sp in sub.choices.values():
        _add_common(sp)
    return parser


def read_config(path) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = val
    return values


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config(known.config)
    command = next((a for a in argv if not a.startswith("-")), None)
    sub = parser._subparsers._group_actions[0].choices.get(command)  # noqa: SLF001
    if sub is None:
        return
    dests = {a.dest for a in sub._actions}  # noqa: SLF001
    unknown = set(values) - dests
    if unknown:
        raise UsageError(f"unknown config keys for '{command}': {', '.join(sorted(unknown))}")
    for action in sub._actions:  # noqa: SLF001
        if action.dest in values:
            # string defaults go through the argument's type conversion;
            # required flags become optional once the file supplies them
            action.default = values[action.dest]
            action.required = False


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        out, status = args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, ValueError, OSError) as exc:
        print(f"cowzero: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BracketError as exc:
        print(f"cowzero: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.output:
        Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)
    return status


def main() -> None:
    sys.exit(run())
