"""``wiretapkey`` command line: single evaluations, sweeps and the acceptance run.

Exit codes: 0 success, 1 usage error, 2 numeric failure (non-sweep commands).
"""

from __future__ import annotations

import argparse
import math
import subprocess
import sys
from pathlib import Path

import numpy as np

from .bb84 import Bb84Params, optimize_mu, skr_restricted, skr_unrestricted
from .bounds import BracketError, er_upper_bound_numeric, er_upper_bound_pure_loss
from .channel import ChannelParams
from .gaussian import PhysicalityError
from .rates import key_rate
from .sweep import (
    OUT_DIR_ENV,
    SpecError,
    fmt,
    parse_value,
    presets,
    read_config,
    spec_from_config,
    write_sweep,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
NUMERIC_ERRORS = (PhysicalityError, BracketError, np.linalg.LinAlgError, ArithmeticError)

# config-file keys accepted by the single-shot commands, mapped to argparse dests
CONFIG_KEYS = {
    "eta": "eta",
    "kappa": "kappa",
    "n_e": "ne",
    "ne": "ne",
    "mu": "mu",
    "beta": "beta",
    "eta_E": "eta_e",
    "n_d": "nd",
    "f_L": "fl",
    "rate_R": "rate",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _mu(text: str):
    if text.strip().lower() == "opt":
        return "opt"
    return parse_value(text)


def _add_channel_flags(p, mu_default="inf"):
    p.add_argument("--config", type=Path, help="key=value file; flags override its values")
    p.add_argument("--eta", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--ne", type=float, help="Eve's thermal photon number")
    p.add_argument("--mu", type=_mu, help=f"input photon number, 'inf' or (bb84) 'opt'; default {mu_default}")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="wiretapkey", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("rate", help="DR, RR and CCQ key rates in bits per mode")
    _add_channel_flags(p)
    p.add_argument("--beta", type=float, help="reconciliation efficiency for CCQ (default 1)")
    p.add_argument("--direction", choices=["dr", "rr", "ccq", "all"], default="all")

    p = sub.add_parser("bound", help="relative-entropy upper bound in bits per mode")
    _add_channel_flags(p)
    p.add_argument("--numeric", action="store_true", help="force the PPT search even for pure loss")

    p = sub.add_parser("bb84", help="DS-BB84 secret-key rate in bits/s")
    _add_channel_flags(p, mu_default="opt")
    p.add_argument("--eta-e", dest="eta_e", type=float, help="Eve's transmissivity (default kappa*(1-eta))")
    p.add_argument("--nd", type=float, help="dark counts per pulse (default 1e-4)")
    p.add_argument("--fl", type=float, help="reconciliation penalty (default 1.1)")
    p.add_argument("--rate", type=float, help="pulse rate R (default 1e9)")

    p = sub.add_parser("sweep", help="run a preset or a key=value spec file to CSV")
    p.add_argument("target", nargs="?", help="preset name or spec file path")
    p.add_argument("--preset", help="preset name (alternative to the positional argument)")
    p.add_argument("--out", type=Path, help=f"CSV path (default ${OUT_DIR_ENV}/<name>.csv)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header line")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--plot", action="store_true", help="also write a gnuplot script next to the CSV")
    p.add_argument("--list", action="store_true", help="list presets and exit")

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("pytest_args", nargs=argparse.REMAINDER)
    return ap


def _merged(args) -> dict:
    """Config-file values overlaid by explicit flags."""
    vals = {}
    if getattr(args, "config", None) is not None:
        try:
            cfg = read_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        for k, v in cfg.items():
            if k not in CONFIG_KEYS:
                raise UsageError(f"config: unknown key {k!r}")
            dest = CONFIG_KEYS[k]
            vals[dest] = _mu(v) if dest == "mu" else parse_value(v)
    for k, v in vars(args).items():
        if v is not None:
            vals[k] = v
    return vals


def _channel_params(vals, default_mu=math.inf) -> ChannelParams:
    if "eta" not in vals:
        raise UsageError("--eta is required")
    mu = vals.get("mu", default_mu)
    if mu == "opt":
        raise UsageError("mu=opt is only meaningful for bb84")
    try:
        return ChannelParams(vals["eta"], vals.get("kappa", 1.0), vals.get("ne", 0.0), mu)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_rate(args) -> int:
    vals = _merged(args)
    params = _channel_params(vals)
    beta = vals.get("beta", 1.0)
    if not 0 < beta <= 1:
        raise UsageError(f"beta must lie in (0, 1], got {beta}")
    dirs = ["DR", "RR", "CCQ"] if args.direction == "all" else [args.direction.upper()]
    for d in dirs:
        r = key_rate(d, params, beta)
        print(f"{d.lower()}\t{fmt(r.bits_per_mode)}\t{r.channel}\t{r.path}")
    return EXIT_OK


def cmd_bound(args) -> int:
    vals = _merged(args)
    params = _channel_params(vals)
    if params.n_e == 0 and not args.numeric:
        print(f"er_ub\t{fmt(er_upper_bound_pure_loss(params.eta, params.kappa))}\tclosed-form")
        return EXIT_OK
    res = er_upper_bound_numeric(params)
    flag = "converged" if res.converged else "unconverged"
    print(f"er_ub\t{fmt(res.bits)}\tnumeric\tmu_star={fmt(res.mu_star)}\t{flag}")
    return EXIT_OK


def cmd_bb84(args) -> int:
    vals = _merged(args)
    if "eta" not in vals:
        raise UsageError("--eta is required")
    eta, kappa = vals["eta"], vals.get("kappa", 1.0)
    mu = vals.get("mu", "opt")
    try:
        base = Bb84Params(
            rate_R=vals.get("rate", 1e9),
            eta=eta,
            eta_E=vals.get("eta_e", kappa * (1 - eta)),
            n_d=vals.get("nd", 1e-4),
            f_L=vals.get("fl", 1.1),
            mu=0.0 if mu == "opt" or math.isinf(mu) else mu,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if mu != "opt" and math.isinf(mu):
        raise UsageError("bb84 needs a finite mu or 'opt'")
    for model, fn in (("unrestricted", skr_unrestricted), ("restricted", skr_restricted)):
        if mu == "opt":
            res = optimize_mu(base, model)
            flat = "\tflat" if res.flat else ""
            print(f"{model}\t{fmt(res.skr_star)}\tmu_star={fmt(res.mu_star)}{flat}")
        else:
            print(f"{model}\t{fmt(fn(base))}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    table = presets()
    if args.list:
        for name, spec in table.items():
            print(f"{name}\t{spec.description}")
        return EXIT_OK
    target = args.preset or args.target
    if not target:
        raise UsageError("sweep needs a preset name or a spec file")
    if target in table:
        spec = table[target]
    elif Path(target).is_file():
        try:
            spec = spec_from_config(read_config(target), Path(target).stem)
        except SpecError as exc:
            raise UsageError(f"invalid spec: {exc}") from exc
    else:
        raise UsageError(f"unknown preset or missing file: {target}")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    path, rows = write_sweep(spec, args.out, timestamp=not args.no_timestamp, jobs=args.jobs, plot=args.plot)
    n_err = sum(1 for r in rows if r.error)
    print(f"wrote {len(rows)} rows to {path} ({n_err} with errors)")
    return EXIT_OK


def cmd_verify(args) -> int:
    root = Path(__file__).resolve().parents[2]
    suite = root / "tests" / "test_acceptance.py"
    if not suite.is_file():
        raise UsageError(f"acceptance suite not found at {suite}")
    extra = [a for a in args.pytest_args if a != "--"]
    return subprocess.call([sys.executable, "-m", "pytest", "-q", "-s", str(suite), *extra], cwd=root)


COMMANDS = {"rate": cmd_rate, "bound": cmd_bound, "bb84": cmd_bb84, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return EXIT_USAGE
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
