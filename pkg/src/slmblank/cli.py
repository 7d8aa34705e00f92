"""Command-line front end: one subcommand per experiment family.

Parameter precedence is built-in defaults < ``--config`` file < flags.
"""

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from slmblank import experiments as ex
from slmblank.errors import ConfigurationError

SUBCOMMANDS = ("trial", "sweep-threshold", "sweep-u", "sweep-beta", "sweep-gamma", "gain-series")

_DEFAULTS = ex.ExperimentConfig()


def _grid(text: str) -> tuple:
    """``t_min:t_step:t_max`` -> ``(t_min, t_max, t_step)``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid {text!r} is not t_min:t_step:t_max")
    try:
        t_min, t_step, t_max = (float(x) for x in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid {text!r} has a malformed number") from None
    if not t_step > 0:
        raise argparse.ArgumentTypeError(f"grid {text!r} needs t_step > 0")
    if t_max < t_min:
        raise argparse.ArgumentTypeError(f"grid {text!r} has t_max < t_min")
    return (t_min, t_max, t_step)


def _int_list(text: str) -> tuple:
    try:
        values = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated integer list") from None
    return values


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed {text!r} is not a 64-bit unsigned integer")
    return value


def _fmt_grid(g) -> str:
    t_min, t_max, t_step = g
    return f"{t_min:g}:{t_step:g}:{t_max:g}"


# option name -> (ExperimentConfig field, parser, help)
_OPTIONS = {
    "n": ("n", int, f"subcarriers (default {_DEFAULTS.n})"),
    "u": ("u_count", int, f"SLM candidates U (default {_DEFAULTS.u_count})"),
    "sbnr-db": ("sbnr_db", float, f"signal to background noise ratio, dB (default {_DEFAULTS.sbnr_db:g})"),
    "sinr-db": ("sinr_db", float, f"signal to impulsive noise ratio, dB (default {_DEFAULTS.sinr_db:g})"),
    "p": ("p", float, f"impulse probability per sample (default {_DEFAULTS.p:g})"),
    "gamma": ("gamma", float, f"optimized-threshold constant (default {_DEFAULTS.gamma:g})"),
    "seed": ("master_seed", _seed, f"master seed (default {_DEFAULTS.master_seed})"),
    "symbols": ("symbols_per_point", int, f"OFDM symbols per trial (default {_DEFAULTS.symbols_per_point})"),
    "trials": ("trials", int, f"trials per measurement (default {_DEFAULTS.trials})"),
    "grid": ("threshold_grid", _grid, f"fixed-threshold grid t_min:t_step:t_max (default {_fmt_grid(_DEFAULTS.threshold_grid)})"),
    "u-values": ("u_values", _int_list, "U values for sweep-u (default "
                 + ",".join(map(str, _DEFAULTS.u_values)) + ")"),
    "beta-grid": ("beta_grid", _grid, f"beta grid (default {_fmt_grid(_DEFAULTS.beta_grid)})"),
    "gamma-grid": ("gamma_grid", _grid, f"gamma grid (default {_fmt_grid(_DEFAULTS.gamma_grid)})"),
    "threshold": ("threshold", float, "fixed blanking threshold for trial/gain-series (default: optimized threshold)"),
    "workers": ("workers", int, f"worker threads (default {_DEFAULTS.workers})"),
}

_FILE_KEYS = {name.replace("-", "_"): spec for name, spec in _OPTIONS.items()}


@dataclass
class CliInvocation:
    subcommand: str
    config: ex.ExperimentConfig
    out_path: Path
    config_path: Path | None = None


class _UsageError(Exception):
    pass


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines into ExperimentConfig field values."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise _UsageError(f"cannot read config file {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (x.strip() for x in line.split("=", 1))
        if key not in _FILE_KEYS:
            raise _UsageError(f"{path}:{lineno}: unknown key {key!r}")
        field_name, parse, _ = _FILE_KEYS[key]
        try:
            values[field_name] = parse(value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise _UsageError(f"{path}:{lineno}: bad value {value!r} for {key}: {exc}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slmblank",
        description="SLM-assisted blanking experiments for impulsive-noise OFDM links.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=f"run {name}")
        for opt, (_, parse, help_text) in _OPTIONS.items():
            sp.add_argument(f"--{opt}", type=parse, default=None, help=help_text)
        sp.add_argument("--config", type=Path, default=None, help="key = value config file")
        sp.add_argument("--out", type=Path, default=None, help=f"CSV output (default {name}.csv)")
    return parser


def parse_args(argv=None) -> CliInvocation:
    parser = build_parser()
    args = parser.parse_args(argv)
    values = {}
    try:
        if args.config is not None:
            values.update(read_config_file(args.config))
        for opt, (field_name, _, _) in _OPTIONS.items():
            flag_value = getattr(args, opt.replace("-", "_"))
            if flag_value is not None:
                values[field_name] = flag_value
        config = ex.ExperimentConfig(**values)
    except _UsageError as exc:
        parser.error(str(exc))
    except ConfigurationError as exc:
        parser.error(f"invalid configuration: {exc}")
    out = args.out if args.out is not None else Path(f"{args.subcommand}.csv")
    return CliInvocation(args.subcommand, config, out, args.config)


def _fmt(x) -> str:
    return ex.format_float(x)


def _run(inv: CliInvocation):
    """Run the experiment; returns ``(result, argmax, best_snr_db, extra)``."""
    cfg = inv.config
    if inv.subcommand == "trial":
        records = ex.run_trials(cfg)
        best = max(records, key=lambda r: (r.snr_db, -r.trial))
        return records, best.trial, best.snr_db, ""
    if inv.subcommand == "gain-series":
        records = ex.gain_series(cfg)
        best = max(records, key=lambda r: (r.gain_db, -r.trial))
        return records, best.trial, best.snr_db, f" max_gain_db={_fmt(best.gain_db)}"
    if inv.subcommand == "sweep-u":
        result = ex.sweep_u(cfg)
        for u, obt, snr in zip(result.u_values, result.obt, result.best_snr_db):
            print(f"u={u} obt={_fmt(obt)} snr_db={_fmt(snr)}", file=sys.stderr)
        return result, result.obt[-1], result.best_snr_db[-1], ""
    sweep = {
        "sweep-threshold": ex.sweep_threshold,
        "sweep-beta": ex.sweep_beta,
        "sweep-gamma": ex.sweep_gamma,
    }[inv.subcommand]
    result = sweep(cfg)
    return result, result.argmax, result.best_snr_db, ""


def main(argv=None) -> int:
    inv = parse_args(argv)
    try:
        result, argmax, best, extra = _run(inv)
    except (ValueError, ArithmeticError) as exc:
        print(f"slmblank: {inv.subcommand} failed: {exc}", file=sys.stderr)
        return 1
    try:
        ex.write_csv(result, inv.out_path)
    except OSError as exc:
        print(f"slmblank: {exc}", file=sys.stderr)
        return 2
    print(f"{inv.subcommand} argmax={_fmt(argmax)} best_snr_db={_fmt(best)}{extra}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
