"""``wva state|sweep|oracle`` command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import config as cfgmod
from .errors import InvalidArgument, NumericalError
from .oracle import ORACLE_TOL
from .runner import COLUMNS, oracle_check, state_report, sweep_rows

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return "" if math.isnan(x) else format(x, ".17g")


def _json_float(x):
    return None if isinstance(x, float) and math.isnan(x) else x


def load_config(args) -> cfgmod.Config:
    text = ""
    if args.preset:
        text += cfgmod.preset(args.preset)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text += "\n" + fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from None
    if not text.strip() and not args.set:
        raise UsageError("give --config and/or --preset")
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        overrides[key] = value
    if args.seed is not None:
        overrides["run.seed"] = str(args.seed)
    if args.format is not None:
        overrides["output.format"] = args.format
    if args.out is not None:
        overrides["output.path"] = args.out
    return cfgmod.parse(text, overrides)


def render_table(rows, fmt_name: str) -> str:
    if fmt_name == "json":
        data = {
            "columns": list(COLUMNS),
            "rows": [dict(zip(COLUMNS, (x, v, var, _json_float(se)))) for x, v, var, se in rows],
        }
        return json.dumps(data, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for x, v, var, se in rows:
        writer.writerow((fmt(x), fmt(v), var, fmt(se)))
    return buf.getvalue()


def render_state(report: dict, fmt_name: str | None) -> str:
    if fmt_name == "json":
        clean = {k: ([list(z) for z in v] if k == "chi_fock" else _json_float(v))
                 for k, v in report.items()}
        return json.dumps(clean, indent=1) + "\n"
    if fmt_name == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("key", "value"))
        for k, v in report.items():
            if k == "chi_fock":
                for n, (re_, im) in enumerate(v):
                    w.writerow((f"chi_fock_{n}_re", fmt(re_)))
                    w.writerow((f"chi_fock_{n}_im", fmt(im)))
            elif isinstance(v, bool):
                w.writerow((k, str(v).lower()))
            else:
                w.writerow((k, fmt(v)))
        return buf.getvalue()
    out = []
    for k, v in report.items():
        if k == "chi_fock":
            for n, (re_, im) in enumerate(v):
                out.append(f"{'chi <' + str(n) + '|':<18} {complex(re_, im):.6e}")
        elif isinstance(v, bool):
            out.append(f"{k:<18} {v}")
        else:
            out.append(f"{k:<18} {v:.10g}")
    return "\n".join(out) + "\n"


def _emit(text: str, path: str):
    if not path or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def cmd_state(cfg, args) -> int:
    report = state_report(cfg)
    fmt_name = args.format or ("json" if cfg.output.path.endswith(".json") else None)
    _emit(render_state(report, fmt_name), cfg.output.path)
    return EXIT_OK


def cmd_sweep(cfg, args) -> int:
    rows = sweep_rows(cfg)
    _emit(render_table(rows, cfg.output.format), cfg.output.path)
    return EXIT_OK


def cmd_oracle(cfg, args) -> int:
    results = oracle_check(cfg)
    worst = {"p_exact (relative)": 0.0, "phase (rad)": 0.0, "state distance": 0.0}
    for _, rep in results:
        worst["p_exact (relative)"] = max(worst["p_exact (relative)"], rep.p_deviation)
        worst["phase (rad)"] = max(worst["phase (rad)"], rep.phase_deviation)
        worst["state distance"] = max(worst["state distance"], abs(rep.state_distance))
    overall = max(worst.values())
    ok = all(rep.ok for _, rep in results)
    lines = [f"oracle battery: {len(results)} parameter sets, "
             f"|alpha|^2 = {cfg.setup.alpha2:.6g}, phi0 = {cfg.setup.phi0:.6g}"]
    lines += [f"  max deviation {k:<20} {v:.3e}" for k, v in worst.items()]
    lines.append(f"{'PASS' if ok else 'FAIL'}: max deviation {overall:.3e} (tolerance {ORACLE_TOL:.0e})")
    _emit("\n".join(lines) + "\n", cfg.output.path)
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {"state": cmd_state, "sweep": cmd_sweep, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wva", description="Weak-value amplification of a single-photon cross-Kerr phase."
    )
    parser.add_argument("command", choices=[*COMMANDS, "config"],
                        help="state: single-point report; sweep: table; oracle: Fock cross-check; "
                             "config: print the resolved configuration")
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--preset", help=f"shipped preset ({', '.join(cfgmod.PRESETS)})")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    parser.add_argument("--seed", type=int, help="RNG seed (overrides run.seed)")
    parser.add_argument("--out", help="output path (default stdout)")
    parser.add_argument("--format", choices=cfgmod.FORMATS, help="output format")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args)
        if args.command == "config":
            _emit(cfgmod.emit(cfg), cfg.output.path)
            return EXIT_OK
        return COMMANDS[args.command](cfg, args)
    except (UsageError, cfgmod.ConfigError, InvalidArgument) as exc:
        print(f"wva: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"wva: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
