"""Command-line entry point: ``wermerdomain <command> [options]``.

Every option can also come from a flat ``key = value`` file passed with
``--config``; flags on the command line win.  Each run writes
``<outdir>/<command>.json`` plus CSV tables (and PGM heatmaps for
``phi-map``).  Exit codes: 0 success, 1 invariant failure, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import fields

from . import report
from .config import FIELD_TYPES, RunConfig, build_config, coerce, load_file
from .errors import ConfigError
from .experiments import COMMANDS, Outcome
from .selftest import COMMAND_MODULE, run_selftest

log = logging.getLogger("wermerdomain")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file")
    common.add_argument("--print-config", action="store_true", help="print the effective config and exit")
    common.add_argument("--selftest", action="store_true",
                        help="run the invariant suite of this command's module at reduced scale")
    for f in fields(RunConfig):
        common.add_argument(_flag(f.name), dest=f.name, default=None, metavar=f.name.upper(),
                            help=f"(default: {f.default})")
    parser = argparse.ArgumentParser(prog="wermerdomain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(COMMANDS) + ["selftest"]:
        sub.add_parser(name, parents=[common], help=f"run the {name} experiment")
    return parser


def _join_negative_values(argv: list[str]) -> list[str]:
    # "--box -2,2" would otherwise be read as two flags
    value_flags = {_flag(n) for n in FIELD_TYPES} | {"--config"}
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in value_flags and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _emit(cfg: RunConfig, command: str, outcome: Outcome, elapsed_ms: float) -> None:
    report.ensure_dir(cfg.outdir)
    h = cfg.hash()
    stem = os.path.join(cfg.outdir, command)
    for name, (header, rows) in outcome.tables.items():
        report.write_csv(f"{os.path.join(cfg.outdir, name)}.csv", header, rows, cfg.seed, h)
    scales = {}
    for name, img in outcome.images.items():
        scales[name] = report.write_pgm(f"{os.path.join(cfg.outdir, name)}.pgm", img)
    results = dict(outcome.results)
    if scales:
        results["images"] = scales
    report.write_json(stem + ".json", command, h, cfg.seed, results, outcome.invariants, elapsed_ms)


def run(command: str, cfg: RunConfig, selftest: bool = False) -> tuple[Outcome, int]:
    t0 = time.perf_counter()
    if command == "selftest":
        outcome = run_selftest()
    elif selftest:
        outcome = run_selftest([COMMAND_MODULE[command]])
    else:
        outcome = COMMANDS[command](cfg)
    elapsed = 1e3 * (time.perf_counter() - t0)
    name = command if not selftest else f"{command}-selftest"
    _emit(cfg, name, outcome, elapsed)
    return outcome, EXIT_OK if outcome.passed else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    args = build_parser().parse_args(argv)
    try:
        file_values = load_file(args.config) if args.config else {}
        overrides = {f.name: coerce(f.name, getattr(args, f.name))
                     for f in fields(RunConfig) if getattr(args, f.name) is not None}
        cfg = build_config(file_values, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"config error: --config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.print_config:
        sys.stdout.write(cfg.to_text())
        return EXIT_OK
    try:
        outcome, code = run(args.command, cfg, args.selftest)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for inv in outcome.invariants:
        print(f"[{'PASS' if inv['pass'] else 'FAIL'}] {inv['name']} {inv['detail']}".rstrip())
    return code


if __name__ == "__main__":
    sys.exit(main())
