"""Command line front-end: ``artdna <command> ...``.

Exit codes: 0 success, 1 invalid DNA / validation error, 2 IO or usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .builder import importance_backtrack, importance_json
from .dna import (
    DecodeError,
    DnaSyntaxError,
    EncodeError,
    encode_compact,
    errors,
    load,
    parse_text,
    read_adnb,
    render_text,
    validate,
)
from .dna.dot import to_dot
from .elements.registry import all_schemas
from .sim import ConfigError, load_scenario, metrics, read_trace, run_scenario, write_trace
from .sim.metrics import format_table, to_csv, to_json

OK, INVALID, USAGE = 0, 1, 2


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read_dna(path: str):
    p = Path(path)
    try:
        if p.suffix == ".adnb":
            return read_adnb(p)
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise _Fail(USAGE, f"{path}: {exc.strerror or exc}") from None
    except DecodeError as exc:
        raise _Fail(INVALID, f"{path}: {exc}") from None
    try:
        return parse_text(text)
    except DnaSyntaxError as exc:
        raise _Fail(INVALID, f"{path}:{exc}") from None


def _check(dna, path: str, out) -> None:
    diags = validate(dna)
    for d in diags:
        print(f"{path}: {d}", file=out)
    if errors(diags):
        raise _Fail(INVALID, f"{path}: {len(errors(diags))} error(s)")


def _write(path: str | None, data, binary: bool = False) -> None:
    if path is None:
        if binary:
            sys.stdout.buffer.write(data)
        else:
            sys.stdout.write(data)
        return
    try:
        if binary:
            Path(path).write_bytes(data)
        else:
            Path(path).write_text(data, encoding="utf-8")
    except OSError as exc:
        raise _Fail(USAGE, f"{path}: {exc.strerror or exc}") from None


def cmd_compile(args) -> int:
    dna = _read_dna(args.input)
    _check(dna, args.input, sys.stderr)
    try:
        data = encode_compact(dna).to_bytes()
    except EncodeError as exc:
        raise _Fail(INVALID, f"{args.input}: {exc}") from None
    out = args.out or str(Path(args.input).with_suffix(".adnb"))
    _write(out, data, binary=True)
    print(f"{out}: {dna.element_count()} elements, {dna.distinct_elements()} distinct, {len(data)} bytes")
    return OK


def cmd_decompile(args) -> int:
    dna = _read_dna(args.input)
    _write(args.out, render_text(dna))
    return OK


def cmd_validate(args) -> int:
    dna = _read_dna(args.input)
    _check(dna, args.input, sys.stdout)
    print(f"{args.input}: ok, {dna.element_count()} elements, {dna.distinct_elements()} distinct")
    return OK


def cmd_graph(args) -> int:
    dna = _read_dna(args.input)
    _write(args.out, to_dot(dna, Path(args.input).stem))
    return OK


def cmd_elements(args) -> int:
    rows = [(str(s.id), s.name, str(s.src_channels), str(s.dst_channels), s.mode.value,
             ", ".join(f"{p.name}:{p.kind}" for p in s.param_schema)) for s in all_schemas()]
    head = ("id", "name", "in", "out", "mode", "params")
    widths = [max(len(r[i]) for r in rows + [head]) for i in range(len(head))]
    for r in [head] + rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return OK


def cmd_run(args) -> int:
    try:
        sc = load_scenario(args.scenario, seed=args.seed, duration=args.duration)
    except FileNotFoundError as exc:
        raise _Fail(USAGE, str(exc)) from None
    except (ConfigError, KeyError, ValueError) as exc:
        raise _Fail(USAGE, f"{args.scenario}: {exc}") from None
    out = Path(args.out or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _Fail(USAGE, f"{out}: {exc.strerror or exc}") from None
    try:
        result = run_scenario(sc, realtime=args.mode == "realtime", speed=args.speed)
    except (ConfigError, ValueError) as exc:
        raise _Fail(INVALID, f"{args.scenario}: {exc}") from None
    trace = out / sc.outputs.get("trace", f"{sc.name}.ndjson")
    signals = out / sc.outputs.get("signals", f"{sc.name}.csv")
    write_trace(result.records, trace, signals)
    print(f"trace: {trace}\nsignals: {signals}")
    if sc.importance:
        seeds = {k - 1: v for k, v in sc.importance.items()}
        imp = out / sc.outputs.get("importance", f"{sc.name}.importance.json")
        imp.write_text(importance_json(importance_backtrack(load(sc.dna_path), seeds)) + "\n")
        print(f"importance: {imp}")
    print(format_table(metrics(result.records)))
    return OK


def cmd_report(args) -> int:
    try:
        records = read_trace(args.trace)
    except OSError as exc:
        raise _Fail(USAGE, f"{args.trace}: {exc.strerror or exc}") from None
    except (json.JSONDecodeError, KeyError) as exc:
        raise _Fail(INVALID, f"{args.trace}: malformed trace ({exc})") from None
    m = metrics(records)
    text = {"table": format_table, "json": to_json, "csv": to_csv}[args.format](m)
    _write(args.out, text if text.endswith("\n") else text + "\n")
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artdna", description="Compile, inspect and simulate artificial DNAs.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="text DNA to compact binary")
    c.add_argument("input")
    c.add_argument("--out", help="output .adnb (default: input with .adnb suffix)")
    c.set_defaults(func=cmd_compile)

    c = sub.add_parser("decompile", help="binary or text DNA to canonical text")
    c.add_argument("input")
    c.add_argument("--out", help="output .adna (default: stdout)")
    c.set_defaults(func=cmd_decompile)

    c = sub.add_parser("validate", help="check a DNA and list diagnostics")
    c.add_argument("input")
    c.set_defaults(func=cmd_validate)

    c = sub.add_parser("graph", help="DOT block diagram of a DNA")
    c.add_argument("input")
    c.add_argument("--out", help="output .dot (default: stdout)")
    c.set_defaults(func=cmd_graph)

    c = sub.add_parser("elements", help="list the element library")
    c.set_defaults(func=cmd_elements)

    c = sub.add_parser("run", help="run a scenario and write trace files")
    c.add_argument("scenario", help="scenario file or bundled name (e.g. battery_kill)")
    c.add_argument("--seed", type=int)
    c.add_argument("--duration", type=int, help="simulated ms")
    c.add_argument("--mode", choices=("des", "realtime"), default="des")
    c.add_argument("--speed", type=float, default=1.0, help="realtime pacing factor")
    c.add_argument("--out", help="output directory (default: current)")
    c.set_defaults(func=cmd_run)

    c = sub.add_parser("report", help="metrics from an NDJSON trace")
    c.add_argument("trace")
    c.add_argument("--format", choices=("table", "json", "csv"), default="table")
    c.add_argument("--out", help="output file (default: stdout)")
    c.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"artdna: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
