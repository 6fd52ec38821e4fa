"""Command-line front end.

    hetnetsim run --scenario F [--set k=v]... [--out DIR] [--trace-users] [--trace-picos]
    hetnetsim sweep --scenario F [--param policy.t_activate] --from A --to B [--step S]
    hetnetsim preset NAME [--out DIR] [--seed N]   /   preset --list
    hetnetsim dump-topology --scenario F [--out FILE]

Exit codes: 0 success, 1 configuration/validation problem, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .config import (
    ConfigError,
    ParseError,
    apply_overrides,
    parse_scenario,
)
from .engine import (
    build_geometry,
    run_scenario,
    sweep_rows,
    write_histogram_csv,
    write_pico_trace_csv,
    write_slot_csv,
    write_sweep_csv,
    write_user_trace_csv,
    write_users_csv,
)
from .presets import DEFAULT_SEED, PRESETS, UnknownPreset, run_preset


class _Parser(argparse.ArgumentParser):
    """argparse that exits with the validation code on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_raw_scenario(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed scenario document: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ParseError(
            f"scenario document must be a mapping, got {type(data).__name__}"
        )
    return data


def _scenario_from_args(args):
    data = _load_raw_scenario(args.scenario)
    data = apply_overrides(data, args.set or [])
    return parse_scenario(data)


def _cmd_run(args) -> int:
    scenario = _scenario_from_args(args)
    result = run_scenario(
        scenario, trace_users=args.trace_users, trace_picos=args.trace_picos
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_slot_csv(result, out / "slots.csv")
    write_users_csv(result, out / "users.csv")
    write_histogram_csv(result, out / "histogram.csv")
    (out / "topology.json").write_text(result.topology.to_json() + "\n")
    if args.trace_users:
        write_user_trace_csv(result, out / "user_trace.csv")
    if args.trace_picos:
        write_pico_trace_csv(result, out / "pico_trace.csv")
    print(
        f"ee_mean={result.ee_mean!r} capacity_mean={result.capacity_mean!r} "
        f"power_mean={result.power_mean!r}"
    )
    print(f"wrote {out}")
    return 0


def _sweep_values(start: float, stop: float, step: float) -> list[float]:
    if step <= 0:
        raise ParseError("--step must be positive")
    if stop < start:
        raise ParseError("--to must be >= --from")
    values = []
    v = start
    while v <= stop + 1e-9:
        values.append(round(v, 10))
        v += step
    return values


def _cmd_sweep(args) -> int:
    base = _load_raw_scenario(args.scenario)
    base = apply_overrides(base, args.set or [])
    values = _sweep_values(args.sweep_from, args.sweep_to, args.step)
    rows = []
    for v in values:
        point = apply_overrides(base, [f"{args.param}={v!r}"])
        scenario = parse_scenario(point)
        result = run_scenario(scenario)
        row = sweep_rows(result, v)
        rows.append(row)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, out / "sweep.csv")
    print(f"wrote {out / 'sweep.csv'} ({len(rows)} points)")
    return 0


def _cmd_preset(args) -> int:
    if args.list or args.name is None:
        if args.name is None and not args.list:
            print("available presets:", file=sys.stderr)
        for name in sorted(PRESETS):
            desc, _ = PRESETS[name]
            print(f"{name}: {desc}")
        return 0 if args.list else 1
    seed = DEFAULT_SEED if args.seed is None else args.seed
    manifest = run_preset(args.name, args.out, seed=seed)
    print(f"wrote {manifest}")
    return 0


def _cmd_dump_topology(args) -> int:
    scenario = _scenario_from_args(args)
    doc = build_geometry(scenario).to_json()
    if args.out == "-":
        print(doc)
    else:
        Path(args.out).write_text(doc + "\n")
        print(f"wrote {args.out}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="hetnetsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, traces=False):
        p.add_argument("--scenario", required=True, help="scenario YAML file")
        p.add_argument(
            "--set", action="append", metavar="KEY=VALUE",
            help="override a scenario key (repeatable)",
        )
        p.add_argument("--out", default="out", help="output directory")
        if traces:
            p.add_argument("--trace-users", action="store_true")
            p.add_argument("--trace-picos", action="store_true")

    p_run = sub.add_parser("run", help="run one scenario")
    add_common(p_run, traces=True)
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    add_common(p_sweep)
    p_sweep.add_argument(
        "--param", default="policy.t_activate", help="dotted config path to sweep"
    )
    p_sweep.add_argument("--from", dest="sweep_from", type=float, required=True)
    p_sweep.add_argument("--to", dest="sweep_to", type=float, required=True)
    p_sweep.add_argument("--step", type=float, default=1.0)
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_preset = sub.add_parser("preset", help="run a canned experiment family")
    p_preset.add_argument("name", nargs="?", help="preset name")
    p_preset.add_argument("--list", action="store_true", help="list presets")
    p_preset.add_argument("--out", default="out", help="output directory")
    p_preset.add_argument("--seed", type=int, default=None)
    p_preset.set_defaults(fn=_cmd_preset)

    p_dump = sub.add_parser("dump-topology", help="emit the layout as JSON")
    p_dump.add_argument("--scenario", required=True)
    p_dump.add_argument(
        "--set", action="append", metavar="KEY=VALUE", help=argparse.SUPPRESS
    )
    p_dump.add_argument("--out", default="-", help="output file, - for stdout")
    p_dump.set_defaults(fn=_cmd_dump_topology)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (ConfigError, UnknownPreset) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
