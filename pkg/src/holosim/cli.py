"""``holosim`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical guard
(sampling or effective-length) error, 4 oracle-check failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .configio import apply_overrides, parse_config
from .errors import ConfigError, DivergentEffectiveLength, SamplingError, UnsupportedGeometryError
from .grid import make_grid
from .oracle import oracle_check
from .output import emit_map_pgm, emit_profile_csv, metrics_payload, write_json
from .scenarios import builtin_scenarios, builtin_sweeps, get_scenario, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE = 4

FORMATS = ("csv", "pgm", "json")
_FORMAT_ALIASES = {"json-metrics": "json"}


def _formats(text: str) -> tuple[str, ...]:
    chosen = []
    for item in (t.strip() for t in text.split(",") if t.strip()):
        item = _FORMAT_ALIASES.get(item, item)
        if item not in FORMATS:
            raise ConfigError(f"unknown output format {item!r}; choose from {', '.join(FORMATS)}")
        if item not in chosen:
            chosen.append(item)
    if not chosen:
        raise ConfigError("--format needs at least one of " + ", ".join(FORMATS))
    return tuple(chosen)


def _load(target: str):
    path = Path(target)
    if path.is_file():
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        return parse_config(text, default_name=path.stem)
    try:
        return get_scenario(target)
    except KeyError:
        raise ConfigError(f"{target!r} is neither a config file nor a builtin scenario "
                          "(see `holosim list-scenarios`)") from None


def _write_outputs(result, out: Path, formats) -> list[Path]:
    name = result.config.name
    written = []
    if "csv" in formats:
        written.append(emit_profile_csv(result, out / f"{name}.csv"))
    if "pgm" in formats:
        if result.coincidence_map is None:
            print(f"{name}: one-photon result has no coincidence map; skipping pgm", file=sys.stderr)
        else:
            for component in ("total", "interference"):
                written.extend(emit_map_pgm(result.coincidence_map, out / f"{name}_{component}.pgm", component))
    if "json" in formats:
        written.append(write_json(out / f"{name}_metrics.json", metrics_payload(result)))
    return written


def _run_one(config, out: Path, formats):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = run(config)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return result, _write_outputs(result, out, formats)


def _summary(result) -> str:
    m = result.metrics
    parts = [result.config.name]
    for key in ("visibility", "imaged_period", "oracle_l2", "talbot_length"):
        value = m.get(key)
        if value is not None:
            parts.append(f"{key}={value:.6g}")
    return "  ".join(parts)


def cmd_list(args) -> int:
    sweeps = builtin_sweeps()
    members = {c.name for configs in sweeps.values() for c in configs}
    for config in builtin_scenarios():
        if config.name not in members:
            print(f"{config.name:24s} {config.mode:11s} {config.variant}")
    for name, configs in sweeps.items():
        print(f"{name:24s} sweep       {len(configs)} run(s): {configs[0].name} .. {configs[-1].name}")
    return EXIT_OK


def _prepare_out(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    return out


def cmd_run(args) -> int:
    config = apply_overrides(_load(args.target), args.set)
    out = _prepare_out(args.out)
    result, written = _run_one(config, out, _formats(args.format))
    print(_summary(result))
    for path in written:
        print(f"  wrote {path}")
    return EXIT_OK


def _workers() -> int:
    raw = os.environ.get("HOLOSIM_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"HOLOSIM_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"HOLOSIM_THREADS must be a positive integer, got {raw!r}")
    return value


def cmd_sweep(args) -> int:
    sweeps = builtin_sweeps()
    if args.name not in sweeps:
        raise ConfigError(f"unknown sweep {args.name!r}; available: {', '.join(sweeps)}")
    configs = [apply_overrides(c, args.set) for c in sweeps[args.name]]
    out = _prepare_out(args.out)
    formats = _formats(args.format)
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        outcomes = list(pool.map(lambda c: _run_one(c, out, formats), configs))
    rows = []
    for result, _ in outcomes:
        print(_summary(result))
        rows.append(metrics_payload(result))
    write_json(out / f"{args.name}_sweep.json", {"sweep": args.name, "runs": rows})
    return EXIT_OK


def cmd_oracle(args) -> int:
    grid = make_grid(n_points=args.n_points)
    report = oracle_check(grid)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK if report["passed"] else EXIT_ORACLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holosim", description="1-D paraxial one- and two-photon holography")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list-scenarios", help="list builtin scenarios and sweeps").set_defaults(func=cmd_list)

    def add_output_args(p, default_format):
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--format", default=default_format, help="comma list of csv, pgm, json")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key, e.g. theta=3.14159 or geometry.z_i=30cm")

    p_run = sub.add_parser("run", help="run a builtin scenario or an INI config file")
    p_run.add_argument("target", help="scenario name or path to a config file")
    add_output_args(p_run, "csv,json")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run every member of a builtin sweep")
    p_sweep.add_argument("name")
    add_output_args(p_sweep, "csv,json")
    p_sweep.set_defaults(func=cmd_sweep)

    p_oracle = sub.add_parser("oracle-check", help="compare engines against the closed forms")
    p_oracle.add_argument("--n-points", type=int, default=2048)
    p_oracle.add_argument("--out", help="also write the JSON report here")
    p_oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SamplingError, DivergentEffectiveLength, UnsupportedGeometryError) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
