"""Command-line front end: config + overrides in, CSV tables out.

Every CSV starts with '#'-prefixed manifest comments recording the config
source, the exact command line and the seed, so outputs are reproducible
from those three alone (no timestamps). On any failure the exit status is
non-zero and partially written files are removed.
"""

from __future__ import annotations

import argparse
import os
import sys

from .params import ConfigError
from .scenarios import (
    DEFAULT_CONFIG,
    SCENARIO_NAMES,
    ScenarioSettings,
    apply_setting,
    config_from_sections,
    run_scenario,
    run_sweep,
    sections_from_text,
)


def _add_common(sub):
    sub.add_argument("--config", default=None, help="config file (defaults built in)")
    sub.add_argument("--seed", type=int, default=None, help="RNG seed (required with noise)")
    sub.add_argument("--out", default=None, help="output path prefix")
    sub.add_argument("--workers", type=int, default=1)
    sub.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config key (section.key) or scenario key")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="injectsim",
        description="Phase modulation of a gain-switched laser by optical injection",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name in SCENARIO_NAMES:
        sub = subs.add_parser(name)
        _add_common(sub)
        if name == "simulate":
            sub.add_argument("--t-end-ns", type=float, default=None)
            sub.add_argument("--noise", action="store_true")
            sub.add_argument("--thermal", action="store_true")
    sweep = subs.add_parser("sweep")
    _add_common(sweep)
    sweep.add_argument("--axis", required=True, help="config key (section.key) or scenario key")
    sweep.add_argument("--values", required=True, help="comma-separated numbers")
    sweep.add_argument("--base", required=True, choices=SCENARIO_NAMES)
    return parser


def _load_inputs(args):
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
        config_name = args.config
    else:
        text = DEFAULT_CONFIG
        config_name = "builtin-defaults"
    sections = sections_from_text(text)
    settings = ScenarioSettings()
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set needs KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        key = key.strip()
        if "." in key:
            section, skey = key.split(".", 1)
            if section not in sections:
                raise ConfigError(f"unknown config section '{section}'")
            sections[section][skey] = value.strip()
        else:
            settings = apply_setting(settings, key, value.strip())
    if args.command == "simulate":
        if args.t_end_ns is not None:
            settings = apply_setting(settings, "sim_t_end_ns", str(args.t_end_ns))
        if args.noise:
            settings = apply_setting(settings, "sim_noise", "true")
        if args.thermal:
            settings = apply_setting(settings, "sim_thermal", "true")
    return sections, settings, config_name


def _write_tables(tables, prefix, manifest):
    os.makedirs(os.path.dirname(prefix) or ".", exist_ok=True)
    written = []
    try:
        for name, (header, rows) in tables.items():
            path = f"{prefix}_{name}.csv"
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                for line in manifest:
                    fh.write(f"# {line}\n")
                fh.write(",".join(header) + "\n")
                for row in rows:
                    fh.write(",".join(_fmt(v) for v in row) + "\n")
            written.append(path)
    except BaseException:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise
    return written


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    if isinstance(v, str):
        return v
    return format(float(v), ".9g")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    prefix = args.out or os.path.join("out", args.command)
    written = []
    try:
        sections, settings, config_name = _load_inputs(args)
        manifest = [
            f"config={config_name}",
            "command=injectsim " + " ".join(argv),
            f"seed={args.seed if args.seed is not None else 'none'}",
        ]
        if args.command == "sweep":
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                raise ConfigError(f"--values must be numbers: {args.values!r}") from None
            tables = run_sweep(args.axis, values, args.base, sections, settings,
                               seed=args.seed, workers=args.workers)
        else:
            cfg = config_from_sections(sections)
            tables = run_scenario(args.command, cfg, settings, seed=args.seed,
                                  workers=args.workers)
        written = _write_tables(tables, prefix, manifest)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"injectsim: error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
