"""Command-line driver.

    pencilbeam run --sweep epsilon=20,16,8,4,2 --out results/
    pencilbeam validate --config scenario.toml

Every scenario key is also a flag (``--sector-side-L 150``); flags override
the config file, which overrides the built-in defaults.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path
from typing import Any

from .config import ConfigError, ScenarioConfig, field_kind
from .pipeline import POLICIES, SWEEP_PARAMS, ExperimentSpec, run_experiment

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("pencilbeam")


def flag_name(key: str) -> str:
    return "--" + key.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pencilbeam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate and write result CSVs")
    check = sub.add_parser("validate", help="check a configuration without running it")
    for p in (run, check):
        p.add_argument("--config", type=Path, help="TOML scenario/experiment file")
        p.add_argument("--seed", type=int, help="base seed of all random streams")
        p.add_argument("--runs", type=int, help="independent placements per scenario")
        p.add_argument("--policy", help=f"comma-separated subset of {','.join(POLICIES)}")
        p.add_argument("--sweep", help="PARAM=V1,V2,... with PARAM in " + ", ".join(SWEEP_PARAMS))
        p.add_argument("--out", type=Path, help="output directory")
        group = p.add_argument_group("scenario keys")
        for f in fields(ScenarioConfig):
            if f.name in ("seed", "n_runs"):
                continue
            kind = field_kind(f)
            group.add_argument(flag_name(f.name), dest=f"cfg_{f.name}", metavar=kind.__name__.upper(),
                               help=f"(default: {f.default})")
    run.add_argument("--threads", type=int, help="kernel threads (results do not depend on it)")
    run.add_argument("--per-run-grids", action="store_true", help="also write one grid CSV per run")
    run.add_argument("-q", "--quiet", action="store_true")
    return parser


def load_file(path: Path | None) -> tuple[dict[str, Any], dict[str, Any]]:
    if path is None:
        return {}, {}
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    experiment = doc.pop("experiment", {})
    scenario = doc.pop("scenario", {})
    scenario.update(doc)
    return scenario, experiment


def parse_sweep(text: str) -> tuple[str, tuple[float, ...]]:
    name, sep, values = text.partition("=")
    if not sep:
        raise ConfigError([f"sweep must look like PARAM=V1,V2 (got {text!r})"])
    try:
        parsed = tuple(float(v) for v in values.split(",") if v.strip())
    except ValueError:
        raise ConfigError([f"sweep values must be numbers (got {values!r})"]) from None
    return name.strip(), parsed


def make_spec(args: argparse.Namespace) -> ExperimentSpec:
    scenario, experiment = load_file(args.config)
    for f in fields(ScenarioConfig):
        value = getattr(args, f"cfg_{f.name}", None)
        if value is not None:
            scenario[f.name] = value
    if args.seed is not None:
        scenario["seed"] = args.seed
    if args.runs is not None:
        scenario["n_runs"] = args.runs
    cfg = ScenarioConfig.from_dict(scenario)

    policies = experiment.get("policies", list(POLICIES))
    if args.policy:
        policies = [p.strip() for p in args.policy.split(",") if p.strip()]
    sweep = None
    if "sweep" in experiment:
        s = experiment["sweep"]
        sweep = (s["parameter"], tuple(float(v) for v in s["values"]))
    if args.sweep:
        sweep = parse_sweep(args.sweep)
    out = args.out if args.out is not None else experiment.get("out")
    threads = getattr(args, "threads", None) or experiment.get("threads", 1)
    spec = ExperimentSpec(cfg, tuple(policies), sweep, Path(out) if out else None,
                          int(threads), bool(getattr(args, "per_run_grids", False)))
    errors = spec.validate()
    if errors:
        raise ConfigError(errors)
    return spec


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if getattr(args, "quiet", False) else logging.INFO,
                        format="%(message)s")
    try:
        spec = make_spec(args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print("ok")
        return EXIT_OK

    if spec.out is None:
        print("config error: --out is required for run", file=sys.stderr)
        return EXIT_CONFIG
    try:
        spec.out.mkdir(parents=True, exist_ok=True)
        probe = spec.out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: output directory not writable: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        run_experiment(spec, progress=log.info)
    except Exception as exc:  # noqa: BLE001
        log.debug("run failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    log.info("results written to %s", spec.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
