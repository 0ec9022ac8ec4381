"""Command-line entry point: ``hflux <verb> --config scenario.json``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import parse_config
from .errors import ConfigInvalid, ExampleAssertionFailed, FluxError, NumericFailure
from .harness import EXAMPLES, run_example
from .report import render, run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_EXAMPLE, EXIT_NUMERIC = 0, 2, 3, 4

VERB_SECTIONS = {
    "rsharp": ("stratum",),
    "kernel": ("stratum",),
    "tdualize": ("dualize",),
    "reduce": ("reduction",),
    "check-bem": ("circles",),
    "verify-holonomy": ("stratum", "holonomy"),
}


def _circle_ref(text: str) -> int | str:
    return int(text) if text.isdigit() else text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hflux", description="H-flux survival under T-duality on product manifolds.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="write the JSON report here instead of stdout")
    common.add_argument("--seed", type=int, help="seed for randomized sampling")
    common.add_argument("--timing", action="store_true", help="add wall-clock timings (breaks byte-identical output)")
    sub = parser.add_subparsers(dest="verb", required=True)

    def scenario(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--config", type=Path, required=True, help="scenario JSON file")
        return p

    scenario("rsharp", "stratum verdict r, dim K, r#")
    scenario("kernel", "irreducible kernel and its caveat")
    p = scenario("tdualize", "compose Buscher dualities")
    p.add_argument("--circles", help="comma-separated circles to dualize, overriding the config")
    p = scenario("reduce", "restrict the torsion to a circle slice")
    p.add_argument("--circle", help="circle to collapse, overriding the config")
    scenario("check-bem", "per-circle BEM rows, fiberwise integrals and cases")
    p = scenario("verify-holonomy", "off-diagonal curvature rank survey against r#")
    p.add_argument("--samples", type=int, help="number of random sample points")
    p.add_argument("--grid", type=int, help="n x n lattice of sample points on the Sigma plane")
    p.add_argument("--step", type=float, help="finite-difference step")
    p.add_argument("--tolerance", type=float, help="relative singular-value threshold")
    p = sub.add_parser("run-example", parents=[common], help="reproduce a worked example and assert its verdicts")
    p.add_argument("example", choices=sorted(EXAMPLES))
    return parser


def _overrides(args: argparse.Namespace, raw: dict) -> dict:
    raw = dict(raw)
    if getattr(args, "circles", None):
        raw["dualize"] = [_circle_ref(c.strip()) for c in args.circles.split(",") if c.strip()]
    if getattr(args, "circle", None):
        raw["reduce"] = _circle_ref(args.circle)
    if args.verb == "verify-holonomy":
        hol = dict(raw.get("holonomy", {}))
        for flag, key in (("samples", "sample_count"), ("grid", "grid"), ("step", "step"), ("tolerance", "tolerance")):
            value = getattr(args, flag)
            if value is not None:
                hol[key] = value
        if args.seed is not None:
            hol["seed"] = args.seed
        raw["holonomy"] = hol
    return raw


def _run(args: argparse.Namespace) -> str:
    if args.verb == "run-example":
        return render(run_example(args.example, timing=args.timing))
    try:
        raw = json.loads(args.config.read_text())
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"malformed JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigInvalid("config must be a JSON object")
    cfg = parse_config(_overrides(args, raw))
    if args.verb == "reduce" and cfg.reduce is None:
        raise ConfigInvalid("no circle to reduce: set 'reduce' or pass --circle", "reduce")
    report = run_scenario(cfg, VERB_SECTIONS[args.verb], timing=args.timing)
    doc = report.as_dict()
    if args.verb == "kernel":
        s = doc["stratum"]
        doc["stratum"] = {"kernel": s["kernel"], "kernel_caveat": s["kernel_caveat"]}
    elif args.verb == "verify-holonomy":
        doc.pop("stratum")
    return render(doc)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = _run(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ExampleAssertionFailed as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_EXAMPLE
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FluxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
