"""Reproduction of the worked examples from bundled configurations.

Each example variant pairs a bundled scenario with the verdicts it must show.
Expected values are addressed by dotted paths into the report dictionary;
``circles.<label>.<field>`` selects the row of one circle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Any

from .config import ScenarioConfig, parse_config
from .errors import ExampleAssertionFailed
from .report import Report, run_scenario

__all__ = ["EXAMPLES", "Variant", "load_example_config", "check_report", "run_example"]

# the holonomy survey is not a worked verdict and would dominate runtime
HARNESS_SECTIONS = ("stratum", "circles", "dualize", "reduction")

ZERO4 = ["0", "0", "0", "0"]


@dataclass(frozen=True)
class Variant:
    key: str
    config: str
    expect: dict[str, Any]


EXAMPLES: dict[str, list[Variant]] = {
    "4.1": [
        Variant(
            "i",
            "example_4_1_i.json",
            {
                "stratum.r_sharp": 1,
                "stratum.kernel": ["1", "0", "0", "0"],
                "dualize.dual_flux": ["1", "0", "0", "0", "0", "0"],
                "circles.phi.converts": False,
                "circles.theta.converts": False,
                "circles.phi.single_dual_flux": ["1", "0", "0", "0", "0", "2"],
                "circles.theta.single_dual_flux": ["1", "0", "0", "0", "1", "0"],
                "circles.phi.bem_row": {"theta": "0"},
                "circles.theta.bem_row": {"phi": "0"},
            },
        ),
        Variant(
            "ii",
            "example_4_1_ii.json",
            {
                "stratum.r_sharp": 0,
                "stratum.kernel": ZERO4,
                "dualize.dual_flux_zero": True,
                "dualize.dual_flux": ZERO4 + ["0", "0"],
                "circles.phi.bem_row": {"theta": "0"},
            },
        ),
    ],
    "4.2": [
        Variant(
            "",
            "example_4_2.json",
            {
                "stratum.r_sharp": 1,
                "stratum.kernel": ["1"],
                "circles.theta.converts": False,
                "dualize.dual_flux": ["1", "0"],
                "reduction.verdict": "IrreducibleSurvives",
                "reduction.restricted_r_sharp": 1,
            },
        )
    ],
    "4.3": [
        Variant(
            "",
            "example_4_3.json",
            {
                "stratum.r": 1,
                "stratum.r_sharp": 0,
                "stratum.kernel": ["0", "0"],
                "circles.y1.converts": True,
                "circles.theta.converts": False,
                "dualize.dual_flux_zero": True,
            },
        )
    ],
    "4.4": [
        Variant(
            "a",
            "example_4_4_a.json",
            {
                "stratum.r": 1,
                "stratum.r_sharp": 1,
                "stratum.kernel": ["1", "0", "0", "0", "0"],
                "circles.phi.converts": False,
                "circles.theta.converts": False,
            },
        ),
        Variant(
            "b",
            "example_4_4_b.json",
            {
                "stratum.r": 1,
                "stratum.r_sharp": 0,
                "stratum.kernel": ["0", "0", "0", "0", "0"],
                "circles.phi.converts": True,
                "circles.theta.converts": False,
                "reduction.verdict": "Indeterminate",
                "reduction.vanished": False,
            },
        ),
        Variant(
            "c",
            "example_4_4_c.json",
            {
                "stratum.r": 1,
                "stratum.r_sharp": 0,
                "circles.theta.converts": True,
                "circles.phi.converts": False,
                "dualize.dual_flux_zero": True,
            },
        ),
    ],
}


def load_example_config(filename: str) -> ScenarioConfig:
    text = resources.files("hflux").joinpath("data").joinpath(filename).read_text()
    return parse_config(json.loads(text))


def _lookup(doc: dict, path: str) -> Any:
    parts = path.split(".")
    node: Any = doc
    i = 0
    while i < len(parts):
        part = parts[i]
        if part == "circles" and isinstance(node, dict):
            rows = {row["label"]: row for row in node.get("circles") or []}
            node = rows.get(parts[i + 1], KeyError)
            i += 2
            continue
        if not isinstance(node, dict) or part not in node:
            return KeyError
        node = node[part]
        i += 1
    return node


def check_report(report: Report, expect: dict[str, Any]) -> dict[str, tuple[Any, Any]]:
    """``{path: (expected, computed)}`` for every mismatching verdict."""
    doc = report.as_dict()
    diff = {}
    for path, want in expect.items():
        got = _lookup(doc, path)
        if got is KeyError:
            diff[path] = (want, "<missing>")
        elif got != want:
            diff[path] = (want, got)
    return diff


def run_example(example_id: str, timing: bool = False) -> list[Report]:
    """Run every variant of one example and assert its verdicts."""
    if example_id not in EXAMPLES:
        raise ExampleAssertionFailed(example_id, {"id": (sorted(EXAMPLES), example_id)})
    reports, problems = [], {}
    for v in EXAMPLES[example_id]:
        rep = run_scenario(load_example_config(v.config), HARNESS_SECTIONS, timing=timing)
        reports.append(rep)
        tag = f"{example_id}({v.key})" if v.key else example_id
        problems.update({f"{tag} {k}": d for k, d in check_report(rep, v.expect).items()})
    if problems:
        raise ExampleAssertionFailed(example_id, problems)
    return reports
