"""Scenario orchestration and machine-readable reports.

Every report field is the output of one engine operation; this module only
sequences the calls and serializes the results. Exact quantities are written
as ``"p/q"`` strings, floating ones as 17-significant-digit strings paired with
the tolerance they were judged against.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

import numpy as np

from . import buscher, cohomology, holonomy, reduction
from .charts import Chart, class_covector
from .config import ScenarioConfig
from .errors import FluxError, HypothesisViolation, Unclassified
from .fields import FluxComponents, realize_background

__all__ = ["SECTIONS", "Report", "run_scenario", "render", "exact", "approx"]

SCHEMA_VERSION = "1"
SECTIONS = ("stratum", "circles", "dualize", "reduction", "holonomy")


def exact(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def approx(value: float, tolerance: float) -> dict[str, str]:
    return {"value": f"{float(value):.17g}", "tolerance": f"{float(tolerance):.17g}"}


def _exact_vec(values: Iterable) -> list[str]:
    return [exact(v) for v in values]


@dataclass
class Report:
    name: str
    beta: tuple[Fraction, ...]
    circle_labels: list[str]
    stratum: dict[str, Any] | None = None
    circles: list[dict[str, Any]] | None = None
    dualize: dict[str, Any] | None = None
    reduction: dict[str, Any] | None = None
    holonomy: dict[str, Any] | None = None
    timing: dict[str, float] | None = None
    raw: dict[str, Any] = field(default_factory=dict, repr=False)

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.name,
            "beta": _exact_vec(self.beta),
            "circles_declared": self.circle_labels,
        }
        for key in SECTIONS:
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.timing is not None:
            out["timing"] = {k: f"{v:.6f}" for k, v in self.timing.items()}
        return out


def render(obj: Report | list[Report] | dict) -> str:
    if isinstance(obj, Report):
        obj = obj.as_dict()
    elif isinstance(obj, list):
        obj = [r.as_dict() if isinstance(r, Report) else r for r in obj]
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _stratum(cfg: ScenarioConfig) -> tuple[dict, cohomology.StratumVerdict]:
    v = cohomology.r_sharp(cfg.flux, cfg.spec)
    kernel, caveat = cohomology.irreducible_kernel(cfg.flux, cfg.spec)
    return (
        {
            "r": v.r,
            "dim_K": v.dim_K,
            "r_sharp": v.r_sharp,
            "in_P1": v.in_P1,
            "kernel": _exact_vec(kernel),
            "kernel_caveat": caveat,
            "kernel_caveat_reported": v.kernel_caveat,
        },
        v,
    )


def _circle_rows(cfg: ScenarioConfig, bg, tol: float) -> list[dict]:
    spec, cls = cfg.spec, cfg.flux
    flux_exact = FluxComponents(cls)
    flux_field = FluxComponents.from_background(bg, cls)
    rows = []
    for c in spec.circles:
        bem_row, bem_field = {}, {}
        for other in spec.circles:
            if other.label == c.label:
                continue
            bem_row[other.label] = exact(buscher.bem_obstruction(flux_exact, c.coord, other.coord))
            val = buscher.bem_obstruction(flux_field, c.coord, other.coord)
            bem_field[other.label] = approx(np.max(np.abs(val)), tol)
        try:
            case, note = buscher.classify_bem_case(cls, spec, c), None
        except (HypothesisViolation, Unclassified) as exc:
            case, note = None, str(exc)
        _, _, single = buscher.compose_dualities(bg, cls, [c], spec, tol)
        rows.append(
            {
                "label": c.label,
                "torus_index": c.torus_index,
                "fiberwise_integral": exact(buscher.fiberwise_integral(cls, spec, c)),
                "length_unit": c.length_unit,
                "bem_row": bem_row,
                "bem_row_field": bem_field,
                "bem_case": case,
                "bem_case_note": note,
                "single_dual_flux": _exact_vec(single.beta),
                "converts": single.is_zero,
            }
        )
    return rows


def _dualize(cfg: ScenarioConfig, bg, tol: float) -> dict:
    dual_bg, frame, dual = buscher.compose_dualities(bg, cfg.flux, cfg.dualize, cfg.spec, tol)
    H = dual_bg.flux()
    dualized_coords = [cfg.spec.circle(c).coord for c in cfg.dualize]
    theta_flux = max((float(np.max(np.abs(H[..., t, :, :]))) for t in dualized_coords), default=0.0)
    return {
        "circles": list(frame.dualized),
        "dual_flux": _exact_vec(dual.beta),
        "dual_flux_zero": dual.is_zero,
        "ledger": [
            {
                "circle": e.circle,
                "components": [
                    {"index": m, "max_abs": approx(np.max(np.abs(v)), tol)} for m, v in sorted(e.components.items())
                ],
            }
            for e in frame.ledger
        ],
        "chern_flags": dict(frame.chern_flags),
        "dual_theta_flux_max": approx(theta_flux, tol),
    }


def _reduction(cfg: ScenarioConfig) -> dict:
    rep = reduction.reduced_verdict(cfg.flux, cfg.spec, cfg.reduce)
    return {
        "circle": rep.circle,
        "restricted_class": _exact_vec(rep.restricted_class),
        "vanished": rep.vanished,
        "verdict": rep.verdict.value,
        "restricted_r_sharp": rep.restricted_r_sharp,
    }


def holonomy_samples(chart: Chart, opts) -> list[np.ndarray]:
    if opts.grid:
        span = chart.upper - chart.lower
        lo, hi = chart.lower + 0.1 * span, chart.upper - 0.1 * span
        xs = np.linspace(lo[0], hi[0], opts.grid) if opts.grid > 1 else [chart.center()[0]]
        ys = np.linspace(lo[1], hi[1], opts.grid) if opts.grid > 1 else [chart.center()[1]]
        pts = []
        for x in xs:
            for y in ys:
                p = chart.center().copy()
                p[0], p[1] = x, y
                pts.append(p)
        return pts
    return holonomy.sample_points(chart, opts.sample_count, opts.seed)


def _holonomy(cfg: ScenarioConfig, r_sharp: int) -> dict:
    opts = cfg.holonomy
    chart = Chart.from_spec(cfg.spec)
    T = holonomy.TorsionField.from_covector(class_covector(cfg.flux, cfg.spec))
    pts = holonomy_samples(chart, opts)
    res = holonomy.check_lower_bound(chart, T, pts, r_sharp, opts.tolerance, opts.step)
    return {
        "chart_dim": chart.dim,
        "sample_count": len(pts),
        "ranks": res.ranks,
        "min_offdiag_rank": res.min_rank,
        "max_offdiag_rank": res.max_rank,
        "r_sharp": r_sharp,
        "bound_satisfied": res.max_rank >= r_sharp,
        "oracle_ranks": res.oracle_ranks,
        "violation_confirmed": res.confirmed,
        "rank_tolerance": f"{opts.tolerance:.17g}",
        "step": f"{opts.step:.17g}",
    }


def run_scenario(
    cfg: ScenarioConfig, sections: Iterable[str] | None = None, timing: bool = False
) -> Report:
    """Run the requested report sections (all by default) for one scenario."""
    wanted = set(SECTIONS if sections is None else sections)
    unknown = wanted - set(SECTIONS)
    if unknown:
        raise ValueError(f"unknown sections {sorted(unknown)}")
    tol = cfg.tolerances.zero
    clock: dict[str, float] = {}
    rep = Report(cfg.name, cfg.flux.beta, [c.label for c in cfg.spec.circles])

    def timed(name, fn, *args):
        t0 = time.perf_counter()
        try:
            return fn(*args)
        except FluxError as exc:
            exc.args = (f"scenario {cfg.name!r}, {name}: {exc}",)
            raise
        finally:
            clock[name] = time.perf_counter() - t0

    stratum, verdict = timed("stratum", _stratum, cfg)
    if "stratum" in wanted:
        rep.stratum = stratum
    bg = None
    if wanted & {"circles", "dualize"}:
        bg = timed("realize", lambda: realize_background(cfg.flux, cfg.spec, points=cfg.tolerances.grid_points))
    if "circles" in wanted:
        rep.circles = timed("circles", _circle_rows, cfg, bg, tol)
    if "dualize" in wanted:
        rep.dualize = timed("dualize", _dualize, cfg, bg, tol)
    if "reduction" in wanted and cfg.reduce is not None:
        rep.reduction = timed("reduction", _reduction, cfg)
    if "holonomy" in wanted and cfg.holonomy is not None:
        rep.holonomy = timed("holonomy", _holonomy, cfg, verdict.r_sharp)
    if timing:
        rep.timing = clock
    return rep
