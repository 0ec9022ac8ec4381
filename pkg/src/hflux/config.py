"""Scenario configuration: JSON documents validated against a published schema."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import jsonschema

from .cohomology import Generic, MixedFluxClass, ProductSpec, Surface, Torus, decompose, to_fraction
from .errors import ConfigInvalid

__all__ = ["SCHEMA", "Tolerances", "HolonomyOptions", "ScenarioConfig", "load_config", "parse_config"]

_RATIONAL = {"oneOf": [{"type": "integer"}, {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"}]}
_CIRCLE_REF = {"oneOf": [{"type": "integer", "minimum": 1}, {"type": "string", "minLength": 1}]}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "hflux scenario",
    "type": "object",
    "additionalProperties": False,
    "required": ["factors", "beta"],
    "properties": {
        "schema_version": {"const": "1"},
        "name": {"type": "string"},
        "factors": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["kind", "genus"],
                        "properties": {"kind": {"const": "surface"}, "genus": {"type": "integer", "minimum": 1}},
                    },
                    {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["kind", "dim", "b1"],
                        "properties": {
                            "kind": {"const": "generic"},
                            "dim": {"type": "integer", "minimum": 1},
                            "b1": {"type": "integer", "minimum": 0},
                            "p1_mask": {"type": "array", "items": {"type": "integer", "minimum": 1}, "uniqueItems": True},
                        },
                    },
                    {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["kind", "k"],
                        "properties": {
                            "kind": {"const": "torus"},
                            "k": {"type": "integer", "minimum": 0},
                            "circumferences": {"type": "array", "items": _RATIONAL},
                            "names": {"type": "array", "items": {"type": "string", "minLength": 1}},
                            "length_unit": {"enum": ["", "pi"]},
                        },
                    },
                ]
            },
        },
        "beta": {"type": "array", "items": _RATIONAL},
        "circles": {"type": "array", "items": _RATIONAL},
        "dualize": {"type": "array", "items": _CIRCLE_REF},
        "reduce": _CIRCLE_REF,
        "holonomy": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "grid": {"type": "integer", "minimum": 1},
                "sample_count": {"type": "integer", "minimum": 1},
                "step": {"type": "number", "exclusiveMinimum": 0},
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "zero": {"type": "number", "exclusiveMinimum": 0},
                "oracle_rel": {"type": "number", "exclusiveMinimum": 0},
                "degenerate": {"type": "number", "exclusiveMinimum": 0},
                "grid_points": {"type": "integer", "minimum": 5},
            },
        },
    },
}


@dataclass(frozen=True)
class Tolerances:
    zero: float = 1e-10
    oracle_rel: float = 1e-8
    degenerate: float = 1e-12
    grid_points: int = 33


@dataclass(frozen=True)
class HolonomyOptions:
    """``grid`` (if set) places an ``n x n`` lattice of samples over the Sigma
    plane; otherwise ``sample_count`` seeded random interior points are used."""

    grid: int | None = None
    sample_count: int = 5
    step: float = 1e-4
    tolerance: float = 1e-7
    seed: int = 0


@dataclass(frozen=True)
class ScenarioConfig:
    spec: ProductSpec
    flux: MixedFluxClass
    name: str = "scenario"
    dualize: tuple = ()
    reduce: int | str | None = None
    holonomy: HolonomyOptions | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)


def _path(error: jsonschema.ValidationError) -> str:
    out = ""
    for part in error.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def _factor(raw: dict, path: str):
    kind = raw["kind"]
    try:
        if kind == "surface":
            return Surface(raw["genus"])
        if kind == "generic":
            return Generic(raw["dim"], raw["b1"], frozenset(raw.get("p1_mask", ())))
        return Torus(
            raw["k"],
            tuple(to_fraction(c) for c in raw.get("circumferences", ())),
            tuple(raw.get("names", ())),
            raw.get("length_unit", ""),
        )
    except ConfigInvalid as exc:
        raise ConfigInvalid(str(exc), path) from exc


def parse_config(raw: dict) -> ScenarioConfig:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigInvalid(err.message, _path(err))

    factors = [_factor(f, f"factors[{i}]") for i, f in enumerate(raw["factors"])]
    spec = ProductSpec.from_factors(factors)
    if "circles" in raw:
        circ = tuple(to_fraction(c) for c in raw["circles"])
        if len(circ) != spec.k:
            raise ConfigInvalid(f"expected {spec.k} circumferences for T^k, got {len(circ)}", "circles")
        t = spec.torus
        if t.circumferences != (Fraction(1),) * t.k and t.circumferences != circ:
            raise ConfigInvalid("T^k circumferences given twice with different values", "circles")
        spec = ProductSpec(spec.sigma, spec.n_factors, Torus(t.k, circ, t.names, t.length_unit))

    try:
        flux = decompose(raw["beta"], spec)
    except ConfigInvalid as exc:
        raise ConfigInvalid(str(exc).split(": ", 1)[-1], "beta") from exc

    dualize = tuple(raw.get("dualize", ()))
    for i, ref in enumerate(dualize):
        try:
            spec.circle(ref)
        except ConfigInvalid as exc:
            raise ConfigInvalid(str(exc), f"dualize[{i}]") from exc
    labels = [spec.circle(r).label for r in dualize]
    if len(set(labels)) != len(labels):
        raise ConfigInvalid("dualize indices must be distinct", "dualize")

    reduce = raw.get("reduce")
    if reduce is not None:
        try:
            spec.circle(reduce)
        except ConfigInvalid as exc:
            raise ConfigInvalid(str(exc), "reduce") from exc

    hol = HolonomyOptions(**raw["holonomy"]) if "holonomy" in raw else None
    tol = Tolerances(**raw.get("tolerances", {}))
    return ScenarioConfig(spec, flux, raw.get("name", "scenario"), dualize, reduce, hol, tol)


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"malformed JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigInvalid("config must be a JSON object")
    return parse_config(raw)
