"""Restriction of the torsion to the slice ``theta = const`` of one circle."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .cohomology import (
    MixedFluxClass,
    ProductSpec,
    Torus,
    check_consistent,
    r_sharp,
)

__all__ = ["Verdict", "ReductionReport", "reduced_spec", "pullback_flux", "reduced_verdict"]


class Verdict(str, enum.Enum):
    IRREDUCIBLE_SURVIVES = "IrreducibleSurvives"
    REDUCES_TO_LEVI_CIVITA = "ReducesToLeviCivita"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class ReductionReport:
    circle: str
    restricted_class: tuple[Fraction, ...]
    vanished: bool
    verdict: Verdict | None = None
    restricted_r_sharp: int | None = None


def _with_explicit_names(spec: ProductSpec) -> ProductSpec:
    labels = iter(c.label for c in spec.circles)

    def named(f):
        if not isinstance(f, Torus):
            return f
        return Torus(f.k, f.circumferences, tuple(next(labels) for _ in range(f.k)), f.length_unit)

    n_factors = tuple(named(f) for f in spec.n_factors)
    return ProductSpec(spec.sigma, n_factors, named(spec.torus))


def _drop(t: Torus, m: int) -> Torus:
    keep = [i for i in range(t.k) if i != m]
    return Torus(
        t.k - 1,
        tuple(t.circumferences[i] for i in keep),
        tuple(t.names[i] for i in keep),
        t.length_unit,
    )


def reduced_spec(spec: ProductSpec, circle) -> ProductSpec:
    """The product left after collapsing one circle factor.

    Surviving circles keep their labels.
    """
    c = spec.circle(circle)
    spec = _with_explicit_names(spec)
    if c.torus_index is not None:
        return ProductSpec(spec.sigma, spec.n_factors, _drop(spec.torus, c.torus_index - 1))
    slot, n_factors = 0, []
    for f in spec.n_factors:
        width = f.b1
        if isinstance(f, Torus) and slot <= c.slot < slot + width:
            f = _drop(f, c.slot - slot)
        n_factors.append(f)
        slot += width
    return ProductSpec(spec.sigma, tuple(n_factors), spec.torus)


def pullback_flux(cls: MixedFluxClass, spec: ProductSpec, circle) -> ReductionReport:
    """``iota^* T`` for the inclusion at fixed value of ``circle``.

    ``iota^* dtheta = 0`` for the collapsed circle and every other coefficient
    restricts to itself, so restriction just drops one entry of beta. The
    restricted class lives over the basis of the reduced product.
    """
    check_consistent(cls, spec)
    c = spec.circle(circle)
    restricted = cls.beta[: c.slot] + cls.beta[c.slot + 1 :]
    return ReductionReport(c.label, restricted, vanished=not any(restricted))


def reduced_verdict(cls: MixedFluxClass, spec: ProductSpec, circle) -> ReductionReport:
    """Holonomy verdict for the connection restricted to the slice.

    Decisive only when ``k = 1``, ``P_1(N) = {0}`` and the collapsed circle is
    the torus circle; otherwise the verdict is ``Indeterminate`` and only the
    pullback data is meaningful.
    """
    partial = pullback_flux(cls, spec, circle)
    c = spec.circle(circle)
    small = reduced_spec(spec, c)
    restricted = MixedFluxClass(
        partial.restricted_class[: small.b1_n], partial.restricted_class[small.b1_n :], cls.sigma_genus
    )
    restricted_rs = r_sharp(restricted, small).r_sharp
    decisive = spec.k == 1 and not spec.n_parallel and c.torus_index == 1
    if not decisive:
        verdict = Verdict.INDETERMINATE
    else:
        v = r_sharp(cls, spec)
        if v.r_sharp == 1:
            verdict = Verdict.IRREDUCIBLE_SURVIVES
        else:
            # r# = 0: either beta = c dtheta (torsion dies on the slice) or no torsion at all
            verdict = Verdict.REDUCES_TO_LEVI_CIVITA
    return ReductionReport(
        partial.circle, partial.restricted_class, partial.vanished, verdict, restricted_rs
    )
