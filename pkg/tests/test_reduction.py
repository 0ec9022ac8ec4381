from __future__ import annotations

from fractions import Fraction

import numpy as np
from conftest import random_class, random_spec
from hypothesis import given, settings
from hypothesis import strategies as st

from hflux.cohomology import Generic, ProductSpec, Surface, Torus, decompose, r_sharp
from hflux.reduction import Verdict, pullback_flux, reduced_spec, reduced_verdict

HYP = [Surface(2), Generic(3, 1), Torus(1)]
MIXED = ProductSpec.from_factors([Surface(2), Surface(2), Torus(1, names=("phi",)), Torus(1, names=("theta",))])


def test_pullback_examples():
    spec = ProductSpec.from_factors(HYP)
    keep = pullback_flux(decompose([1, 0], spec), spec, 1)
    assert keep.restricted_class == (1,) and not keep.vanished
    gone = pullback_flux(decompose([0, 5], spec), spec, 1)
    assert gone.restricted_class == (0,) and gone.vanished
    assert pullback_flux(decompose([0, 0], spec), spec, 1).vanished


def test_verdict_examples():
    spec = ProductSpec.from_factors(HYP)
    rep = reduced_verdict(decompose([1, 0], spec), spec, 1)
    assert rep.verdict is Verdict.IRREDUCIBLE_SURVIVES and rep.restricted_r_sharp == 1
    rep = reduced_verdict(decompose([0, 5], spec), spec, 1)
    assert rep.verdict is Verdict.REDUCES_TO_LEVI_CIVITA and rep.vanished
    rep = reduced_verdict(decompose([0, 0], spec), spec, 1)
    assert rep.verdict is Verdict.REDUCES_TO_LEVI_CIVITA


def test_mixed_example_is_indeterminate():
    rep = reduced_verdict(decompose([0, 0, 0, 0, 1, 0], MIXED), MIXED, "theta")
    assert rep.verdict is Verdict.INDETERMINATE
    assert rep.restricted_class == (0, 0, 0, 0, 1) and not rep.vanished


def test_reduced_spec_keeps_labels():
    small = reduced_spec(MIXED, "phi")
    assert [c.label for c in small.circles] == ["theta"]
    assert small.b1_n == 4
    small = reduced_spec(MIXED, "theta")
    assert [c.label for c in small.circles] == ["phi"] and small.k == 0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_collapses_commute(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, k=int(rng.integers(2, 5)))
    cls = random_class(rng, spec)
    a, b = spec.circles[-1], spec.circles[-2]

    def collapse(first, second):
        beta = pullback_flux(cls, spec, first).restricted_class
        small = reduced_spec(spec, first)
        c2 = small.circle(second.label)
        return beta[: c2.slot] + beta[c2.slot + 1 :]

    assert collapse(a, b) == collapse(b, a)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_levi_civita_verdict_implies_r_sharp_zero(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, parallel=False, k=1)
    cls = random_class(rng, spec)
    rep = reduced_verdict(cls, spec, 1)
    assert rep.verdict is not Verdict.INDETERMINATE
    if rep.verdict is Verdict.REDUCES_TO_LEVI_CIVITA:
        assert r_sharp(cls, spec).r_sharp == 0
        assert rep.vanished
    else:
        assert rep.restricted_r_sharp == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pullback_is_linear(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, k=int(rng.integers(1, 4)))
    x, y = random_class(rng, spec), random_class(rng, spec)
    a, b = Fraction(int(rng.integers(-5, 6)), 3), Fraction(int(rng.integers(-5, 6)), 2)
    c = spec.circles[int(rng.integers(len(spec.circles)))]
    lhs = pullback_flux(x.scaled(a) + y.scaled(b), spec, c).restricted_class
    rx = pullback_flux(x, spec, c).restricted_class
    ry = pullback_flux(y, spec, c).restricted_class
    assert lhs == tuple(a * u + b * v for u, v in zip(rx, ry))
