from __future__ import annotations

import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from hflux.cohomology import Generic, MixedFluxClass, ProductSpec, Surface, Torus

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def random_fraction(rng: np.random.Generator, zero_prob: float = 0.3) -> Fraction:
    if rng.random() < zero_prob:
        return Fraction(0)
    return Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 6)))


def random_spec(rng: np.random.Generator, k_max: int = 4, parallel: bool = True, k: int | None = None) -> ProductSpec:
    """Random Sigma x N x T^k; with ``parallel=False`` N has no parallel 1-forms."""
    sigma = Surface(int(rng.integers(1, 4)))
    n_factors = []
    for _ in range(int(rng.integers(0, 3))):
        kind = rng.integers(0, 3 if parallel else 2)
        if kind == 0:
            n_factors.append(Surface(int(rng.integers(2, 4))))
        elif kind == 1:
            b1 = int(rng.integers(0, 4))
            mask = frozenset(i + 1 for i in range(b1) if parallel and rng.random() < 0.3)
            n_factors.append(Generic(int(rng.integers(1, 5)), b1, mask))
        else:
            n_factors.append(Torus(int(rng.integers(1, 3))))
    kk = int(rng.integers(0, k_max + 1)) if k is None else k
    return ProductSpec(sigma, tuple(n_factors), Torus(kk))


def random_class(rng: np.random.Generator, spec: ProductSpec) -> MixedFluxClass:
    beta = [random_fraction(rng) for _ in range(spec.beta_length)]
    return MixedFluxClass(tuple(beta[: spec.b1_n]), tuple(beta[spec.b1_n :]), spec.sigma.genus)


fractions_st = st.builds(Fraction, st.integers(-20, 20), st.integers(1, 7))


@st.composite
def spec_and_class(draw, parallel: bool = True, k_max: int = 4):
    seed = draw(st.integers(0, 2**32 - 1))
    spec = random_spec(np.random.default_rng(seed), k_max=k_max, parallel=parallel)
    beta = draw(st.lists(fractions_st, min_size=spec.beta_length, max_size=spec.beta_length))
    cls = MixedFluxClass(tuple(beta[: spec.b1_n]), tuple(beta[spec.b1_n :]), spec.sigma.genus)
    return spec, cls


class Criterion:
    """Times one acceptance criterion and records a pass/fail line."""

    def __init__(self, number: int, title: str, limit: float):
        self.number, self.title, self.limit = number, title, limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        ok = exc_type is None and elapsed < self.limit
        detail = f"{elapsed:.2f}s (limit {self.limit:g}s)"
        if exc_type is not None:
            detail += f"; {exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        line = f"criterion {self.number} [{self.title}]: {'PASS' if ok else 'FAIL'} {detail}"
        _ACCEPTANCE.append((line, ok, detail))
        print(line)
        if exc_type is None:
            assert elapsed < self.limit, f"criterion {self.number} took {elapsed:.2f}s, limit {self.limit}s"
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line, _, _ in sorted(_ACCEPTANCE, key=lambda r: int(r[0].split()[1])):
        terminalreporter.write_line(line)
