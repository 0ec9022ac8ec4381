from __future__ import annotations

import numpy as np
import pytest
from conftest import random_class, random_spec
from hypothesis import given, settings
from hypothesis import strategies as st

from hflux.charts import Chart, class_covector
from hflux.cohomology import Generic, ProductSpec, Surface, Torus, decompose
from hflux.errors import ConfigInvalid, NumericFailure
from hflux.fields import (
    BackgroundFields,
    ChartGrid,
    FluxComponents,
    derivative,
    exterior_derivative,
    realize_background,
)


def test_derivative_is_fourth_order():
    errs = []
    for n in (17, 33, 65):
        x = np.linspace(0, 1, n)
        errs.append(np.max(np.abs(derivative(np.sin(3 * x), x[1] - x[0], 0) - 3 * np.cos(3 * x))))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 3.5)


def test_exterior_derivative_of_polynomial_potential():
    grid = ChartGrid.box(Chart.flat(3), (0, 1), 9)
    x, y = grid.points()[..., 0], grid.points()[..., 1]
    B = np.zeros((3, 3) + grid.shape)
    B[1, 2], B[2, 1] = x * y, -x * y
    H = exterior_derivative(B, grid)
    # d(xy dy^dt) = y dx^dy^dt
    np.testing.assert_allclose(H[0, 1, 2], y, atol=1e-12)
    np.testing.assert_allclose(H[1, 2, 0], y, atol=1e-12)
    np.testing.assert_allclose(H[1, 0, 2], -y, atol=1e-12)


def test_background_validation():
    grid = ChartGrid.box(Chart.flat(3), (0, 1), 5)
    eye = np.broadcast_to(np.eye(3)[..., None, None], (3, 3) + grid.shape).copy()
    zero = np.zeros_like(eye)
    BackgroundFields((2, 0, 1), eye, zero, grid)
    bad = eye.copy()
    bad[0, 1] = 0.5
    with pytest.raises(NumericFailure, match="symmetric"):
        BackgroundFields((2, 0, 1), bad, zero, grid)
    with pytest.raises(NumericFailure, match="positive"):
        BackgroundFields((2, 0, 1), -eye, zero, grid)
    sym = zero.copy()
    sym[0, 1] = sym[1, 0] = 1.0
    with pytest.raises(NumericFailure, match="antisymmetric"):
        BackgroundFields((2, 0, 1), eye, sym, grid)
    torus_grid = ChartGrid.box(Chart.flat(3), (0, 2), 5)
    with pytest.raises(ConfigInvalid, match="torus"):
        BackgroundFields((2, 0, 1), eye, zero, torus_grid)


def test_realized_flux_is_sqrt_g_times_beta():
    spec = ProductSpec(Surface(2), (Generic(3, 1),), Torus(1))
    cls = decompose(["3/2", -2], spec)
    bg = realize_background(cls, spec, points=33)
    H = bg.flux()
    i = bg.grid.shape[0] // 2
    y = bg.grid.points()[i, i, 1]
    tau = class_covector(cls, spec)
    # hyperbolic Sigma: sqrt(g) = y^-2
    np.testing.assert_allclose(H[0, 1, 2:, i, i], tau[2:] / y**2, rtol=1e-8)
    assert FluxComponents.from_background(bg).pure_bidegree_defect() <= 1e-12


def test_class_covector_folding_keeps_nonzero_representative():
    spec = ProductSpec(Surface(1), (Surface(2),), Torus(0))
    # entries 1 and 3 fold onto the same coordinate and cancel
    tau = class_covector(decompose([1, 0, -1, 0], spec), spec)
    assert np.any(tau[2:] != 0)
    tau = class_covector(decompose([0, 0, 0, 0], spec), spec)
    assert np.all(tau == 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_field_tier_integrates_to_the_class(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng)
    cls = random_class(rng, spec)
    bg = realize_background(cls, spec, points=9)
    chart = Chart.from_spec(spec)
    sg = np.array([chart.sqrt_g_sigma(p) for p in bg.grid.points().reshape(-1, chart.dim)]).reshape(bg.grid.shape)
    got = FluxComponents.from_background(bg, cls).coefficients(sg)
    np.testing.assert_allclose(got[2:], class_covector(cls, spec)[2:], atol=1e-8)
    flags = bg.product_flags
    assert all(flags.values())
