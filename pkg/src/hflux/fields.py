"""Sampled background fields ``(G, B)`` on a chart grid.

Component arrays have shape ``(D, D, *grid.shape)``. The grid samples a subset
of the chart coordinates (``ChartGrid.axes``); fields are independent of every
coordinate that is not sampled, and torus coordinates are never sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .charts import Chart, class_covector
from .cohomology import MixedFluxClass, ProductSpec
from .errors import ConfigInvalid, NumericFailure

__all__ = [
    "ChartGrid",
    "BackgroundFields",
    "FluxComponents",
    "derivative",
    "exterior_derivative",
    "realize_background",
    "product_background",
]

ZERO_TOL = 1e-10
DEFAULT_POINTS = 33


@dataclass(frozen=True)
class ChartGrid:
    """Uniform tensor-product grid over some chart coordinates.

    ``axes`` maps a coordinate index to its 1-D sample points; ``base`` holds
    the value of every coordinate at which unsampled ones are frozen.
    """

    axes: dict[int, np.ndarray]
    base: np.ndarray

    def __post_init__(self):
        axes = {int(c): np.asarray(v, dtype=float) for c, v in sorted(self.axes.items())}
        for c, v in axes.items():
            if v.ndim != 1 or len(v) < 5:
                raise ConfigInvalid(f"axis {c} needs at least 5 points for 4th-order differences")
            steps = np.diff(v)
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
                raise ConfigInvalid(f"axis {c} is not uniform")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))

    @classmethod
    def box(cls, chart: Chart, coords: Sequence[int], points: int = DEFAULT_POINTS) -> "ChartGrid":
        axes = {c: np.linspace(chart.lower[c], chart.upper[c], points) for c in coords}
        return cls(axes, chart.center())

    @property
    def coords(self) -> tuple[int, ...]:
        return tuple(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.axes.values())

    def spacing(self, coord: int) -> float:
        v = self.axes[coord]
        return float(v[1] - v[0])

    def points(self) -> np.ndarray:
        """All sample points, shape ``(*shape, D)``."""
        pts = np.broadcast_to(self.base, self.shape + self.base.shape).copy()
        mesh = np.meshgrid(*self.axes.values(), indexing="ij")
        for c, m in zip(self.axes, mesh):
            pts[..., c] = m
        return pts

    def axis_of(self, coord: int) -> int | None:
        """Array axis (counting from the grid dimensions) of a coordinate."""
        return self.coords.index(coord) if coord in self.axes else None


def derivative(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Fourth-order finite difference along ``axis`` (one-sided at the ends)."""
    f = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = f.shape[0]
    if n < 5:
        raise NumericFailure("need at least 5 samples for a 4th-order derivative")
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h)
    d[-2] = (3.0 * f[-1] + 10.0 * f[-2] - 18.0 * f[-3] + 6.0 * f[-4] - f[-5]) / (12.0 * h)
    d[-1] = (25.0 * f[-1] - 48.0 * f[-2] + 36.0 * f[-3] - 16.0 * f[-4] + 3.0 * f[-5]) / (12.0 * h)
    return np.moveaxis(d, 0, axis)


def exterior_derivative(B: np.ndarray, grid: ChartGrid) -> np.ndarray:
    """``H_abc = d_a B_bc + d_b B_ca + d_c B_ab`` for sampled 2-form components."""
    dim = B.shape[0]
    partial = np.zeros((dim,) + B.shape)
    for c in grid.coords:
        partial[c] = derivative(B, grid.spacing(c), 2 + grid.axis_of(c))
    return (
        partial
        + np.transpose(partial, (1, 2, 0) + tuple(range(3, partial.ndim)))
        + np.transpose(partial, (2, 0, 1) + tuple(range(3, partial.ndim)))
    )


@dataclass(frozen=True)
class BackgroundFields:
    """Metric and B-field on ``Sigma x N x T^k`` sampled on ``grid``.

    ``dims`` is ``(2, dim N, k)``. ``circle_coords`` lists the chart coordinates
    of the flat circles that may be dualized, in the order of ``circle_labels``.
    """

    dims: tuple[int, int, int]
    G: np.ndarray
    B: np.ndarray
    grid: ChartGrid
    circle_labels: tuple[str, ...] = ()
    circle_coords: tuple[int, ...] = ()
    tol: float = ZERO_TOL
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        dim = sum(self.dims)
        if not self.circle_coords:
            k = self.dims[2]
            object.__setattr__(self, "circle_coords", tuple(range(dim - k, dim)))
            object.__setattr__(self, "circle_labels", tuple(f"theta{i + 1}" for i in range(k)))
        if len(self.circle_labels) != len(self.circle_coords):
            raise ConfigInvalid("circle_labels and circle_coords differ in length")
        if self.validate:
            self._check()

    @property
    def dim(self) -> int:
        return sum(self.dims)

    @property
    def torus_coords(self) -> tuple[int, ...]:
        return tuple(range(self.dim - self.dims[2], self.dim))

    def _check(self) -> None:
        shape = (self.dim, self.dim) + self.grid.shape
        if self.G.shape != shape or self.B.shape != shape:
            raise ConfigInvalid(f"component arrays must have shape {shape}")
        if set(self.torus_coords) & set(self.grid.coords):
            raise ConfigInvalid("fields may not depend on torus coordinates")
        scale = 1.0 + float(np.max(np.abs(self.G)))
        if np.max(np.abs(self.G - self.G.swapaxes(0, 1))) > self.tol * scale:
            raise NumericFailure("G is not symmetric")
        if np.max(np.abs(self.B + self.B.swapaxes(0, 1))) > self.tol * (1.0 + float(np.max(np.abs(self.B)))):
            raise NumericFailure("B is not antisymmetric")
        try:
            np.linalg.cholesky(self.pointwise(self.G))
        except np.linalg.LinAlgError as exc:
            raise NumericFailure("G is not positive definite at every sample") from exc

    @staticmethod
    def pointwise(arr: np.ndarray) -> np.ndarray:
        """Move the two component axes last, giving a stack of matrices."""
        return np.moveaxis(arr, (0, 1), (-2, -1))

    def circle_coord(self, circle: int | str) -> int:
        if isinstance(circle, str):
            if circle not in self.circle_labels:
                raise ConfigInvalid(f"unknown circle {circle!r}")
            return self.circle_coords[self.circle_labels.index(circle)]
        if not 1 <= circle <= self.dims[2]:
            raise ConfigInvalid(f"torus circle index {circle} outside 1..{self.dims[2]}")
        return self.torus_coords[circle - 1]

    def circle_label(self, coord: int) -> str:
        return self.circle_labels[self.circle_coords.index(coord)]

    @property
    def product_flags(self) -> dict[str, bool]:
        """Per circle: ``G_tt == 1`` and ``G_mu t == 0`` on every sample."""
        out = {}
        for label, t in zip(self.circle_labels, self.circle_coords):
            others = [m for m in range(self.dim) if m != t]
            ok = np.max(np.abs(self.G[t, t] - 1.0)) <= self.tol and (
                not others or np.max(np.abs(self.G[others, t])) <= self.tol
            )
            out[label] = bool(ok)
        return out

    def flux(self) -> np.ndarray:
        return exterior_derivative(self.B, self.grid)

    def replace(self, **changes) -> "BackgroundFields":
        return replace(self, **changes)


@dataclass(frozen=True)
class FluxComponents:
    """Cohomological class plus, optionally, sampled components ``H_abc``.

    ``circumferences`` (floats) are the circle lengths used by quadratures,
    keyed like ``circle_coords`` of the background the field tier came from.
    """

    cohomological: MixedFluxClass | None
    field_tier: np.ndarray | None = None
    grid: ChartGrid | None = None
    circle_coords: tuple[int, ...] = ()
    circumferences: tuple[float, ...] = ()

    @classmethod
    def from_background(
        cls, bg: BackgroundFields, cohomological: MixedFluxClass | None = None, circumferences=None
    ) -> "FluxComponents":
        circ = tuple(circumferences) if circumferences is not None else (1.0,) * len(bg.circle_coords)
        return cls(cohomological, bg.flux(), bg.grid, bg.circle_coords, circ)

    def pure_bidegree_defect(self, sigma: Sequence[int] = (0, 1)) -> float:
        """Largest component not carrying exactly two Sigma indices."""
        if self.field_tier is None:
            return 0.0
        dim = self.field_tier.shape[0]
        is_sigma = np.zeros(dim, dtype=bool)
        is_sigma[list(sigma)] = True
        count = is_sigma[:, None, None].astype(int) + is_sigma[None, :, None] + is_sigma[None, None, :]
        bad = count != 2
        if not bad.any():
            return 0.0
        return float(np.max(np.abs(self.field_tier[bad])))

    def coefficients(self, sqrt_g_sigma: np.ndarray) -> np.ndarray:
        """Recover the chart covector of beta from ``H_12m = sqrt(g_Sigma) beta_m``."""
        h = self.field_tier[0, 1]
        return np.array([float(np.mean(h[m] / sqrt_g_sigma)) for m in range(h.shape[0])])


def _potential(chart: Chart, points: np.ndarray) -> np.ndarray:
    """``A(x)`` with ``d_1 A = sqrt(g_Sigma)``, normalised to vanish at the left edge."""
    x0 = chart.lower[0]
    if chart.blocks[0].hyperbolic:
        return (points[..., 0] - x0) / points[..., 1] ** 2
    return points[..., 0] - x0


def realize_background(
    cls: MixedFluxClass,
    spec: ProductSpec,
    chart: Chart | None = None,
    points: int = DEFAULT_POINTS,
    b_torus: dict[tuple[int, int], Fraction] | None = None,
) -> BackgroundFields:
    """Chart-local product background carrying ``H = vol_Sigma ^ beta``.

    The potential is ``B_{2 m} = beta_m A(x)``, ``B_{1 m} = 0`` for every
    ``M_2`` coordinate ``m``, so ``H_{12 m} = sqrt(g_Sigma) beta_m``. The grid
    samples the Sigma plane; the ``M_2`` metric is frozen at the chart
    centre, which keeps the background an exact product. ``b_torus`` adds
    constant ``B_{theta_i theta_j}`` entries (pure gauge) keyed by 1-based
    torus indices.
    """
    chart = chart or Chart.from_spec(spec)
    grid = ChartGrid.box(chart, (0, 1), points)
    pts = grid.points()
    dim = chart.dim
    metric_diag = np.stack([np.diag(chart.metric(p)) for p in pts.reshape(-1, dim)])
    G = np.zeros((dim, dim) + grid.shape)
    for i in range(dim):
        G[i, i] = metric_diag[:, i].reshape(grid.shape)
    tau = class_covector(cls, spec)
    A = _potential(chart, pts)
    B = np.zeros_like(G)
    for m in range(2, dim):
        B[1, m] = tau[m] * A
        B[m, 1] = -B[1, m]
    torus0 = dim - spec.k
    for (i, j), val in (b_torus or {}).items():
        a, b = torus0 + i - 1, torus0 + j - 1
        B[a, b] = float(val)
        B[b, a] = -float(val)
    circles = spec.circles
    return BackgroundFields(
        dims=(2, spec.dim_n, spec.k),
        G=G,
        B=B,
        grid=grid,
        circle_labels=tuple(c.label for c in circles),
        circle_coords=tuple(c.coord for c in circles),
    )


def product_background(
    rng: np.random.Generator,
    dim_n: int = 2,
    k: int = 2,
    points: int = 9,
    sample_n: bool = True,
) -> BackgroundFields:
    """Random smooth product background for property checks.

    ``G`` is block-diagonal (Sigma and N blocks position-dependent and positive
    definite, torus block the identity); ``B`` has random smooth components
    over the sampled coordinates, with constant torus-torus entries.
    """
    dim = 2 + dim_n + k
    coords = [0, 1] + ([2] if sample_n and dim_n else [])
    lower, upper = np.zeros(dim), np.ones(dim)
    axes = {c: np.linspace(lower[c], upper[c], points) for c in coords}
    grid = ChartGrid(axes, 0.5 * (lower + upper))
    pts = grid.points()

    def smooth_field():
        w = rng.normal(size=dim)
        ph = rng.uniform(0, 2 * np.pi)
        amp = rng.normal()
        return amp * np.sin(pts @ w + ph)

    G = np.zeros((dim, dim) + grid.shape)
    for lo, hi in ((0, 2), (2, 2 + dim_n)):
        n = hi - lo
        if n == 0:
            continue
        # L L^T + n I keeps the block uniformly positive definite
        L = np.stack([np.stack([0.3 * smooth_field() for _ in range(n)]) for _ in range(n)])
        block = np.einsum("ik...,jk...->ij...", L, L) + n * np.eye(n).reshape((n, n) + (1,) * len(grid.shape))
        G[lo:hi, lo:hi] = block
    for t in range(2 + dim_n, dim):
        G[t, t] = 1.0
    B = np.zeros_like(G)
    for a in range(dim):
        for b in range(a + 1, dim):
            if a >= 2 + dim_n and b >= 2 + dim_n:
                val = rng.normal() * np.ones(grid.shape)
            else:
                val = smooth_field()
            B[a, b], B[b, a] = val, -val
    return BackgroundFields((2, dim_n, k), G, B, grid)
