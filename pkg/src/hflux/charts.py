"""Explicit coordinate charts for the numeric tiers.

A chart is a product of blocks, each either flat (identity metric on a box)
or a hyperbolic upper-half-space patch with metric ``y^-2 (du^2 + ... + dy^2)``
where ``y`` is the block's last coordinate. Only local geometry is modelled:
genus, Betti numbers and the global topology of the factors never enter here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np
import sympy as sp

from .cohomology import MixedFluxClass, ProductSpec, Torus

__all__ = ["Block", "Chart", "class_covector"]

HYPERBOLIC_BOX = (-0.5, 0.5)
HYPERBOLIC_HEIGHT = (1.0, 2.0)


def _length(value: Fraction, unit: str) -> float:
    return float(value) * (math.pi if unit == "pi" else 1.0)


@dataclass(frozen=True)
class Block:
    start: int
    dim: int
    hyperbolic: bool
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    @classmethod
    def flat(cls, start: int, upper: tuple[float, ...]) -> "Block":
        return cls(start, len(upper), False, (0.0,) * len(upper), tuple(upper))

    @classmethod
    def hyperbolic_patch(cls, start: int, dim: int) -> "Block":
        lo = (HYPERBOLIC_BOX[0],) * (dim - 1) + (HYPERBOLIC_HEIGHT[0],)
        hi = (HYPERBOLIC_BOX[1],) * (dim - 1) + (HYPERBOLIC_HEIGHT[1],)
        return cls(start, dim, True, lo, hi)

    @property
    def indices(self) -> range:
        return range(self.start, self.start + self.dim)

    @property
    def height(self) -> int:
        return self.start + self.dim - 1


class Chart:
    """Product chart; block 0 must be the 2-dimensional Sigma block."""

    def __init__(self, blocks: list[Block]):
        self.blocks = tuple(blocks)
        if not self.blocks or self.blocks[0].dim != 2 or self.blocks[0].start != 0:
            raise ValueError("first block must be the 2-dimensional Sigma block")
        pos = 0
        for b in self.blocks:
            if b.start != pos:
                raise ValueError("blocks must tile the coordinates contiguously")
            pos += b.dim
        self.dim = pos
        self.lower = np.array([x for b in self.blocks for x in b.lower])
        self.upper = np.array([x for b in self.blocks for x in b.upper])

    @classmethod
    def from_spec(cls, spec: ProductSpec) -> "Chart":
        blocks = []
        sigma = spec.sigma
        blocks.append(Block.hyperbolic_patch(0, 2) if sigma.hyperbolic else Block.flat(0, (1.0, 1.0)))
        start = 2
        for f in spec.n_factors:
            if f.dim == 0:
                continue
            if isinstance(f, Torus):
                blocks.append(Block.flat(start, tuple(_length(c, f.length_unit) for c in f.circumferences)))
            elif f.hyperbolic and f.dim >= 2:
                blocks.append(Block.hyperbolic_patch(start, f.dim))
            else:
                blocks.append(Block.flat(start, (1.0,) * f.dim))
            start += f.dim
        t = spec.torus
        if t.k:
            blocks.append(Block.flat(start, tuple(_length(c, t.length_unit) for c in t.circumferences)))
        return cls(blocks)

    @classmethod
    def flat(cls, dim: int) -> "Chart":
        return cls([Block.flat(0, (1.0, 1.0))] + ([Block.flat(2, (1.0,) * (dim - 2))] if dim > 2 else []))

    @property
    def sigma_indices(self) -> range:
        return range(0, 2)

    @property
    def is_flat(self) -> bool:
        return not any(b.hyperbolic for b in self.blocks)

    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def margin(self, point) -> float:
        p = np.asarray(point, dtype=float)
        return float(min(np.min(p - self.lower), np.min(self.upper - p)))

    def _conformal(self, point) -> np.ndarray:
        """Per-coordinate metric factor ``g_ii`` (the metric is diagonal)."""
        p = np.asarray(point, dtype=float)
        diag = np.ones(self.dim)
        for b in self.blocks:
            if b.hyperbolic:
                diag[b.start : b.start + b.dim] = p[b.height] ** -2
        return diag

    def metric(self, point) -> np.ndarray:
        return np.diag(self._conformal(point))

    def inverse_metric(self, point) -> np.ndarray:
        return np.diag(1.0 / self._conformal(point))

    def sqrt_g_sigma(self, point) -> float:
        d = self._conformal(point)
        return float(math.sqrt(d[0] * d[1]))

    def frame(self, point) -> np.ndarray:
        """Columns are an orthonormal frame ``e_a`` in coordinate components."""
        return np.diag(self._conformal(point) ** -0.5)

    def christoffel(self, point) -> np.ndarray:
        """Levi-Civita symbols ``G[k, i, j] = Gamma^k_{ij}`` in closed form.

        Each hyperbolic block is conformally flat with factor ``exp(2 phi)``,
        ``phi = -log y``, so ``Gamma^k_ij = d_ik phi_j + d_jk phi_i - d_ij phi_k``.
        """
        p = np.asarray(point, dtype=float)
        gam = np.zeros((self.dim,) * 3)
        for b in self.blocks:
            if not b.hyperbolic:
                continue
            h = b.height
            dphi = -1.0 / p[h]
            for i in b.indices:
                gam[i, i, h] += dphi
                gam[i, h, i] += dphi
                gam[h, i, i] -= dphi
        return gam

    def symbols(self) -> tuple[sp.Symbol, ...]:
        return sp.symbols(f"x0:{self.dim}", real=True)

    def metric_expr(self) -> sp.Matrix:
        xs = self.symbols()
        diag = [sp.Integer(1)] * self.dim
        for b in self.blocks:
            if b.hyperbolic:
                for i in b.indices:
                    diag[i] = xs[b.height] ** -2
        return sp.diag(*diag)

    def sqrt_g_sigma_expr(self) -> sp.Expr:
        g = self.metric_expr()
        return sp.sqrt(g[0, 0] * g[1, 1])


def class_covector(cls: MixedFluxClass, spec: ProductSpec) -> np.ndarray:
    """Chart-local constant covector standing in for ``beta``.

    Torus directions map to their coordinate differentials. A harmonic basis
    element ``j`` of any other factor of dimension ``d`` is represented by
    ``dy^(j mod d)``; if that folding cancels a nonzero gamma-block, the first
    nonzero coefficient alone is used so the representative stays nonzero.
    """
    tau = np.zeros(2 + spec.dim_n + spec.k)
    slot, coord = 0, 2
    for f in spec.n_factors:
        coeffs = cls.gamma[slot : slot + f.b1]
        if isinstance(f, Torus):
            for m, c in enumerate(coeffs):
                tau[coord + m] = float(c)
        elif f.dim:
            block = [Fraction(0)] * f.dim
            for j, c in enumerate(coeffs):
                block[j % f.dim] += c
            if not any(block) and any(coeffs):
                j0 = next(j for j, c in enumerate(coeffs) if c)
                block[j0 % f.dim] = coeffs[j0]
            tau[coord : coord + f.dim] = [float(c) for c in block]
        slot += f.b1
        coord += f.dim
    tau[coord:] = [float(c) for c in cls.c]
    return tau
