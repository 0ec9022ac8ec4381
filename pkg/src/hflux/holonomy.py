"""Numeric lab for the off-diagonal holonomy of ``nabla^C = nabla^LC + T/2``.

The curvature route differentiates the connection coefficients by central
differences (with a Richardson cross-check) and measures, at each sample
point, the rank of the ``V_Sigma x V_M2`` blocks of the curvature operators.
Two independent oracles back it up: the algebraic ``[T_a, T_b]/4`` formula on
flat charts with constant torsion, and a symbolic curvature computed by sympy
for any chart. Loop transport gives an Ambrose-Singer style empirical check.
"""

from __future__ import annotations

import functools
import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import sympy as sp

from .charts import Chart
from .errors import BoundaryTooClose, HolonomyBoundViolation, StepTooLarge

__all__ = [
    "TorsionField",
    "CurvatureSample",
    "SurveyResult",
    "torsion_tensor",
    "connection_coefficients",
    "christoffel_fd",
    "curvature_operators",
    "commutator_operators",
    "symbolic_curvature_operators",
    "oracle_operators",
    "offdiag_rank",
    "offdiag_rank_survey",
    "check_lower_bound",
    "loop_transport",
    "square_loop",
    "loop_generator",
    "sample_points",
]

log = logging.getLogger(__name__)

DEFAULT_STEP = 1e-4
DEFAULT_RANK_TOL = 1e-7
RICHARDSON_TOL = 1e-6
ABS_ZERO = 1e-12


class TorsionField:
    """``T = h vol_{V_Sigma} ^ tau`` with ``tau`` a covector on the ``M_2`` block.

    ``tau`` has one entry per ``M_2`` coordinate and ``h`` is a scalar; both may
    be numbers or sympy expressions in the chart symbols ``x0, x1, ...``.
    """

    def __init__(self, tau: Sequence, h=1):
        self.tau = tuple(sp.sympify(t) for t in tau)
        self.h = sp.sympify(h)

    @classmethod
    def from_covector(cls, covector: Sequence[float]) -> "TorsionField":
        """Harmonic case: ``h = 1`` and a constant covector (Sigma entries ignored)."""
        cov = list(covector)
        return cls([sp.nsimplify(c) if float(c).is_integer() else sp.Float(c) for c in cov[2:]])

    @property
    def is_constant(self) -> bool:
        return not self.h.free_symbols and not any(t.free_symbols for t in self.tau)

    def key(self) -> tuple:
        return (sp.srepr(self.h),) + tuple(sp.srepr(t) for t in self.tau)

    @functools.cached_property
    def _numeric(self):
        syms = sp.symbols(f"x0:{len(self.tau) + 2}", real=True)
        return sp.lambdify(syms, [self.h, *self.tau], "numpy")

    def evaluate(self, point) -> tuple[float, np.ndarray]:
        vals = self._numeric(*np.asarray(point, dtype=float))
        return float(vals[0]), np.array([float(v) for v in vals[1:]])


def _wedge_sigma(scale: float, tau: np.ndarray, dim: int) -> np.ndarray:
    """Components of ``scale * dx0 ^ dx1 ^ (tau_m dx^m)`` for ``m >= 2``."""
    T = np.zeros((dim, dim, dim))
    for m in range(2, dim):
        v = scale * tau[m - 2]
        for (i, j, k), s in (((0, 1, m), 1), ((1, m, 0), 1), ((m, 0, 1), 1),
                             ((1, 0, m), -1), ((0, m, 1), -1), ((m, 1, 0), -1)):
            T[i, j, k] = s * v
    return T


def torsion_tensor(chart: Chart, T: TorsionField, point) -> np.ndarray:
    """Covariant components ``T_ijk`` at ``point``."""
    h, tau = T.evaluate(point)
    return _wedge_sigma(h * chart.sqrt_g_sigma(point), tau, chart.dim)


def _check_margin(chart: Chart, point, margin: float) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    if chart.margin(p) < margin:
        raise BoundaryTooClose(f"point {p.tolist()} is closer than {margin:g} to the chart boundary")
    return p


def _connection(chart: Chart, T: TorsionField, p: np.ndarray) -> np.ndarray:
    contorsion = 0.5 * np.einsum("kl,lij->kij", chart.inverse_metric(p), torsion_tensor(chart, T, p))
    return chart.christoffel(p) + contorsion


def connection_coefficients(chart: Chart, T: TorsionField, point, step: float = DEFAULT_STEP) -> np.ndarray:
    """``Gamma^C[k, i, j]``: coefficient of ``d_k`` in ``nabla^C_{d_i} d_j``."""
    p = _check_margin(chart, point, 2 * step)
    return _connection(chart, T, p)


def christoffel_fd(chart: Chart, point, step: float = DEFAULT_STEP) -> np.ndarray:
    """Levi-Civita symbols from central differences of the metric."""
    p = _check_margin(chart, point, 2 * step)
    dim = chart.dim
    dg = np.empty((dim, dim, dim))
    for a in range(dim):
        e = np.zeros(dim)
        e[a] = step
        dg[a] = (chart.metric(p + e) - chart.metric(p - e)) / (2 * step)
    ginv = chart.inverse_metric(p)
    # Gamma^c_ab = 1/2 g^cd (d_a g_bd + d_b g_ad - d_d g_ab)
    return 0.5 * np.einsum(
        "cd,abd->cab",
        ginv,
        np.transpose(dg, (0, 1, 2)) + np.transpose(dg, (1, 0, 2)) - np.transpose(dg, (1, 2, 0)),
    )


@dataclass
class CurvatureSample:
    point: np.ndarray
    operators: list[np.ndarray]
    pairs: list[tuple[int, int]]
    offdiag_rank: int
    tolerance_used: float
    coordinate_operators: list[np.ndarray] = field(default_factory=list, repr=False)


def _to_frame(chart: Chart, p: np.ndarray, coord_ops: np.ndarray) -> list[np.ndarray]:
    E = chart.frame(p)
    Einv = np.linalg.inv(E)
    # R(e_a, e_b) = E_ca E_db R_cd, then as a matrix in the frame basis
    framed = np.einsum("ca,db,cdij->abij", E, E, coord_ops)
    framed = np.einsum("ki,abij,jl->abkl", Einv, framed, E)
    dim = chart.dim
    return [framed[a, b] for a, b in itertools.combinations(range(dim), 2)]


def _curvature_from(gam: np.ndarray, dgam: np.ndarray) -> np.ndarray:
    """``R[a, b] = d_a Gamma_b - d_b Gamma_a + [Gamma_a, Gamma_b]``.

    ``gam[a]`` is the matrix ``(Gamma_a)^k_j`` and ``dgam[c, a]`` its derivative
    along coordinate ``c``.
    """
    prod = np.einsum("akm,bmj->abkj", gam, gam)
    return dgam - np.transpose(dgam, (1, 0, 2, 3)) + prod - np.transpose(prod, (1, 0, 2, 3))


def _as_matrices(gamma: np.ndarray) -> np.ndarray:
    # Gamma[k, i, j] -> (Gamma_i)^k_j
    return np.transpose(gamma, (1, 0, 2))


def _fd_derivative(chart: Chart, T: TorsionField, p: np.ndarray, h: float) -> np.ndarray:
    dim = chart.dim
    out = np.empty((dim,) * 4)
    for c in range(dim):
        e = np.zeros(dim)
        e[c] = h
        out[c] = (_as_matrices(_connection(chart, T, p + e)) - _as_matrices(_connection(chart, T, p - e))) / (2 * h)
    return out


def offdiag_rank(operators: Sequence[np.ndarray], tol: float = DEFAULT_RANK_TOL) -> int:
    """Dimension of the span of the ``V_Sigma x V_M2`` blocks of ``operators``."""
    if not operators:
        return 0
    stacked = np.stack([op[:2, 2:].ravel() for op in operators])
    s = np.linalg.svd(stacked, compute_uv=False)
    if s.size == 0 or s[0] <= ABS_ZERO:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def curvature_operators(
    chart: Chart,
    T: TorsionField,
    point,
    step: float = DEFAULT_STEP,
    tol: float = DEFAULT_RANK_TOL,
    richardson_tol: float = RICHARDSON_TOL,
) -> CurvatureSample:
    """Curvature operators ``R^C(e_a, e_b)``, ``a < b``, in an orthonormal frame."""
    p = _check_margin(chart, point, 2 * step)
    gam = _as_matrices(_connection(chart, T, p))
    d1 = _fd_derivative(chart, T, p, step)
    d2 = _fd_derivative(chart, T, p, 2 * step)
    gap = float(np.max(np.abs(d1 - d2)))
    if gap > richardson_tol * (1.0 + float(np.max(np.abs(d1)))):
        raise StepTooLarge(f"step {step:g} and {2 * step:g} derivatives differ by {gap:.3g}")
    dgam = (4.0 * d1 - d2) / 3.0
    coord = _curvature_from(gam, dgam)
    ops = _to_frame(chart, p, coord)
    pairs = list(itertools.combinations(range(chart.dim), 2))
    return CurvatureSample(p, ops, pairs, offdiag_rank(ops, tol), tol, [coord[a, b] for a, b in pairs])


def commutator_operators(chart: Chart, T: TorsionField, point) -> list[np.ndarray]:
    """``[T_a, T_b]/4`` with ``(T_a)^i_j = T^i_{aj}``; exact curvature on a flat chart with constant torsion.

    Returned in the orthonormal frame, ordered like :func:`curvature_operators`.
    """
    p = np.asarray(point, dtype=float)
    Tl = torsion_tensor(chart, T, p)
    Tup = np.einsum("il,laj->aij", chart.inverse_metric(p), Tl)
    comm = np.einsum("aik,bkj->abij", Tup, Tup)
    coord = 0.25 * (comm - np.transpose(comm, (1, 0, 2, 3)))
    return _to_frame(chart, p, coord)


_SYMBOLIC_CACHE: dict[tuple, object] = {}


def _symbolic_curvature(chart: Chart, T: TorsionField):
    key = (chart.blocks, T.key())
    if key not in _SYMBOLIC_CACHE:
        _SYMBOLIC_CACHE[key] = _build_symbolic_curvature(chart, T)
    return _SYMBOLIC_CACHE[key]


def _build_symbolic_curvature(chart: Chart, T: TorsionField):
    xs = chart.symbols()
    dim = chart.dim
    g = chart.metric_expr()
    ginv = g.inv()
    gam = [[[sp.S(0)] * dim for _ in range(dim)] for _ in range(dim)]
    for k, i, j in itertools.product(range(dim), repeat=3):
        gam[k][i][j] = sp.simplify(
            sum(ginv[k, l] * (sp.diff(g[l, i], xs[j]) + sp.diff(g[l, j], xs[i]) - sp.diff(g[i, j], xs[l]))
                for l in range(dim)) / 2
        )
    vol = T.h * chart.sqrt_g_sigma_expr()
    Tl = sp.MutableDenseNDimArray.zeros(dim, dim, dim)
    for m in range(2, dim):
        v = vol * T.tau[m - 2]
        for (i, j, k), s in (((0, 1, m), 1), ((1, m, 0), 1), ((m, 0, 1), 1),
                             ((1, 0, m), -1), ((0, m, 1), -1), ((m, 1, 0), -1)):
            Tl[i, j, k] = s * v
    mats = []
    for i in range(dim):
        M = sp.zeros(dim, dim)
        for k, j in itertools.product(range(dim), repeat=2):
            M[k, j] = gam[k][i][j] + sum(ginv[k, l] * Tl[l, i, j] for l in range(dim)) / 2
        mats.append(M)
    ops = []
    for a, b in itertools.combinations(range(dim), 2):
        R = mats[b].diff(xs[a]) - mats[a].diff(xs[b]) + mats[a] * mats[b] - mats[b] * mats[a]
        ops.append(R)
    return sp.lambdify(xs, ops, "numpy")


def symbolic_curvature_operators(chart: Chart, T: TorsionField, point) -> list[np.ndarray]:
    """Curvature from exact symbolic differentiation, in the orthonormal frame."""
    fn = _symbolic_curvature(chart, T)
    p = np.asarray(point, dtype=float)
    dim = chart.dim
    coord = np.zeros((dim, dim, dim, dim))
    for (a, b), R in zip(itertools.combinations(range(dim), 2), fn(*p)):
        coord[a, b] = np.asarray(R, dtype=float)
        coord[b, a] = -coord[a, b]
    return _to_frame(chart, p, coord)


def oracle_operators(chart: Chart, T: TorsionField, point) -> list[np.ndarray]:
    if chart.is_flat and T.is_constant:
        return commutator_operators(chart, T, point)
    return symbolic_curvature_operators(chart, T, point)


def sample_points(chart: Chart, count: int, seed: int = 0, margin: float = 0.05) -> list[np.ndarray]:
    """Deterministic interior sample points (the first one is the chart centre)."""
    rng = np.random.default_rng(seed)
    span = chart.upper - chart.lower
    lo, hi = chart.lower + margin * span, chart.upper - margin * span
    pts = [chart.center()]
    pts += [lo + rng.random(chart.dim) * (hi - lo) for _ in range(count - 1)]
    return pts


@dataclass
class SurveyResult:
    min_rank: int
    max_rank: int
    ranks: list[int]
    tolerance: float
    oracle_ranks: list[int] | None = None
    r_sharp: int | None = None
    violated: bool = False
    confirmed: bool = False


def offdiag_rank_survey(
    chart: Chart,
    T: TorsionField,
    sample_points: Sequence,
    tol: float = DEFAULT_RANK_TOL,
    step: float = DEFAULT_STEP,
) -> SurveyResult:
    if not len(sample_points):
        raise ValueError("at least one sample point is required")
    ranks = [curvature_operators(chart, T, p, step, tol).offdiag_rank for p in sample_points]
    return SurveyResult(min(ranks), max(ranks), ranks, tol)


def check_lower_bound(
    chart: Chart,
    T: TorsionField,
    sample_points: Sequence,
    r_sharp: int,
    tol: float = DEFAULT_RANK_TOL,
    step: float = DEFAULT_STEP,
    raise_on_violation: bool = True,
) -> SurveyResult:
    """Survey ranks and test ``max rank >= r_sharp``.

    A shortfall counts as a violation only if the oracle curvature agrees;
    otherwise it is attributed to finite-difference rank loss and logged.
    """
    result = offdiag_rank_survey(chart, T, sample_points, tol, step)
    result.r_sharp = r_sharp
    if result.max_rank >= r_sharp:
        return result
    result.oracle_ranks = [offdiag_rank(oracle_operators(chart, T, p), tol) for p in sample_points]
    result.violated = True
    result.confirmed = max(result.oracle_ranks) < r_sharp
    if result.confirmed and raise_on_violation:
        raise HolonomyBoundViolation(
            f"off-diagonal rank {result.max_rank} < r# = {r_sharp}, confirmed by the oracle"
        )
    if not result.confirmed:
        log.warning("finite-difference rank %d below r# = %d but oracle disagrees", result.max_rank, r_sharp)
    return result


def _rk4_segment(chart: Chart, T: TorsionField, start: np.ndarray, end: np.ndarray, steps: int, P: np.ndarray):
    vel = end - start

    def rhs(s, V):
        A = np.einsum("i,kij->kj", vel, _connection(chart, T, start + s * vel))
        return -A @ V

    ds = 1.0 / steps
    for n in range(steps):
        s = n * ds
        k1 = rhs(s, P)
        k2 = rhs(s + ds / 2, P + ds / 2 * k1)
        k3 = rhs(s + ds / 2, P + ds / 2 * k2)
        k4 = rhs(s + ds, P + ds * k3)
        P = P + ds / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return P


def loop_transport(chart: Chart, T: TorsionField, loop: Sequence, steps: int = 32) -> np.ndarray:
    """Parallel transport around a closed polyline, ``V_end = P V_start``.

    Coordinate components; the loop is closed automatically if the last
    vertex differs from the first.
    """
    verts = [np.asarray(v, dtype=float) for v in loop]
    if not np.allclose(verts[0], verts[-1]):
        verts.append(verts[0])
    for v in verts:
        _check_margin(chart, v, 0.0)
    P = np.eye(chart.dim)
    for a, b in zip(verts[:-1], verts[1:]):
        P = _rk4_segment(chart, T, a, b, steps, P)
    return P


def square_loop(point, a: int, b: int, eps: float) -> list[np.ndarray]:
    """Coordinate square at ``point`` oriented so ``log(P) ~ eps^2 R(d_a, d_b)``."""
    p = np.asarray(point, dtype=float)
    ea = np.zeros_like(p)
    eb = np.zeros_like(p)
    ea[a] = eps
    eb[b] = eps
    return [p, p + eb, p + ea + eb, p + ea, p]


def loop_generator(P: np.ndarray) -> np.ndarray:
    return np.real(scipy.linalg.logm(P))
