"""Exact model of a mixed (2,1) class on ``Sigma_g x N x T^k``.

The class is ``vol_Sigma ^ beta`` with ``beta = gamma + sum_i c_i dtheta_i``.
``gamma`` is given by its coefficients over a user-declared harmonic basis of
``H^1(N)``; ``c`` by its coefficients over the torus circles. All arithmetic
is done with :class:`fractions.Fraction`, so every verdict here is exact.

Basis ordering is fixed: the N-basis first (factor by factor, in the order the
factors were declared), then the ``k`` torus circles in circle order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import ConfigInvalid, LengthMismatch

Rational = Union[int, str, Fraction]

__all__ = [
    "Surface",
    "Generic",
    "Torus",
    "ProductSpec",
    "Circle",
    "MixedFluxClass",
    "StratumVerdict",
    "to_fraction",
    "decompose",
    "is_in_parallel_stratum",
    "r_sharp",
    "irreducible_kernel",
]


def to_fraction(value: Rational) -> Fraction:
    """Exact conversion; floats are refused so no rounding sneaks in."""
    if isinstance(value, bool) or isinstance(value, float):
        raise ConfigInvalid(f"expected an exact rational, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigInvalid(f"cannot parse {value!r} as a rational") from exc


def _fractions(values: Iterable[Rational]) -> tuple[Fraction, ...]:
    return tuple(to_fraction(v) for v in values)


@dataclass(frozen=True)
class Surface:
    """Compact oriented surface of genus ``genus``.

    Genus 1 is the flat torus, whose harmonic 1-forms are all parallel. For
    genus >= 2 the curvature is negative, so no nonzero 1-form is parallel.
    """

    genus: int

    def __post_init__(self):
        if not isinstance(self.genus, int) or self.genus < 1:
            raise ConfigInvalid(f"genus must be an integer >= 1, got {self.genus!r}", "genus")

    @property
    def dim(self) -> int:
        return 2

    @property
    def b1(self) -> int:
        return 2 * self.genus

    @property
    def p1_mask(self) -> frozenset[int]:
        return frozenset(range(1, self.b1 + 1)) if self.genus == 1 else frozenset()

    @property
    def hyperbolic(self) -> bool:
        return self.genus >= 2


@dataclass(frozen=True)
class Generic:
    """Factor described only by its dimension, ``b1`` and parallel basis indices.

    ``p1_mask`` uses 1-based indices into the factor's own H^1 basis.
    """

    dim: int
    b1: int
    p1_mask: frozenset[int] = frozenset()

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ConfigInvalid(f"dim must be an integer >= 1, got {self.dim!r}", "dim")
        if not isinstance(self.b1, int) or self.b1 < 0:
            raise ConfigInvalid(f"b1 must be an integer >= 0, got {self.b1!r}", "b1")
        mask = frozenset(self.p1_mask)
        object.__setattr__(self, "p1_mask", mask)
        bad = sorted(i for i in mask if not (isinstance(i, int) and 1 <= i <= self.b1))
        if bad:
            raise ConfigInvalid(f"p1_mask indices {bad} outside 1..{self.b1}", "p1_mask")

    @property
    def hyperbolic(self) -> bool:
        # Without parallel directions the lab models the factor as hyperbolic space.
        return not self.p1_mask


@dataclass(frozen=True)
class Torus:
    """Flat torus ``T^k``; each circle has a rational circumference (default 1).

    ``length_unit`` is a display label for the circumferences (``"pi"`` lets a
    circumference of 2 stand for 2*pi while keeping the arithmetic exact).
    """

    k: int
    circumferences: tuple[Fraction, ...] = ()
    names: tuple[str, ...] = ()
    length_unit: str = ""

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 0:
            raise ConfigInvalid(f"k must be an integer >= 0, got {self.k!r}", "k")
        circ = _fractions(self.circumferences) if self.circumferences else (Fraction(1),) * self.k
        if len(circ) != self.k:
            raise ConfigInvalid(f"expected {self.k} circumferences, got {len(circ)}", "circumferences")
        if any(c <= 0 for c in circ):
            raise ConfigInvalid("circumferences must be positive", "circumferences")
        object.__setattr__(self, "circumferences", circ)
        names = tuple(self.names)
        if names and len(names) != self.k:
            raise ConfigInvalid(f"expected {self.k} circle names, got {len(names)}", "names")
        object.__setattr__(self, "names", names)

    @property
    def dim(self) -> int:
        return self.k

    @property
    def b1(self) -> int:
        return self.k

    @property
    def p1_mask(self) -> frozenset[int]:
        return frozenset(range(1, self.k + 1))

    @property
    def hyperbolic(self) -> bool:
        return False


Factor = Union[Surface, Generic, Torus]


@dataclass(frozen=True)
class Circle:
    """A flat circle factor that can be dualized or collapsed.

    ``slot`` is its position in the full beta vector, ``coord`` its coordinate
    index on the chart (Sigma occupies 0 and 1). ``torus_index`` is the 1-based
    index in ``T^k``, or ``None`` for circle factors sitting inside N.
    """

    label: str
    slot: int
    circumference: Fraction
    torus_index: int | None
    coord: int
    length_unit: str = ""


@dataclass(frozen=True)
class ProductSpec:
    """``Sigma_g x N x T^k`` with N the product of ``n_factors``."""

    sigma: Surface
    n_factors: tuple[Factor, ...]
    torus: Torus = field(default_factory=lambda: Torus(0))

    def __post_init__(self):
        if not isinstance(self.sigma, Surface):
            raise ConfigInvalid("the first factor must be a surface", "factors[0]")
        object.__setattr__(self, "n_factors", tuple(self.n_factors))
        labels = [c.label for c in self.circles]
        dup = sorted({x for x in labels if labels.count(x) > 1})
        if dup:
            raise ConfigInvalid(f"duplicate circle labels {dup}", "factors")

    @classmethod
    def from_factors(cls, factors: Sequence[Factor]) -> "ProductSpec":
        """First factor is Sigma_g; a trailing Torus (if any) is T^k; the rest is N.

        To end N with a torus factor while having k = 0, append ``Torus(0)``.
        """
        factors = list(factors)
        if not factors:
            raise ConfigInvalid("at least one factor is required", "factors")
        sigma, rest = factors[0], factors[1:]
        if rest and isinstance(rest[-1], Torus):
            return cls(sigma, tuple(rest[:-1]), rest[-1])
        return cls(sigma, tuple(rest), Torus(0))

    @property
    def factors(self) -> tuple[Factor, ...]:
        return (self.sigma, *self.n_factors, self.torus)

    @property
    def b1_n(self) -> int:
        return sum(f.b1 for f in self.n_factors)

    @property
    def dim_n(self) -> int:
        return sum(f.dim for f in self.n_factors)

    @property
    def k(self) -> int:
        return self.torus.k

    @property
    def beta_length(self) -> int:
        return self.b1_n + self.k

    @property
    def n_parallel(self) -> frozenset[int]:
        """0-based positions in the N-basis that span ``P_1(N)``."""
        out, offset = set(), 0
        for f in self.n_factors:
            out.update(offset + i - 1 for i in f.p1_mask)
            offset += f.b1
        return frozenset(out)

    @property
    def circles(self) -> tuple[Circle, ...]:
        out, offset, coord = [], 0, 2
        for j, f in enumerate(self.n_factors, start=1):
            if isinstance(f, Torus):
                for m in range(f.k):
                    label = f.names[m] if f.names else f"n{j}.{m + 1}"
                    out.append(
                        Circle(label, offset + m, f.circumferences[m], None, coord + m, f.length_unit)
                    )
            offset += f.b1
            coord += f.dim
        t = self.torus
        for i in range(t.k):
            label = t.names[i] if t.names else f"theta{i + 1}"
            out.append(Circle(label, offset + i, t.circumferences[i], i + 1, coord + i, t.length_unit))
        return tuple(out)

    def circle(self, ref: int | str | Circle) -> Circle:
        """Resolve a circle by 1-based T^k index or by label."""
        if isinstance(ref, Circle):
            return ref
        if isinstance(ref, bool):
            raise ConfigInvalid(f"invalid circle reference {ref!r}")
        if isinstance(ref, int):
            if not 1 <= ref <= self.k:
                raise ConfigInvalid(f"torus circle index {ref} outside 1..{self.k}")
            return next(c for c in self.circles if c.torus_index == ref)
        for c in self.circles:
            if c.label == ref:
                return c
        raise ConfigInvalid(f"unknown circle {ref!r}; known: {[c.label for c in self.circles]}")


@dataclass(frozen=True)
class MixedFluxClass:
    """Coefficients of ``beta``: ``gamma`` over H^1(N), ``c`` over the torus."""

    gamma: tuple[Fraction, ...]
    c: tuple[Fraction, ...]
    sigma_genus: int = 1

    def __post_init__(self):
        object.__setattr__(self, "gamma", _fractions(self.gamma))
        object.__setattr__(self, "c", _fractions(self.c))

    @property
    def beta(self) -> tuple[Fraction, ...]:
        return self.gamma + self.c

    @property
    def is_zero(self) -> bool:
        return not any(self.beta)

    def with_beta(self, beta: Sequence[Fraction]) -> "MixedFluxClass":
        n = len(self.gamma)
        return MixedFluxClass(tuple(beta[:n]), tuple(beta[n:]), self.sigma_genus)

    def scaled(self, factor: Rational) -> "MixedFluxClass":
        f = to_fraction(factor)
        return self.with_beta([f * b for b in self.beta])

    def __add__(self, other: "MixedFluxClass") -> "MixedFluxClass":
        if len(self.gamma) != len(other.gamma) or len(self.c) != len(other.c):
            raise LengthMismatch("cannot add classes over different bases")
        return self.with_beta([a + b for a, b in zip(self.beta, other.beta)])


@dataclass(frozen=True)
class StratumVerdict:
    r: int
    dim_K: int
    r_sharp: int
    in_P1: bool
    kernel_caveat: bool


def _as_spec(spec: ProductSpec | Sequence[Factor]) -> ProductSpec:
    return spec if isinstance(spec, ProductSpec) else ProductSpec.from_factors(spec)


def check_consistent(cls: MixedFluxClass, spec: ProductSpec) -> None:
    if len(cls.gamma) != spec.b1_n:
        raise LengthMismatch(f"gamma has length {len(cls.gamma)}, b1(N) = {spec.b1_n}", "gamma")
    if len(cls.c) != spec.k:
        raise LengthMismatch(f"c has length {len(cls.c)}, k = {spec.k}", "c")


def decompose(beta_raw: Sequence[Rational], spec: ProductSpec | Sequence[Factor]) -> MixedFluxClass:
    """Split a raw beta vector into its N-part and torus part."""
    spec = _as_spec(spec)
    beta = _fractions(beta_raw)
    if len(beta) != spec.beta_length:
        raise LengthMismatch(
            f"beta has length {len(beta)}, expected b1(N) + k = {spec.b1_n} + {spec.k}", "beta"
        )
    return MixedFluxClass(beta[: spec.b1_n], beta[spec.b1_n :], spec.sigma.genus)


def _gamma_support(cls: MixedFluxClass) -> set[int]:
    return {i for i, g in enumerate(cls.gamma) if g != 0}


def is_in_parallel_stratum(cls: MixedFluxClass, spec: ProductSpec | Sequence[Factor]) -> bool:
    spec = _as_spec(spec)
    check_consistent(cls, spec)
    # torus directions are flat, so the c-part never leaves P_1
    return _gamma_support(cls) <= spec.n_parallel


def r_sharp(cls: MixedFluxClass, spec: ProductSpec | Sequence[Factor]) -> StratumVerdict:
    spec = _as_spec(spec)
    in_p1 = is_in_parallel_stratum(cls, spec)
    r = 0 if cls.is_zero else 1
    dim_k = 1 if (r == 1 and in_p1) else 0
    caveat = bool(_gamma_support(cls) & spec.n_parallel)
    return StratumVerdict(r=r, dim_K=dim_k, r_sharp=r - dim_k, in_P1=in_p1, kernel_caveat=caveat)


def irreducible_kernel(
    cls: MixedFluxClass, spec: ProductSpec | Sequence[Factor]
) -> tuple[tuple[Fraction, ...], bool]:
    """Return the part of gamma that no flat-circle duality can reach.

    Entries on parallel N-directions are zeroed; ``caveat`` reports whether a
    nonzero entry was dropped. Those entries are only convertible along a
    circle ``S^1_beta`` when the orbits of ``beta^#`` close.
    """
    spec = _as_spec(spec)
    check_consistent(cls, spec)
    par = spec.n_parallel
    kernel = tuple(Fraction(0) if i in par else g for i, g in enumerate(cls.gamma))
    caveat = any(cls.gamma[i] != 0 for i in par)
    return kernel, caveat
