"""Finite base categories: sets with functions, and finite-support stochastic kernels.

Everything downstream builds on the types here.  Elements of a finite set are
always the indices ``0..n-1``; labels are display-only and never enter
equality.  Probabilities are exact rationals, so every law checked in this
repository is a decidable equality with no tolerances anywhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np


class CompositionError(ValueError):
    """Raised when morphisms are composed across mismatched objects."""


class EnumerationCeilingError(RuntimeError):
    """Raised when an exhaustive enumeration would exceed its configured ceiling."""


# ---------------------------------------------------------------------------
# Objects and morphisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FinSet:
    """A finite set with elements 0..size-1 and optional display labels."""

    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.size < 0:
            raise ValueError("FinSet size must be nonnegative")
        if self.labels is not None:
            if len(self.labels) != self.size:
                raise ValueError("label count must equal size")
            if len(set(self.labels)) != self.size:
                raise ValueError("labels must be pairwise distinct")

    def __eq__(self, other):
        if not isinstance(other, FinSet):
            return NotImplemented
        return self.size == other.size

    def __hash__(self):
        return hash(("FinSet", self.size))

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.size))

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)

    def __repr__(self):
        if self.labels:
            return f"FinSet({self.size}, labels={self.labels!r})"
        return f"FinSet({self.size})"


@dataclass(frozen=True)
class FiniteFunction:
    """A function between finite sets, stored as a lookup table."""

    dom: FinSet
    cod: FinSet
    table: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(self.table))
        if len(self.table) != self.dom.size:
            raise ValueError("table length must equal domain size")
        for i, v in enumerate(self.table):
            if not 0 <= v < self.cod.size:
                raise ValueError(f"table entry {v} at {i} not below codomain size {self.cod.size}")

    def __call__(self, i: int) -> int:
        return self.table[i]

    def is_identity(self) -> bool:
        return self.dom == self.cod and all(v == i for i, v in enumerate(self.table))

    def __repr__(self):
        return f"FiniteFunction({self.dom.size}->{self.cod.size}, {list(self.table)})"


def identity_fn(s: FinSet) -> FiniteFunction:
    return FiniteFunction(s, s, tuple(range(s.size)))


def compose_fn(f: FiniteFunction, g: FiniteFunction) -> FiniteFunction:
    """Diagrammatic composite: first f, then g."""
    if f.cod != g.dom:
        raise CompositionError(f"cannot compose {f.cod.size} against {g.dom.size}")
    return FiniteFunction(f.dom, g.cod, tuple(g.table[v] for v in f.table))


def all_functions(dom: FinSet, cod: FinSet) -> list[FiniteFunction]:
    """Every function dom -> cod, in lexicographic table order."""
    if dom.size == 0:
        return [FiniteFunction(dom, cod, ())]
    if cod.size == 0:
        return []
    return [
        FiniteFunction(dom, cod, table)
        for table in itertools.product(range(cod.size), repeat=dom.size)
    ]


def constant_fn(dom: FinSet, cod: FinSet, value: int) -> FiniteFunction:
    return FiniteFunction(dom, cod, (value,) * dom.size)


def is_bijection(f: FiniteFunction) -> bool:
    return f.dom.size == f.cod.size and len(set(f.table)) == f.dom.size


def inverse_fn(f: FiniteFunction) -> FiniteFunction:
    if not is_bijection(f):
        raise ValueError("only bijections can be inverted")
    table = [0] * f.cod.size
    for i, v in enumerate(f.table):
        table[v] = i
    return FiniteFunction(f.cod, f.dom, tuple(table))


# ---------------------------------------------------------------------------
# Distributions and kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteDistribution:
    """An exact probability distribution on a finite carrier."""

    carrier: FinSet
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(Fraction(w) for w in self.weights))
        if len(self.weights) != self.carrier.size:
            raise ValueError("weight count must equal carrier size")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if sum(self.weights, Fraction(0)) != 1:
            raise ValueError("weights must sum to exactly 1")

    def support(self) -> list[int]:
        return [i for i, w in enumerate(self.weights) if w > 0]


def dirac(carrier: FinSet, point: int) -> FiniteDistribution:
    if not 0 <= point < carrier.size:
        raise ValueError("Dirac point outside carrier")
    return FiniteDistribution(
        carrier, tuple(Fraction(1 if i == point else 0) for i in carrier)
    )


@dataclass(frozen=True)
class FiniteKernel:
    """A stochastic map between finite sets: one distribution per input."""

    dom: FinSet
    cod: FinSet
    rows: tuple[FiniteDistribution, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if len(self.rows) != self.dom.size:
            raise ValueError("row count must equal domain size")
        for row in self.rows:
            if row.carrier != self.cod:
                raise ValueError("row carrier must equal codomain")

    def weight(self, a: int, b: int) -> Fraction:
        return self.rows[a].weights[b]

    def is_identity(self) -> bool:
        return self.dom == self.cod and all(
            self.weight(a, b) == (1 if a == b else 0)
            for a in self.dom
            for b in self.cod
        )


def identity_kernel(s: FinSet) -> FiniteKernel:
    return FiniteKernel(s, s, tuple(dirac(s, a) for a in s))


def fn_to_kernel(f: FiniteFunction) -> FiniteKernel:
    """The deterministic kernel carried by a function."""
    return FiniteKernel(f.dom, f.cod, tuple(dirac(f.cod, f(a)) for a in f.dom))


def compose_kernel(k1: FiniteKernel, k2: FiniteKernel) -> FiniteKernel:
    """Chain two kernels; exact rational matrix product."""
    if k1.cod != k2.dom:
        raise CompositionError(
            f"cannot compose kernel {k1.cod.size} against {k2.dom.size}"
        )
    rows = []
    for a in k1.dom:
        weights = [Fraction(0)] * k2.cod.size
        for b in k1.cod:
            w = k1.weight(a, b)
            if w == 0:
                continue
            for c in k2.cod:
                weights[c] += w * k2.weight(b, c)
        rows.append(FiniteDistribution(k2.cod, tuple(weights)))
    return FiniteKernel(k1.dom, k2.cod, tuple(rows))


def kernel_product(k1: FiniteKernel, k2: FiniteKernel) -> FiniteKernel:
    """Independent product kernel on row-major product carriers."""
    dom = product_witness(k1.dom, k2.dom)
    cod = product_witness(k1.cod, k2.cod)
    rows = []
    for a in k1.dom:
        for c in k2.dom:
            weights = [Fraction(0)] * cod.carrier.size
            for b in k1.cod:
                for d in k2.cod:
                    weights[cod.pair(b, d)] = k1.weight(a, b) * k2.weight(c, d)
            rows.append(FiniteDistribution(cod.carrier, tuple(weights)))
    return FiniteKernel(dom.carrier, cod.carrier, tuple(rows))


def grid_weights(denominators: Sequence[int]) -> list[Fraction]:
    """All rationals p/q with q in the grid and 0 <= p <= q, deduplicated."""
    values = {Fraction(p, q) for q in denominators for p in range(q + 1)}
    return sorted(values)


def grid_distributions(
    carrier: FinSet, denominators: Sequence[int]
) -> list[FiniteDistribution]:
    """Every distribution on the carrier whose weights come from the grid."""
    values = grid_weights(denominators)
    out: list[FiniteDistribution] = []

    def extend(prefix: list[Fraction], remaining: Fraction, slots: int):
        if slots == 0:
            if remaining == 0:
                out.append(FiniteDistribution(carrier, tuple(prefix)))
            return
        for v in values:
            if v <= remaining:
                extend(prefix + [v], remaining - v, slots - 1)

    extend([], Fraction(1), carrier.size)
    return out


def grid_kernels(
    dom: FinSet, cod: FinSet, denominators: Sequence[int]
) -> list[FiniteKernel]:
    """Every kernel dom -> cod with all rows drawn from the grid."""
    dists = grid_distributions(cod, denominators)
    if dom.size == 0:
        return [FiniteKernel(dom, cod, ())]
    return [
        FiniteKernel(dom, cod, rows)
        for rows in itertools.product(dists, repeat=dom.size)
    ]


# ---------------------------------------------------------------------------
# Monoidal structure witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductWitness:
    """Row-major product carrier: pair(i, j) = i * |right| + j."""

    left: FinSet
    right: FinSet
    carrier: FinSet = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "carrier", FinSet(self.left.size * self.right.size))

    def pair(self, i: int, j: int) -> int:
        if not (0 <= i < self.left.size and 0 <= j < self.right.size):
            raise ValueError("pair index out of range")
        return i * self.right.size + j

    def unpair(self, p: int) -> tuple[int, int]:
        if not 0 <= p < self.carrier.size:
            raise ValueError("carrier index out of range")
        return divmod(p, self.right.size)


@dataclass(frozen=True)
class CoproductWitness:
    """Left-then-right coproduct carrier: injl(i) = i, injr(j) = |left| + j."""

    left: FinSet
    right: FinSet
    carrier: FinSet = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "carrier", FinSet(self.left.size + self.right.size))

    def injl(self, i: int) -> int:
        if not 0 <= i < self.left.size:
            raise ValueError("left index out of range")
        return i

    def injr(self, j: int) -> int:
        if not 0 <= j < self.right.size:
            raise ValueError("right index out of range")
        return self.left.size + j

    def case(self, p: int) -> tuple[str, int]:
        if not 0 <= p < self.carrier.size:
            raise ValueError("carrier index out of range")
        if p < self.left.size:
            return ("left", p)
        return ("right", p - self.left.size)


def product_witness(left: FinSet, right: FinSet) -> ProductWitness:
    return ProductWitness(left, right)


def coproduct_witness(left: FinSet, right: FinSet) -> CoproductWitness:
    return CoproductWitness(left, right)


def distribute(
    x: FinSet, y: FinSet, z: FinSet
) -> tuple[FiniteFunction, FiniteFunction]:
    """The bijection x*(y+z) = x*y + x*z and its inverse, as table functions."""
    yz = coproduct_witness(y, z)
    dom = product_witness(x, yz.carrier)
    xy = product_witness(x, y)
    xz = product_witness(x, z)
    cod = coproduct_witness(xy.carrier, xz.carrier)
    table = []
    for p in dom.carrier:
        i, w = dom.unpair(p)
        side, v = yz.case(w)
        if side == "left":
            table.append(cod.injl(xy.pair(i, v)))
        else:
            table.append(cod.injr(xz.pair(i, v)))
    forward = FiniteFunction(dom.carrier, cod.carrier, tuple(table))
    return forward, inverse_fn(forward)


# ---------------------------------------------------------------------------
# Generic law checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LawViolation:
    law: str
    witness: tuple
    detail: str


@dataclass(frozen=True)
class LawReport:
    subject: str
    objects: int
    morphisms: int
    checks: int
    violations: tuple[LawViolation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


class FinSetCategory:
    """Finite sets and all functions between them."""

    name = "finset"
    composition_closed = True

    def objects(self, size_bound: int) -> list[FinSet]:
        return [FinSet(n) for n in range(size_bound + 1)]

    def morphisms(self, a: FinSet, b: FinSet) -> list[FiniteFunction]:
        return all_functions(a, b)

    def identity(self, a: FinSet) -> FiniteFunction:
        return identity_fn(a)

    def compose(self, f: FiniteFunction, g: FiniteFunction) -> FiniteFunction:
        return compose_fn(f, g)


class FinKernelCategory:
    """Finite sets and grid-sampled stochastic kernels.

    Hom enumeration is a probe set, not closed under composition, so law
    checking composes triples directly instead of via hom-set indices.
    """

    name = "finkernel"
    composition_closed = False

    def __init__(self, denominators: Sequence[int] = (1, 2, 3)):
        self.denominators = tuple(denominators)

    def objects(self, size_bound: int) -> list[FinSet]:
        return [FinSet(n) for n in range(size_bound + 1)]

    def morphisms(self, a: FinSet, b: FinSet) -> list[FiniteKernel]:
        return grid_kernels(a, b, self.denominators)

    def identity(self, a: FinSet) -> FiniteKernel:
        return identity_kernel(a)

    def compose(self, f: FiniteKernel, g: FiniteKernel) -> FiniteKernel:
        return compose_kernel(f, g)


def check_category_laws(category, size_bound: int, ceiling: int = 10**6) -> LawReport:
    """Exhaustively check identity and associativity laws up to a size bound.

    The category instance must expose ``objects``, ``morphisms``, ``identity``
    and ``compose``.  When its hom enumeration is closed under composition the
    associativity pass runs over integer index tables; otherwise every triple
    is composed directly.
    """
    objs = category.objects(size_bound)
    homs: dict[tuple[int, int], list] = {}
    total = 0
    for ia, a in enumerate(objs):
        for ib, b in enumerate(objs):
            ms = list(category.morphisms(a, b))
            homs[ia, ib] = ms
            total += len(ms)
            if total > ceiling:
                raise EnumerationCeilingError(
                    f"{category.name}: morphism count exceeds ceiling {ceiling}"
                )

    n = len(objs)
    violations: list[LawViolation] = []
    checks = 0

    # Identity laws.
    for ia in range(n):
        ident = category.identity(objs[ia])
        for ib in range(n):
            for f in homs[ia, ib]:
                checks += 1
                if category.compose(ident, f) != f:
                    violations.append(
                        LawViolation("identity-left", (ident, f), "id;f != f")
                    )
        for ib in range(n):
            for f in homs[ib, ia]:
                checks += 1
                if category.compose(f, ident) != f:
                    violations.append(
                        LawViolation("identity-right", (f, ident), "f;id != f")
                    )

    work = sum(
        len(homs[ia, ib]) * len(homs[ib, ic])
        for ia in range(n)
        for ib in range(n)
        for ic in range(n)
    )
    if work > ceiling:
        raise EnumerationCeilingError(
            f"{category.name}: composite count {work} exceeds ceiling {ceiling}"
        )

    if category.composition_closed:
        index = {
            (ia, ib): {f: k for k, f in enumerate(homs[ia, ib])}
            for ia in range(n)
            for ib in range(n)
        }
        comp: dict[tuple[int, int, int], np.ndarray] = {}
        for ia in range(n):
            for ib in range(n):
                for ic in range(n):
                    nab, nbc = len(homs[ia, ib]), len(homs[ib, ic])
                    if nab == 0 or nbc == 0:
                        comp[ia, ib, ic] = np.zeros((nab, nbc), dtype=np.int64)
                        continue
                    table = np.empty((nab, nbc), dtype=np.int64)
                    lookup = index[ia, ic]
                    for i, f in enumerate(homs[ia, ib]):
                        for j, g in enumerate(homs[ib, ic]):
                            table[i, j] = lookup[category.compose(f, g)]
                    comp[ia, ib, ic] = table
        for ia in range(n):
            for ib in range(n):
                if not homs[ia, ib]:
                    continue
                for ic in range(n):
                    if not homs[ib, ic]:
                        continue
                    for id_ in range(n):
                        if not homs[ic, id_]:
                            continue
                        lhs = comp[ia, ic, id_][comp[ia, ib, ic]]
                        rhs = comp[ia, ib, id_][:, comp[ib, ic, id_]]
                        checks += lhs.size
                        if not np.array_equal(lhs, rhs):
                            i, j, k = map(int, np.argwhere(lhs != rhs)[0])
                            violations.append(
                                LawViolation(
                                    "associativity",
                                    (
                                        homs[ia, ib][i],
                                        homs[ib, ic][j],
                                        homs[ic, id_][k],
                                    ),
                                    "(f;g);h != f;(g;h)",
                                )
                            )
    else:
        for ib in range(n):
            for ic in range(n):
                for id_ in range(n):
                    right = [
                        (g, h, category.compose(g, h))
                        for g in homs[ib, ic]
                        for h in homs[ic, id_]
                    ]
                    if not right:
                        continue
                    for ia in range(n):
                        for f in homs[ia, ib]:
                            cache = {}
                            for g, h, gh in right:
                                fg = cache.get(id(g))
                                if fg is None:
                                    fg = category.compose(f, g)
                                    cache[id(g)] = fg
                                checks += 1
                                if category.compose(fg, h) != category.compose(f, gh):
                                    violations.append(
                                        LawViolation(
                                            "associativity",
                                            (f, g, h),
                                            "(f;g);h != f;(g;h)",
                                        )
                                    )

    return LawReport(
        subject=category.name,
        objects=n,
        morphisms=total,
        checks=checks,
        violations=tuple(violations),
    )
