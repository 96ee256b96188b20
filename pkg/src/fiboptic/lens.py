"""Lenses over finite cartesian data, and dependent lenses (container morphisms).

Dependent lenses are the normal form that every equivalence check in this
repository targets, so this module also carries the counting and enumeration
oracles used by the other modules.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .fincat import (
    CompositionError,
    EnumerationCeilingError,
    FinSet,
    FiniteFunction,
    all_functions,
    compose_fn,
    identity_fn,
    product_witness,
)

Pair = tuple[FinSet, FinSet]


@dataclass(frozen=True)
class Lens:
    """A view/update pair: get maps X to Y, put maps X x Y' to X'."""

    source: Pair
    target: Pair
    get: FiniteFunction
    put: FiniteFunction

    def __post_init__(self):
        x, xp = self.source
        y, yp = self.target
        if self.get.dom != x or self.get.cod != y:
            raise ValueError("get endpoints do not match the stated objects")
        if self.put.dom != product_witness(x, yp).carrier or self.put.cod != xp:
            raise ValueError("put endpoints do not match the stated objects")


def identity_lens(pair: Pair) -> Lens:
    x, xp = pair
    w = product_witness(x, xp)
    put = FiniteFunction(w.carrier, xp, tuple(w.unpair(p)[1] for p in w.carrier))
    return Lens(pair, pair, identity_fn(x), put)


def lens_compose(l1: Lens, l2: Lens) -> Lens:
    """Composite lens: view through both, update back through both."""
    if l1.target != l2.source:
        raise CompositionError("lens target does not match the next source")
    x, _ = l1.source
    _, zp = l2.target
    wxz = product_witness(x, zp)
    y, yp = l2.source
    wxy = product_witness(x, yp)
    wyz = product_witness(y, zp)
    table = []
    for p in wxz.carrier:
        xi, zi = wxz.unpair(p)
        mid = l2.put(wyz.pair(l1.get(xi), zi))
        table.append(l1.put(wxy.pair(xi, mid)))
    get = compose_fn(l1.get, l2.get)
    return Lens(l1.source, l2.target, get, FiniteFunction(wxz.carrier, l1.source[1], tuple(table)))


def lens_hom_count(x: int, xp: int, y: int, yp: int) -> int:
    """Closed-form count of lenses (x, xp) -> (y, yp)."""
    return y**x * xp ** (x * yp)


def enumerate_lenses(source: Pair, target: Pair) -> list[Lens]:
    x, xp = source
    y, yp = target
    w = product_witness(x, yp)
    return [
        Lens(source, target, get, put)
        for get in all_functions(x, y)
        for put in all_functions(w.carrier, xp)
    ]


# ---------------------------------------------------------------------------
# Containers and dependent lenses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Container:
    """Positions with one direction set per position."""

    positions: FinSet
    directions: tuple[FinSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "directions", tuple(self.directions))
        if len(self.directions) != self.positions.size:
            raise ValueError("one direction set per position is required")

    def direction(self, a: int) -> FinSet:
        return self.directions[a]


def constant_container(positions: FinSet, direction: FinSet) -> Container:
    return Container(positions, (direction,) * positions.size)


@dataclass(frozen=True)
class DepLens:
    """Forward on positions, backward on directions against the forward image."""

    source: Container
    target: Container
    forward: FiniteFunction
    backward: tuple[FiniteFunction, ...]

    def __post_init__(self):
        object.__setattr__(self, "backward", tuple(self.backward))
        if self.forward.dom != self.source.positions:
            raise ValueError("forward domain must be the source positions")
        if self.forward.cod != self.target.positions:
            raise ValueError("forward codomain must be the target positions")
        if len(self.backward) != self.source.positions.size:
            raise ValueError("one backward map per source position is required")
        for a, mapping in enumerate(self.backward):
            if mapping.dom != self.target.direction(self.forward(a)):
                raise ValueError(f"backward[{a}] domain mismatch")
            if mapping.cod != self.source.direction(a):
                raise ValueError(f"backward[{a}] codomain mismatch")


def identity_dlens(c: Container) -> DepLens:
    return DepLens(
        c,
        c,
        identity_fn(c.positions),
        tuple(identity_fn(c.direction(a)) for a in c.positions),
    )


def dlens_compose(d1: DepLens, d2: DepLens) -> DepLens:
    if d1.target != d2.source:
        raise CompositionError("dependent lens target does not match the next source")
    forward = compose_fn(d1.forward, d2.forward)
    backward = tuple(
        compose_fn(d2.backward[d1.forward(a)], d1.backward[a])
        for a in d1.source.positions
    )
    return DepLens(d1.source, d2.target, forward, backward)


def count_dlens_hom(src: Container, tgt: Container) -> int:
    """Product over source positions of the per-position choice counts."""
    total = 1
    for a in src.positions:
        b = src.direction(a).size
        total *= sum(b ** tgt.direction(c).size for c in tgt.positions)
    return total


def enumerate_dlens_hom(
    src: Container, tgt: Container, ceiling: int = 10**6
) -> list[DepLens]:
    """The complete, duplicate-free hom set; refuses above the ceiling."""
    expected = count_dlens_hom(src, tgt)
    if expected > ceiling:
        raise EnumerationCeilingError(
            f"dependent lens enumeration of size {expected} exceeds ceiling {ceiling}"
        )
    out = []
    for forward in all_functions(src.positions, tgt.positions):
        per_position = [
            all_functions(tgt.direction(forward(a)), src.direction(a))
            for a in src.positions
        ]
        for backward in itertools.product(*per_position):
            out.append(DepLens(src, tgt, forward, tuple(backward)))
    return out


def lens_to_dlens(l: Lens) -> DepLens:
    """Embed a lens as a dependent lens with constant direction sets."""
    x, xp = l.source
    y, yp = l.target
    w = product_witness(x, yp)
    backward = tuple(
        FiniteFunction(yp, xp, tuple(l.put(w.pair(xi, ypi)) for ypi in yp))
        for xi in x
    )
    return DepLens(
        constant_container(x, xp),
        constant_container(y, yp),
        l.get,
        backward,
    )


# ---------------------------------------------------------------------------
# Law-checker instances
# ---------------------------------------------------------------------------


class LensCategory:
    name = "lens"
    composition_closed = True

    def objects(self, size_bound: int) -> list[Pair]:
        sizes = range(size_bound + 1)
        return [(FinSet(i), FinSet(j)) for i in sizes for j in sizes]

    def morphisms(self, a: Pair, b: Pair) -> list[Lens]:
        return enumerate_lenses(a, b)

    def identity(self, a: Pair) -> Lens:
        return identity_lens(a)

    def compose(self, f: Lens, g: Lens) -> Lens:
        return lens_compose(f, g)


class DepLensCategory:
    name = "deplens"
    composition_closed = True

    def __init__(self, ceiling: int = 10**6):
        self.ceiling = ceiling

    def objects(self, size_bound: int) -> list[Container]:
        sizes = range(size_bound + 1)
        out = []
        for n in sizes:
            for dirs in itertools.product(sizes, repeat=n):
                out.append(Container(FinSet(n), tuple(FinSet(d) for d in dirs)))
        return out

    def morphisms(self, a: Container, b: Container) -> list[DepLens]:
        return enumerate_dlens_hom(a, b, self.ceiling)

    def identity(self, a: Container) -> DepLens:
        return identity_dlens(a)

    def compose(self, f: DepLens, g: DepLens) -> DepLens:
        return dlens_compose(f, g)
