"""Monoidal bifibrations over finite sets, and the optics built over them.

Two concrete instances are provided: families of finite sets (fibres are
functor categories) and finite stochastic bundles (fibres are kernels
indexed over the base point).  Both support pullback and pushforward with
explicit adjunction units/counits, fibrewise tensor, and the canonical
Beck-Chevalley comparison, so every law is checked on concrete tables.

Carrier conventions are fixed so that composite functors are strictly equal
on the nose: pullback carriers enumerate pairs base-point-major, tensor
carriers left-major, pushforward reuses the carrier unchanged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .fincat import (
    CompositionError,
    FinSet,
    FiniteDistribution,
    FiniteFunction,
    FiniteKernel,
    LawReport,
    LawViolation,
    all_functions,
    compose_fn,
    compose_kernel,
    dirac,
    grid_distributions,
    identity_fn,
    identity_kernel,
    product_witness,
)
from .indexed import IndexedFamily, IndexedOptic, ResidualMatrix


# ---------------------------------------------------------------------------
# Families of finite sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamObject:
    """A finite family of finite sets over a base."""

    base: FinSet
    family: tuple[FinSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "family", tuple(self.family))
        if len(self.family) != self.base.size:
            raise ValueError("one component per base point is required")

    def at(self, i: int) -> FinSet:
        return self.family[i]


@dataclass(frozen=True)
class FamMorphism:
    """A componentwise map between families over the same base."""

    source: FamObject
    target: FamObject
    components: tuple[FiniteFunction, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if self.source.base != self.target.base:
            raise ValueError("fibre morphisms live over a single base")
        if len(self.components) != self.source.base.size:
            raise ValueError("one component per base point is required")
        for i, f in enumerate(self.components):
            if f.dom != self.source.at(i) or f.cod != self.target.at(i):
                raise ValueError(f"component {i} endpoints mismatch")


# ---------------------------------------------------------------------------
# Stochastic bundles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DMarkObject:
    """A bundle: a finite carrier mapped onto a base of outcomes."""

    bundle: FiniteFunction

    @property
    def carrier(self) -> FinSet:
        return self.bundle.dom

    @property
    def base(self) -> FinSet:
        return self.bundle.cod


@dataclass(frozen=True)
class DMarkMorphism:
    """A kernel over a base map between bundles; the external/total form."""

    kernel: FiniteKernel
    base_map: FiniteFunction


@dataclass(frozen=True)
class DMarkFibreMorphism:
    """A kernel between bundles over a shared base, fibre-preserving exactly."""

    source: DMarkObject
    target: DMarkObject
    kernel: FiniteKernel

    def __post_init__(self):
        if self.source.base != self.target.base:
            raise ValueError("fibre morphisms live over a single base")
        if (
            self.kernel.dom != self.source.carrier
            or self.kernel.cod != self.target.carrier
        ):
            raise ValueError("kernel endpoints do not match the bundle carriers")
        for a in self.source.carrier:
            point = self.source.bundle(a)
            for b in self.target.carrier:
                if self.kernel.weight(a, b) > 0 and self.target.bundle(b) != point:
                    raise ValueError("kernel moves mass across fibres")


def validate_dmark(m: DMarkMorphism, src: DMarkObject, tgt: DMarkObject) -> bool:
    """Exact support check: positive mass stays over the mapped base point."""
    if m.kernel.dom != src.carrier or m.kernel.cod != tgt.carrier:
        raise ValueError("kernel endpoints do not match the bundle carriers")
    if m.base_map.dom != src.base or m.base_map.cod != tgt.base:
        raise ValueError("base map endpoints do not match the bundle bases")
    for a in src.carrier:
        expected = m.base_map(src.bundle(a))
        for b in tgt.carrier:
            if m.kernel.weight(a, b) > 0 and tgt.bundle(b) != expected:
                return False
    return True


def compose_dmark(m1: DMarkMorphism, m2: DMarkMorphism) -> DMarkMorphism:
    return DMarkMorphism(
        compose_kernel(m1.kernel, m2.kernel),
        compose_fn(m1.base_map, m2.base_map),
    )


# ---------------------------------------------------------------------------
# The Fam instance
# ---------------------------------------------------------------------------


class FamBifibration:
    """Families of finite sets; pullback reindexes, pushforward sums fibres."""

    name = "fam"

    def fibre_objects(self, base: FinSet, size_bound: int) -> list[FamObject]:
        sizes = [FinSet(n) for n in range(size_bound + 1)]
        return [
            FamObject(base, combo)
            for combo in itertools.product(sizes, repeat=base.size)
        ]

    def fibre_morphisms(self, a: FamObject, b: FamObject) -> list[FamMorphism]:
        per_point = [all_functions(a.at(i), b.at(i)) for i in a.base]
        return [FamMorphism(a, b, combo) for combo in itertools.product(*per_point)]

    def fibre_hom_count(self, a: FamObject, b: FamObject) -> int:
        total = 1
        for i in a.base:
            total *= len(all_functions(a.at(i), b.at(i)))
        return total

    def fibre_identity(self, a: FamObject) -> FamMorphism:
        return FamMorphism(a, a, tuple(identity_fn(a.at(i)) for i in a.base))

    def fibre_compose(self, f: FamMorphism, g: FamMorphism) -> FamMorphism:
        if f.target != g.source:
            raise CompositionError("fibre morphisms do not compose")
        return FamMorphism(
            f.source,
            g.target,
            tuple(compose_fn(fc, gc) for fc, gc in zip(f.components, g.components)),
        )

    def is_iso(self, f: FamMorphism) -> bool:
        return all(
            c.dom.size == c.cod.size and len(set(c.table)) == c.dom.size
            for c in f.components
        )

    def pullback_obj(self, f: FiniteFunction, obj: FamObject) -> FamObject:
        if obj.base != f.cod:
            raise ValueError("object does not live over the codomain")
        return FamObject(f.dom, tuple(obj.at(f(i)) for i in f.dom))

    def pullback_mor(self, f: FiniteFunction, mor: FamMorphism) -> FamMorphism:
        return FamMorphism(
            self.pullback_obj(f, mor.source),
            self.pullback_obj(f, mor.target),
            tuple(mor.components[f(i)] for i in f.dom),
        )

    def _blocks(self, f: FiniteFunction) -> dict[int, list[int]]:
        blocks: dict[int, list[int]] = {j: [] for j in f.cod}
        for i in f.dom:
            blocks[f(i)].append(i)
        return blocks

    def pushforward_obj(self, f: FiniteFunction, obj: FamObject) -> FamObject:
        if obj.base != f.dom:
            raise ValueError("object does not live over the domain")
        blocks = self._blocks(f)
        return FamObject(
            f.cod,
            tuple(FinSet(sum(obj.at(i).size for i in blocks[j])) for j in f.cod),
        )

    def pushforward_offsets(self, f: FiniteFunction, obj: FamObject) -> dict[int, int]:
        """Block offset of each domain point inside its pushforward fibre."""
        blocks = self._blocks(f)
        offsets = {}
        for j in f.cod:
            acc = 0
            for i in blocks[j]:
                offsets[i] = acc
                acc += obj.at(i).size
        return offsets

    def pushforward_mor(self, f: FiniteFunction, mor: FamMorphism) -> FamMorphism:
        src = self.pushforward_obj(f, mor.source)
        tgt = self.pushforward_obj(f, mor.target)
        blocks = self._blocks(f)
        tgt_offsets = self.pushforward_offsets(f, mor.target)
        components = []
        for j in f.cod:
            table = []
            for i in blocks[j]:
                table.extend(tgt_offsets[i] + v for v in mor.components[i].table)
            components.append(FiniteFunction(src.at(j), tgt.at(j), tuple(table)))
        return FamMorphism(src, tgt, tuple(components))

    def unit(self, f: FiniteFunction, obj: FamObject) -> FamMorphism:
        """obj -> f* f_! obj, the block injection at each point."""
        target = self.pullback_obj(f, self.pushforward_obj(f, obj))
        offsets = self.pushforward_offsets(f, obj)
        components = tuple(
            FiniteFunction(
                obj.at(i),
                target.at(i),
                tuple(offsets[i] + v for v in range(obj.at(i).size)),
            )
            for i in f.dom
        )
        return FamMorphism(obj, target, components)

    def counit(self, f: FiniteFunction, obj: FamObject) -> FamMorphism:
        """f_! f* obj -> obj, folding all blocks back onto the fibre."""
        source = self.pushforward_obj(f, self.pullback_obj(f, obj))
        blocks = self._blocks(f)
        components = []
        for j in f.cod:
            table = []
            for _ in blocks[j]:
                table.extend(range(obj.at(j).size))
            components.append(FiniteFunction(source.at(j), obj.at(j), tuple(table)))
        return FamMorphism(source, obj, tuple(components))

    def tensor_obj(self, a: FamObject, b: FamObject) -> FamObject:
        if a.base != b.base:
            raise ValueError("tensor requires a shared base")
        return FamObject(
            a.base, tuple(FinSet(a.at(i).size * b.at(i).size) for i in a.base)
        )

    def unit_obj(self, base: FinSet) -> FamObject:
        return FamObject(base, tuple(FinSet(1) for _ in base))


# ---------------------------------------------------------------------------
# The DMark instance
# ---------------------------------------------------------------------------


def dmark_pullback_elements(f: FiniteFunction, obj: DMarkObject) -> list[tuple[int, int]]:
    """Elements (x, b) with f(x) = bundle(b), in x-major order."""
    return [(x, b) for x in f.dom for b in obj.carrier if obj.bundle(b) == f(x)]


def dmark_tensor_elements(a: DMarkObject, b: DMarkObject) -> list[tuple[int, int]]:
    """Elements (u, v) with matching bundle values, in u-major order."""
    return [
        (u, v) for u in a.carrier for v in b.carrier if a.bundle(u) == b.bundle(v)
    ]


class DMarkBifibration:
    """Bundles with stochastic fibre maps over finite sets of outcomes."""

    name = "dmark"

    def __init__(self, denominators: Sequence[int] = (1, 2, 3)):
        self.denominators = tuple(denominators)

    def fibre_objects(self, base: FinSet, size_bound: int) -> list[DMarkObject]:
        out = []
        for carrier_size in range(size_bound + 1):
            for table in all_functions(FinSet(carrier_size), base):
                out.append(DMarkObject(table))
        return out

    def fibre_morphisms(self, a: DMarkObject, b: DMarkObject) -> list[DMarkFibreMorphism]:
        if a.base != b.base:
            raise ValueError("fibre morphisms live over a single base")
        per_row = []
        for u in a.carrier:
            fibre = [v for v in b.carrier if b.bundle(v) == a.bundle(u)]
            rows = []
            for d in grid_distributions(FinSet(len(fibre)), self.denominators):
                weights = [Fraction(0)] * b.carrier.size
                for pos, v in enumerate(fibre):
                    weights[v] = d.weights[pos]
                rows.append(FiniteDistribution(b.carrier, tuple(weights)))
            per_row.append(rows)
        return [
            DMarkFibreMorphism(a, b, FiniteKernel(a.carrier, b.carrier, rows))
            for rows in itertools.product(*per_row)
        ]

    def fibre_hom_count(self, a: DMarkObject, b: DMarkObject) -> int:
        cache: dict[int, int] = {}
        total = 1
        for u in a.carrier:
            fsize = sum(1 for v in b.carrier if b.bundle(v) == a.bundle(u))
            if fsize not in cache:
                cache[fsize] = len(grid_distributions(FinSet(fsize), self.denominators))
            total *= cache[fsize]
        return total

    def fibre_identity(self, a: DMarkObject) -> DMarkFibreMorphism:
        return DMarkFibreMorphism(a, a, identity_kernel(a.carrier))

    def fibre_compose(
        self, f: DMarkFibreMorphism, g: DMarkFibreMorphism
    ) -> DMarkFibreMorphism:
        if f.target != g.source:
            raise CompositionError("fibre morphisms do not compose")
        return DMarkFibreMorphism(f.source, g.target, compose_kernel(f.kernel, g.kernel))

    def is_iso(self, f: DMarkFibreMorphism) -> bool:
        k = f.kernel
        if k.dom.size != k.cod.size:
            return False
        images = []
        for a in k.dom:
            support = k.rows[a].support()
            if len(support) != 1 or k.weight(a, support[0]) != 1:
                return False
            images.append(support[0])
        return len(set(images)) == k.dom.size

    def pullback_obj(self, f: FiniteFunction, obj: DMarkObject) -> DMarkObject:
        elements = dmark_pullback_elements(f, obj)
        table = tuple(x for x, _ in elements)
        return DMarkObject(FiniteFunction(FinSet(len(elements)), f.dom, table))

    def pullback_mor(self, f: FiniteFunction, mor: DMarkFibreMorphism) -> DMarkFibreMorphism:
        src_elems = dmark_pullback_elements(f, mor.source)
        tgt_elems = dmark_pullback_elements(f, mor.target)
        tgt_index = {e: n for n, e in enumerate(tgt_elems)}
        new_src = self.pullback_obj(f, mor.source)
        new_tgt = self.pullback_obj(f, mor.target)
        rows = []
        for x, b in src_elems:
            weights = [Fraction(0)] * len(tgt_elems)
            for bp in mor.target.carrier:
                w = mor.kernel.weight(b, bp)
                if w > 0:
                    weights[tgt_index[(x, bp)]] = w
            rows.append(FiniteDistribution(new_tgt.carrier, tuple(weights)))
        return DMarkFibreMorphism(
            new_src, new_tgt, FiniteKernel(new_src.carrier, new_tgt.carrier, tuple(rows))
        )

    def pushforward_obj(self, f: FiniteFunction, obj: DMarkObject) -> DMarkObject:
        if obj.base != f.dom:
            raise ValueError("object does not live over the domain")
        return DMarkObject(compose_fn(obj.bundle, f))

    def pushforward_mor(self, f: FiniteFunction, mor: DMarkFibreMorphism) -> DMarkFibreMorphism:
        return DMarkFibreMorphism(
            self.pushforward_obj(f, mor.source),
            self.pushforward_obj(f, mor.target),
            mor.kernel,
        )

    def unit(self, f: FiniteFunction, obj: DMarkObject) -> DMarkFibreMorphism:
        """obj -> f* f_! obj as a deterministic kernel."""
        pushed = self.pushforward_obj(f, obj)
        elements = dmark_pullback_elements(f, pushed)
        index = {e: n for n, e in enumerate(elements)}
        target = self.pullback_obj(f, pushed)
        rows = tuple(
            dirac(target.carrier, index[(obj.bundle(a), a)]) for a in obj.carrier
        )
        return DMarkFibreMorphism(
            obj, target, FiniteKernel(obj.carrier, target.carrier, rows)
        )

    def counit(self, f: FiniteFunction, obj: DMarkObject) -> DMarkFibreMorphism:
        """f_! f* obj -> obj, projecting pullback pairs onto their second leg."""
        pulled = self.pullback_obj(f, obj)
        elements = dmark_pullback_elements(f, obj)
        rows = tuple(dirac(obj.carrier, b) for _, b in elements)
        return DMarkFibreMorphism(
            self.pushforward_obj(f, pulled),
            obj,
            FiniteKernel(pulled.carrier, obj.carrier, rows),
        )

    def tensor_obj(self, a: DMarkObject, b: DMarkObject) -> DMarkObject:
        elements = dmark_tensor_elements(a, b)
        table = tuple(a.bundle(u) for u, _ in elements)
        return DMarkObject(FiniteFunction(FinSet(len(elements)), a.base, table))

    def unit_obj(self, base: FinSet) -> DMarkObject:
        return DMarkObject(identity_fn(base))


def fam_instance() -> FamBifibration:
    return FamBifibration()


def dmark_instance(denominators: Sequence[int] = (1, 2, 3)) -> DMarkBifibration:
    return DMarkBifibration(denominators)


def apply_pullback(inst, f: FiniteFunction, obj):
    return inst.pullback_obj(f, obj)


def apply_pushforward(inst, f: FiniteFunction, obj):
    return inst.pushforward_obj(f, obj)


# ---------------------------------------------------------------------------
# Pullback squares and the Beck-Chevalley comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PullbackSquare:
    """A commuting square: apex over I and J, cospan f: I -> K <- J : g."""

    apex: FinSet
    to_i: FiniteFunction
    to_j: FiniteFunction
    f: FiniteFunction
    g: FiniteFunction


def is_pullback_square(sq: PullbackSquare) -> bool:
    if sq.to_i.dom != sq.apex or sq.to_j.dom != sq.apex:
        return False
    if sq.f.dom != sq.to_i.cod or sq.g.dom != sq.to_j.cod:
        return False
    if sq.f.cod != sq.g.cod:
        return False
    if compose_fn(sq.to_i, sq.f) != compose_fn(sq.to_j, sq.g):
        return False
    pairs = {(i, j) for i in sq.f.dom for j in sq.g.dom if sq.f(i) == sq.g(j)}
    seen = {(sq.to_i(p), sq.to_j(p)) for p in sq.apex}
    return len(seen) == sq.apex.size and seen == pairs


def canonical_pullback_square(f: FiniteFunction, g: FiniteFunction) -> PullbackSquare:
    """The pullback of a cospan, with i-major pair enumeration."""
    if f.cod != g.cod:
        raise ValueError("cospan legs must share a codomain")
    pairs = [(i, j) for i in f.dom for j in g.dom if f(i) == g(j)]
    apex = FinSet(len(pairs))
    return PullbackSquare(
        apex,
        FiniteFunction(apex, f.dom, tuple(i for i, _ in pairs)),
        FiniteFunction(apex, g.dom, tuple(j for _, j in pairs)),
        f,
        g,
    )


def enumerate_pullback_squares(size_bound: int) -> list[PullbackSquare]:
    sizes = [FinSet(n) for n in range(size_bound + 1)]
    return [
        canonical_pullback_square(f, g)
        for i_obj in sizes
        for j_obj in sizes
        for k_obj in sizes
        for f in all_functions(i_obj, k_obj)
        for g in all_functions(j_obj, k_obj)
    ]


def beck_chevalley_mate(inst, sq: PullbackSquare, obj):
    """The canonical comparison (to_j)_! (to_i)^* obj -> g^* f_! obj."""
    lifted_unit = inst.pullback_mor(sq.to_i, inst.unit(sq.f, obj))
    pushed = inst.pushforward_mor(sq.to_j, lifted_unit)
    counit = inst.counit(
        sq.to_j, inst.pullback_obj(sq.g, inst.pushforward_obj(sq.f, obj))
    )
    return inst.fibre_compose(pushed, counit)


def check_beck_chevalley(inst, sq: PullbackSquare, size_bound: int) -> LawReport:
    """Mate isomorphism on every enumerated fibre object over the cospan domain."""
    if not is_pullback_square(sq):
        raise ValueError("the square is not a pullback")
    violations = []
    checks = 0
    for obj in inst.fibre_objects(sq.f.dom, size_bound):
        mate = beck_chevalley_mate(inst, sq, obj)
        checks += 1
        if not inst.is_iso(mate):
            violations.append(
                LawViolation(
                    "beck-chevalley",
                    (sq, obj),
                    "canonical comparison is not an isomorphism",
                )
            )
    return LawReport(
        subject=f"beck-chevalley[{inst.name}]",
        objects=checks,
        morphisms=checks,
        checks=checks,
        violations=tuple(violations),
    )


def check_adjunction_triangles(inst, f: FiniteFunction, size_bound: int) -> LawReport:
    """Both triangle identities for pushforward -| pullback along f."""
    violations = []
    checks = 0
    for obj in inst.fibre_objects(f.dom, size_bound):
        checks += 1
        lhs = inst.fibre_compose(
            inst.pushforward_mor(f, inst.unit(f, obj)),
            inst.counit(f, inst.pushforward_obj(f, obj)),
        )
        if lhs != inst.fibre_identity(inst.pushforward_obj(f, obj)):
            violations.append(
                LawViolation(
                    "triangle-pushforward", (f, obj), "counit . f_!(unit) != id"
                )
            )
    for obj in inst.fibre_objects(f.cod, size_bound):
        checks += 1
        pulled = inst.pullback_obj(f, obj)
        rhs = inst.fibre_compose(
            inst.unit(f, pulled), inst.pullback_mor(f, inst.counit(f, obj))
        )
        if rhs != inst.fibre_identity(pulled):
            violations.append(
                LawViolation("triangle-pullback", (f, obj), "f*(counit) . unit != id")
            )
    return LawReport(
        subject=f"adjunction-triangles[{inst.name}]",
        objects=checks,
        morphisms=checks,
        checks=checks,
        violations=tuple(violations),
    )


def check_adjunction_hom_counts(inst, f: FiniteFunction, size_bound: int) -> LawReport:
    """|hom(f_! X, Z)| = |hom(X, f* Z)| over all enumerated objects."""
    violations = []
    checks = 0
    for x_obj in inst.fibre_objects(f.dom, size_bound):
        pushed = inst.pushforward_obj(f, x_obj)
        for z_obj in inst.fibre_objects(f.cod, size_bound):
            checks += 1
            left = inst.fibre_hom_count(pushed, z_obj)
            right = inst.fibre_hom_count(x_obj, inst.pullback_obj(f, z_obj))
            if left != right:
                violations.append(
                    LawViolation(
                        "adjunction-hom-count",
                        (f, x_obj, z_obj),
                        f"{left} != {right}",
                    )
                )
    return LawReport(
        subject=f"adjunction-hom-counts[{inst.name}]",
        objects=checks,
        morphisms=checks,
        checks=checks,
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# Fibre optics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FibrePair:
    base: FinSet
    left: object
    right: object


@dataclass(frozen=True)
class FibreOptic:
    instance: str
    source: FibrePair
    target: FibrePair
    residual: object
    forward: object
    backward: object


def base_projections(i: FinSet, j: FinSet) -> tuple[FiniteFunction, FiniteFunction]:
    w = product_witness(i, j)
    to_i = FiniteFunction(w.carrier, i, tuple(w.unpair(p)[0] for p in w.carrier))
    to_j = FiniteFunction(w.carrier, j, tuple(w.unpair(p)[1] for p in w.carrier))
    return to_i, to_j


def triple_projections(i: FinSet, j: FinSet, k: FinSet):
    """Projections of the row-major triple product onto its three face pairs."""
    total = FinSet(i.size * j.size * k.size)
    wij = product_witness(i, j)
    wjk = product_witness(j, k)
    wik = product_witness(i, k)
    t_ij, t_jk, t_ik = [], [], []
    for p in total:
        ij, kk = divmod(p, k.size)
        ii, jj = divmod(ij, j.size)
        t_ij.append(wij.pair(ii, jj))
        t_jk.append(wjk.pair(jj, kk))
        t_ik.append(wik.pair(ii, kk))
    return (
        FiniteFunction(total, wij.carrier, tuple(t_ij)),
        FiniteFunction(total, wjk.carrier, tuple(t_jk)),
        FiniteFunction(total, wik.carrier, tuple(t_ik)),
    )


def fibre_optic_spaces(inst, source: FibrePair, target: FibrePair, residual):
    """The forward codomain and backward domain objects over the source base."""
    to_i, to_j = base_projections(source.base, target.base)
    fwd_cod = inst.pushforward_obj(
        to_i, inst.tensor_obj(residual, inst.pullback_obj(to_j, target.left))
    )
    bwd_dom = inst.pushforward_obj(
        to_i, inst.tensor_obj(inst.pullback_obj(to_j, target.right), residual)
    )
    return fwd_cod, bwd_dom


def residual_convolution(inst, i: FinSet, j: FinSet, k: FinSet, m, n):
    """pi_IK_!(pi_IJ* m  tensor  pi_JK* n) over the product base."""
    p_ij, p_jk, p_ik = triple_projections(i, j, k)
    return inst.pushforward_obj(
        p_ik, inst.tensor_obj(inst.pullback_obj(p_ij, m), inst.pullback_obj(p_jk, n))
    )


def identity_fibre_optic(inst, pair: FibrePair) -> FibreOptic:
    """Residual: the diagonal pushforward of the fibrewise unit."""
    base = pair.base
    w = product_witness(base, base)
    diagonal = FiniteFunction(base, w.carrier, tuple(w.pair(i, i) for i in base))
    residual = inst.pushforward_obj(diagonal, inst.unit_obj(base))
    fwd_cod, bwd_dom = fibre_optic_spaces(inst, pair, pair, residual)
    if inst.name == "fam":
        forward = FamMorphism(
            pair.left,
            fwd_cod,
            tuple(identity_fn(pair.left.at(i)) for i in base),
        )
        backward = FamMorphism(
            bwd_dom,
            pair.right,
            tuple(identity_fn(pair.right.at(i)) for i in base),
        )
    else:
        fwd_index = {
            e: n
            for n, e in enumerate(
                dmark_forward_elements(inst, base, pair, residual)
            )
        }
        rows = tuple(
            dirac(fwd_cod.carrier, fwd_index[(pair.left.bundle(a), a)])
            for a in pair.left.carrier
        )
        forward = DMarkFibreMorphism(
            pair.left, fwd_cod, FiniteKernel(pair.left.carrier, fwd_cod.carrier, rows)
        )
        bwd_elems = dmark_backward_elements(inst, base, pair, residual)
        rows_b = tuple(dirac(pair.right.carrier, yp) for yp, _ in bwd_elems)
        backward = DMarkFibreMorphism(
            bwd_dom, pair.right, FiniteKernel(bwd_dom.carrier, pair.right.carrier, rows_b)
        )
    return FibreOptic(inst.name, pair, pair, residual, forward, backward)


def dmark_forward_elements(
    inst, source_base: FinSet, target: FibrePair, residual
) -> list[tuple[int, int]]:
    """Forward-carrier descriptors (residual element, target-left element).

    The residual element's bundle value determines the pair (i, j), and the
    target element sits over j, so the pair is a faithful description.
    """
    _, to_j = base_projections(source_base, target.base)
    pulled = inst.pullback_obj(to_j, target.left)
    pull_elems = dmark_pullback_elements(to_j, target.left)
    return [
        (m, pull_elems[v][1]) for m, v in dmark_tensor_elements(residual, pulled)
    ]


def dmark_backward_elements(
    inst, source_base: FinSet, target: FibrePair, residual
) -> list[tuple[int, int]]:
    """Backward-carrier descriptors (target-right element, residual element)."""
    _, to_j = base_projections(source_base, target.base)
    pulled = inst.pullback_obj(to_j, target.right)
    pull_elems = dmark_pullback_elements(to_j, target.right)
    return [
        (pull_elems[v][1], m) for v, m in dmark_tensor_elements(pulled, residual)
    ]


# ---------------------------------------------------------------------------
# Specialization to indexed optics, and composition
# ---------------------------------------------------------------------------


def fam_pair_from_family(fam: IndexedFamily) -> FibrePair:
    base = fam.index
    return FibrePair(
        base,
        FamObject(base, tuple(c[0] for c in fam.components)),
        FamObject(base, tuple(c[1] for c in fam.components)),
    )


def fibre_to_indexed(o: FibreOptic) -> IndexedOptic:
    """Unpack a family-instance fibre optic into its residual-matrix form.

    The carrier conventions line up on the nose, so the per-index parts are
    reused verbatim.
    """
    if o.instance != "fam":
        raise ValueError("only the family instance specialises to indexed optics")
    i_set, j_set = o.source.base, o.target.base
    w = product_witness(i_set, j_set)
    matrix = ResidualMatrix(
        i_set,
        j_set,
        tuple(tuple(o.residual.at(w.pair(i, j)) for j in j_set) for i in i_set),
    )
    src = IndexedFamily(
        i_set, tuple((o.source.left.at(i), o.source.right.at(i)) for i in i_set)
    )
    tgt = IndexedFamily(
        j_set, tuple((o.target.left.at(j), o.target.right.at(j)) for j in j_set)
    )
    return IndexedOptic(src, tgt, matrix, o.forward.components, o.backward.components)


def indexed_to_fibre(o: IndexedOptic) -> FibreOptic:
    """The inverse repackaging of fibre_to_indexed."""
    inst = fam_instance()
    i_set, j_set = o.source.index, o.target.index
    w = product_witness(i_set, j_set)
    residual = FamObject(
        w.carrier, tuple(o.matrix.entry(*w.unpair(p)) for p in w.carrier)
    )
    src_pair = fam_pair_from_family(o.source)
    tgt_pair = fam_pair_from_family(o.target)
    fwd_cod, bwd_dom = fibre_optic_spaces(inst, src_pair, tgt_pair, residual)
    forward = FamMorphism(src_pair.left, fwd_cod, o.forwards)
    backward = FamMorphism(bwd_dom, src_pair.right, o.backwards)
    return FibreOptic("fam", src_pair, tgt_pair, residual, forward, backward)


def _fam_compose_parts(o1: FibreOptic, o2: FibreOptic, residual):
    from .indexed import bwd_decode, bwd_encode, bwd_layout, fwd_decode, fwd_layout

    inst = fam_instance()
    i_set, j_set, k_set = o1.source.base, o1.target.base, o2.target.base
    wij = product_witness(i_set, j_set)
    wjk = product_witness(j_set, k_set)
    wik = product_witness(i_set, k_set)
    ys = [o1.target.left.at(j) for j in j_set]
    yps = [o1.target.right.at(j) for j in j_set]
    zs = [o2.target.left.at(k) for k in k_set]
    zps = [o2.target.right.at(k) for k in k_set]
    fwd_cod, bwd_dom = fibre_optic_spaces(
        inst, o1.source, o2.target, residual
    )
    forwards, backwards = [], []
    for i in i_set:
        row_m = [o1.residual.at(wij.pair(i, j)) for j in j_set]
        row_r = [residual.at(wik.pair(i, k)) for k in k_set]
        foffs_m, _ = fwd_layout(row_m, ys)
        boffs_m, _ = bwd_layout(row_m, yps)
        foffs_r, fsize_r = fwd_layout(row_r, zs)
        boffs_r, bsize_r = bwd_layout(row_r, zps)
        # Offsets of the j-block inside the convolved entry at (i, k).
        entry_off = {}
        for k in k_set:
            acc = 0
            for j in j_set:
                entry_off[j, k] = acc
                acc += o1.residual.at(wij.pair(i, j)).size * o2.residual.at(
                    wjk.pair(j, k)
                ).size
        f_table = []
        for x in o1.source.left.at(i):
            j, m, y = fwd_decode(foffs_m, row_m, ys, o1.forward.components[i](x))
            row_n = [o2.residual.at(wjk.pair(j, k)) for k in k_set]
            foffs_n, _ = fwd_layout(row_n, zs)
            k, n, z = fwd_decode(foffs_n, row_n, zs, o2.forward.components[j](y))
            r_inner = entry_off[j, k] + m * o2.residual.at(wjk.pair(j, k)).size + n
            f_table.append(foffs_r[k] + r_inner * zs[k].size + z)
        forwards.append(
            FiniteFunction(o1.source.left.at(i), FinSet(fsize_r), tuple(f_table))
        )
        b_table = []
        for value in range(bsize_r):
            k, zp, r_inner = bwd_decode(boffs_r, row_r, zps, value)
            j = max(jj for jj in j_set if entry_off[jj, k] <= r_inner)
            rem = r_inner - entry_off[j, k]
            n_size = o2.residual.at(wjk.pair(j, k)).size
            m, n = divmod(rem, n_size)
            row_n = [o2.residual.at(wjk.pair(j, k2)) for k2 in k_set]
            boffs_n, _ = bwd_layout(row_n, zps)
            yp = o2.backward.components[j](bwd_encode(boffs_n, row_n, zps, k, zp, n))
            b_table.append(
                o1.backward.components[i](bwd_encode(boffs_m, row_m, yps, j, yp, m))
            )
        backwards.append(
            FiniteFunction(FinSet(bsize_r), o1.source.right.at(i), tuple(b_table))
        )
    forward = FamMorphism(o1.source.left, fwd_cod, tuple(forwards))
    backward = FamMorphism(bwd_dom, o1.source.right, tuple(backwards))
    return forward, backward


def _dmark_compose_parts(inst, o1: FibreOptic, o2: FibreOptic, residual):
    i_set, j_set, k_set = o1.source.base, o1.target.base, o2.target.base
    p_ij, p_jk, p_ik = triple_projections(i_set, j_set, k_set)
    pb_ij = inst.pullback_obj(p_ij, o1.residual)
    pb_jk = inst.pullback_obj(p_jk, o2.residual)
    pull_ij = dmark_pullback_elements(p_ij, o1.residual)
    pull_jk = dmark_pullback_elements(p_jk, o2.residual)
    r_desc = [
        (pull_ij[u][1], pull_jk[v][1])
        for u, v in dmark_tensor_elements(pb_ij, pb_jk)
    ]
    r_index = {desc: n for n, desc in enumerate(r_desc)}

    e1 = dmark_forward_elements(inst, i_set, o1.target, o1.residual)
    e2 = dmark_forward_elements(inst, j_set, o2.target, o2.residual)
    ec = dmark_forward_elements(inst, i_set, o2.target, residual)
    ec_index = {desc: n for n, desc in enumerate(ec)}
    fwd_cod, bwd_dom = fibre_optic_spaces(inst, o1.source, o2.target, residual)
    rows = []
    for x in o1.source.left.carrier:
        weights = [Fraction(0)] * fwd_cod.carrier.size
        for idx1, (m, y) in enumerate(e1):
            w1 = o1.forward.kernel.weight(x, idx1)
            if w1 == 0:
                continue
            for idx2, (n, z) in enumerate(e2):
                w2 = o2.forward.kernel.weight(y, idx2)
                if w2 == 0:
                    continue
                weights[ec_index[(r_index[(m, n)], z)]] += w1 * w2
        rows.append(FiniteDistribution(fwd_cod.carrier, tuple(weights)))
    forward = DMarkFibreMorphism(
        o1.source.left,
        fwd_cod,
        FiniteKernel(o1.source.left.carrier, fwd_cod.carrier, tuple(rows)),
    )

    e1b = dmark_backward_elements(inst, i_set, o1.target, o1.residual)
    e2b = dmark_backward_elements(inst, j_set, o2.target, o2.residual)
    ecb = dmark_backward_elements(inst, i_set, o2.target, residual)
    e1b_index = {desc: n for n, desc in enumerate(e1b)}
    e2b_index = {desc: n for n, desc in enumerate(e2b)}
    rows_b = []
    for zp, r in ecb:
        m, n = r_desc[r]
        weights = [Fraction(0)] * o1.source.right.carrier.size
        mid = o2.backward.kernel.rows[e2b_index[(zp, n)]]
        for yp in o1.target.right.carrier:
            w_mid = mid.weights[yp]
            if w_mid == 0:
                continue
            inner = o1.backward.kernel.rows[e1b_index[(yp, m)]]
            for xp in o1.source.right.carrier:
                weights[xp] += w_mid * inner.weights[xp]
        rows_b.append(FiniteDistribution(o1.source.right.carrier, tuple(weights)))
    backward = DMarkFibreMorphism(
        bwd_dom,
        o1.source.right,
        FiniteKernel(bwd_dom.carrier, o1.source.right.carrier, tuple(rows_b)),
    )
    return forward, backward


def fibre_optic_compose(o1: FibreOptic, o2: FibreOptic, inst) -> FibreOptic:
    """Composite along the matrix-convolution residual over the product base."""
    if o1.instance != inst.name or o2.instance != inst.name:
        raise ValueError("optics do not belong to this bifibration instance")
    if o1.target != o2.source:
        raise CompositionError("fibre optic target does not match the next source")
    i_set, j_set, k_set = o1.source.base, o1.target.base, o2.target.base
    residual = residual_convolution(inst, i_set, j_set, k_set, o1.residual, o2.residual)
    if inst.name == "fam":
        forward, backward = _fam_compose_parts(o1, o2, residual)
    else:
        forward, backward = _dmark_compose_parts(inst, o1, o2, residual)
    return FibreOptic(inst.name, o1.source, o2.target, residual, forward, backward)
