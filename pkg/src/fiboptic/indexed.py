"""Set-indexed optics: residual matrices with per-index forward/backward parts.

Composition multiplies residual matrices, with every carrier reshuffle built
from explicit distributor, multiplicator and interchange bijections in a
fixed fold order (ascending block index throughout).  Normalization to
dependent lenses is the equality test for everything here.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from . import _kernel
from .fincat import (
    CompositionError,
    EnumerationCeilingError,
    FinSet,
    FiniteFunction,
    all_functions,
    compose_fn,
)
from .lens import Container, DepLens, Pair


@dataclass(frozen=True)
class IndexedFamily:
    """A finite index with one (forward object, backward object) pair per point."""

    index: FinSet
    components: tuple[Pair, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) != self.index.size:
            raise ValueError("one component pair per index point is required")


@dataclass(frozen=True)
class ResidualMatrix:
    rows: FinSet
    cols: FinSet
    entries: tuple[tuple[FinSet, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "entries", tuple(tuple(row) for row in self.entries)
        )
        if len(self.entries) != self.rows.size:
            raise ValueError("entry grid must have one row per row index")
        for row in self.entries:
            if len(row) != self.cols.size:
                raise ValueError("entry grid must have one column per column index")

    def entry(self, i: int, j: int) -> FinSet:
        return self.entries[i][j]


def fwd_layout(row: Sequence[FinSet], ys: Sequence[FinSet]):
    """Offsets and total size of sum_j M_j x Y_j (ascending j, row-major blocks)."""
    offsets, acc = [], 0
    for m, y in zip(row, ys):
        offsets.append(acc)
        acc += m.size * y.size
    return offsets, acc


def bwd_layout(row: Sequence[FinSet], yps: Sequence[FinSet]):
    """Offsets and total size of sum_j Y'_j x M_j."""
    offsets, acc = [], 0
    for m, yp in zip(row, yps):
        offsets.append(acc)
        acc += yp.size * m.size
    return offsets, acc


def fwd_encode(offsets, row, ys, j, m, y):
    return offsets[j] + m * ys[j].size + y


def fwd_decode(offsets, row, ys, value):
    for j in range(len(row)):
        size = row[j].size * ys[j].size
        if offsets[j] <= value < offsets[j] + size:
            rem = value - offsets[j]
            return j, rem // ys[j].size, rem % ys[j].size
    raise ValueError("value outside the forward carrier")


def bwd_encode(offsets, row, yps, j, yp, m):
    return offsets[j] + yp * row[j].size + m


def bwd_decode(offsets, row, yps, value):
    for j in range(len(row)):
        size = yps[j].size * row[j].size
        if offsets[j] <= value < offsets[j] + size:
            rem = value - offsets[j]
            return j, rem // row[j].size, rem % row[j].size
    raise ValueError("value outside the backward carrier")


@dataclass(frozen=True)
class IndexedOptic:
    source: IndexedFamily
    target: IndexedFamily
    matrix: ResidualMatrix
    forwards: tuple[FiniteFunction, ...]
    backwards: tuple[FiniteFunction, ...]

    def __post_init__(self):
        object.__setattr__(self, "forwards", tuple(self.forwards))
        object.__setattr__(self, "backwards", tuple(self.backwards))
        if self.matrix.rows != self.source.index or self.matrix.cols != self.target.index:
            raise ValueError("matrix shape must match the families")
        ys = [c[0] for c in self.target.components]
        yps = [c[1] for c in self.target.components]
        for i, (x, xp) in enumerate(self.source.components):
            row = self.matrix.entries[i]
            _, fsize = fwd_layout(row, ys)
            _, bsize = bwd_layout(row, yps)
            f, b = self.forwards[i], self.backwards[i]
            if f.dom != x or f.cod.size != fsize:
                raise ValueError(f"forward[{i}] endpoints do not match the coproduct carrier")
            if b.cod != xp or b.dom.size != bsize:
                raise ValueError(f"backward[{i}] endpoints do not match the coproduct carrier")


def _require_cartesian(act):
    if act.kind != "finset-cartesian":
        raise ValueError("indexed optics are instantiated over the cartesian finite-set action")


def identity_matrix(index: FinSet, act) -> ResidualMatrix:
    """Monoidal unit on the diagonal, initial object elsewhere."""
    unit, zero = act.unit(), act.initial()
    entries = tuple(
        tuple(unit if i == j else zero for j in index) for i in index
    )
    return ResidualMatrix(index, index, entries)


def matrix_multiply(m: ResidualMatrix, n: ResidualMatrix, act) -> ResidualMatrix:
    """Entrywise sum over the middle index of tensored entries (ascending fold)."""
    if m.cols != n.rows:
        raise CompositionError("matrix dimensions do not match")
    entries = []
    for i in m.rows:
        row = []
        for k in n.cols:
            size = sum(act.tensor(m.entry(i, j), n.entry(j, k)).size for j in m.cols)
            row.append(FinSet(size))
        entries.append(tuple(row))
    return ResidualMatrix(m.rows, n.cols, tuple(entries))


def identity_indexed_optic(fam: IndexedFamily, act) -> IndexedOptic:
    _require_cartesian(act)
    matrix = identity_matrix(fam.index, act)
    forwards, backwards = [], []
    for x, xp in fam.components:
        forwards.append(FiniteFunction(x, FinSet(x.size), tuple(range(x.size))))
        backwards.append(FiniteFunction(FinSet(xp.size), xp, tuple(range(xp.size))))
    return IndexedOptic(fam, fam, matrix, tuple(forwards), tuple(backwards))


def _block_sum(blocks: Sequence[FiniteFunction]) -> FiniteFunction:
    """The coproduct of morphisms on ascending-offset carriers."""
    dom_total = sum(f.dom.size for f in blocks)
    cod_total = sum(f.cod.size for f in blocks)
    table = []
    cod_off = 0
    for f in blocks:
        table.extend(cod_off + v for v in f.table)
        cod_off += f.cod.size
    return FiniteFunction(FinSet(dom_total), FinSet(cod_total), tuple(table))


def _distribute_left(m: FinSet, parts: Sequence[int]) -> FiniteFunction:
    """m x (sum_k W_k) -> sum_k (m x W_k)."""
    total = sum(parts)
    offsets = list(itertools.accumulate([0] + [m.size * w for w in parts]))[:-1]
    table = [0] * (m.size * total)
    part_offsets = list(itertools.accumulate([0] + list(parts)))[:-1]
    for u in m:
        for k, w in enumerate(parts):
            for val in range(w):
                src = u * total + part_offsets[k] + val
                table[src] = offsets[k] + u * w + val
    return FiniteFunction(FinSet(m.size * total), FinSet(m.size * total), tuple(table))


def _interchange(sizes: Sequence[Sequence[int]]) -> FiniteFunction:
    """sum_j sum_k V[j][k] -> sum_k sum_j V[j][k], ascending offsets both ways."""
    nj, nk = len(sizes), len(sizes[0]) if sizes else 0
    total = sum(sum(row) for row in sizes)
    src_off, acc = {}, 0
    for j in range(nj):
        for k in range(nk):
            src_off[j, k] = acc
            acc += sizes[j][k]
    dst_off, acc = {}, 0
    for k in range(nk):
        for j in range(nj):
            dst_off[j, k] = acc
            acc += sizes[j][k]
    table = [0] * total
    for j in range(nj):
        for k in range(nk):
            for v in range(sizes[j][k]):
                table[src_off[j, k] + v] = dst_off[j, k] + v
    return FiniteFunction(FinSet(total), FinSet(total), tuple(table))


def _collect_left_tensor(entry_sizes: Sequence[int], z: FinSet) -> FiniteFunction:
    """sum_j (P_j x z) -> (sum_j P_j) x z."""
    total_p = sum(entry_sizes)
    table = [0] * (total_p * z.size)
    src = 0
    entry_off = 0
    for p in entry_sizes:
        for u in range(p):
            for zi in z:
                table[src] = (entry_off + u) * z.size + zi
                src += 1
        entry_off += p
    return FiniteFunction(FinSet(total_p * z.size), FinSet(total_p * z.size), tuple(table))


def _distribute_right(zp: FinSet, entry_sizes: Sequence[int]) -> FiniteFunction:
    """zp x (sum_j P_j) -> sum_j (zp x P_j)."""
    total_p = sum(entry_sizes)
    offsets = list(itertools.accumulate([0] + [zp.size * p for p in entry_sizes]))[:-1]
    part_offsets = list(itertools.accumulate([0] + list(entry_sizes)))[:-1]
    table = [0] * (zp.size * total_p)
    for a in zp:
        for j, p in enumerate(entry_sizes):
            for u in range(p):
                src = a * total_p + part_offsets[j] + u
                table[src] = offsets[j] + a * p + u
    return FiniteFunction(FinSet(zp.size * total_p), FinSet(zp.size * total_p), tuple(table))


def _collect_right_param(part_sizes: Sequence[int], m: FinSet) -> FiniteFunction:
    """sum_k (W_k x m) -> (sum_k W_k) x m."""
    total_w = sum(part_sizes)
    table = [0] * (total_w * m.size)
    src = 0
    w_off = 0
    for w in part_sizes:
        for v in range(w):
            for u in m:
                table[src] = (w_off + v) * m.size + u
                src += 1
        w_off += w
    return FiniteFunction(FinSet(total_w * m.size), FinSet(total_w * m.size), tuple(table))


def iopt_compose(o1: IndexedOptic, o2: IndexedOptic, act) -> IndexedOptic:
    """Matrix-multiplication composition with explicit reshuffles."""
    _require_cartesian(act)
    if o1.target != o2.source:
        raise CompositionError("indexed optic target does not match the next source")
    matrix = matrix_multiply(o1.matrix, o2.matrix, act)
    ys = [c[0] for c in o1.target.components]
    yps = [c[1] for c in o1.target.components]
    zs = [c[0] for c in o2.target.components]
    zps = [c[1] for c in o2.target.components]
    ncols = o2.target.index.size
    forwards, backwards = [], []
    for i in o1.source.index:
        row_m = o1.matrix.entries[i]
        # Step 1: apply the next forwards under each residual block.
        blocks = [act.act_mor(row_m[j], o2.forwards[j]) for j in o1.target.index]
        step1 = _block_sum(blocks)
        # Step 2: per block, distribute then apply the multiplicator per column.
        per_j = []
        for j in o1.target.index:
            row_n = o2.matrix.entries[j]
            parts = [row_n[k].size * zs[k].size for k in range(ncols)]
            dist = _distribute_left(row_m[j], parts)
            mults = [
                act.left_mult(row_m[j], row_n[k], zs[k]) for k in range(ncols)
            ]
            per_j.append(compose_fn(dist, _block_sum(mults)))
        step2 = _block_sum(per_j)
        # Step 3: interchange the (j, k) block order to (k, j).
        sizes = [
            [
                row_m[j].size * o2.matrix.entry(j, k).size * zs[k].size
                for k in range(ncols)
            ]
            for j in o1.target.index
        ]
        step3 = (
            _interchange(sizes)
            if sizes
            else FiniteFunction(FinSet(0), FinSet(0), ())
        )
        # Step 4: per column, collapse the tensor blocks into the matrix entry.
        collects = []
        for k in range(ncols):
            entry_sizes = [
                row_m[j].size * o2.matrix.entry(j, k).size for j in o1.target.index
            ]
            collects.append(_collect_left_tensor(entry_sizes, zs[k]))
        step4 = _block_sum(collects)
        forward = compose_fn(
            compose_fn(compose_fn(compose_fn(o1.forwards[i], step1), step2), step3),
            step4,
        )
        forwards.append(forward)

        # Backward chain, dual order.
        expanders = []
        for k in range(ncols):
            entry_sizes = [
                row_m[j].size * o2.matrix.entry(j, k).size for j in o1.target.index
            ]
            expanders.append(_distribute_right(zps[k], entry_sizes))
        stepA = _block_sum(expanders)
        sizesB = [
            [
                zps[k].size * row_m[j].size * o2.matrix.entry(j, k).size
                for j in o1.target.index
            ]
            for k in range(ncols)
        ]
        stepB = (
            _interchange(sizesB)
            if sizesB
            else FiniteFunction(FinSet(0), FinSet(0), ())
        )
        per_j_back = []
        for j in o1.target.index:
            row_n = o2.matrix.entries[j]
            mults = [
                act.right_mult(zps[k], row_m[j], row_n[k]) for k in range(ncols)
            ]
            part_sizes = [zps[k].size * row_n[k].size for k in range(ncols)]
            collect = _collect_right_param(part_sizes, row_m[j])
            whisker = act.ract_mor_obj(o2.backwards[j], row_m[j])
            per_j_back.append(
                compose_fn(compose_fn(_block_sum(mults), collect), whisker)
            )
        stepC = _block_sum(per_j_back)
        backward = compose_fn(
            compose_fn(compose_fn(stepA, stepB), stepC), o1.backwards[i]
        )
        backwards.append(backward)
    return IndexedOptic(o1.source, o2.target, matrix, tuple(forwards), tuple(backwards))


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def family_to_container(fam: IndexedFamily) -> Container:
    """Positions are the disjoint union of forward parts; directions constant per block."""
    directions = []
    for x, xp in fam.components:
        directions.extend([xp] * x.size)
    return Container(FinSet(len(directions)), tuple(directions))


def position_offsets(fam: IndexedFamily) -> list[int]:
    offs, acc = [], 0
    for x, _ in fam.components:
        offs.append(acc)
        acc += x.size
    return offs


def iopt_to_dlens(o: IndexedOptic) -> DepLens:
    """Normalize to a dependent lens between the glued containers."""
    src_c = family_to_container(o.source)
    tgt_c = family_to_container(o.target)
    src_off = position_offsets(o.source)
    tgt_off = position_offsets(o.target)
    ys = [c[0] for c in o.target.components]
    yps = [c[1] for c in o.target.components]
    forward_table = []
    backward = []
    for i, (x, xp) in enumerate(o.source.components):
        row = o.matrix.entries[i]
        foffs, _ = fwd_layout(row, ys)
        boffs, _ = bwd_layout(row, yps)
        for xi in x:
            j, m, y = fwd_decode(foffs, row, ys, o.forwards[i](xi))
            forward_table.append(tgt_off[j] + y)
            yp = yps[j]
            table = tuple(
                o.backwards[i](bwd_encode(boffs, row, yps, j, ypi, m)) for ypi in yp
            )
            backward.append(FiniteFunction(yp, xp, table))
    forward = FiniteFunction(src_c.positions, tgt_c.positions, tuple(forward_table))
    return DepLens(src_c, tgt_c, forward, tuple(backward))


# ---------------------------------------------------------------------------
# Sliding classes and enumeration
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _row_class_count(
    x: int, xp: int, ys: tuple[int, ...], yps: tuple[int, ...], entry_bound: int
) -> int:
    return _kernel.sliding_component_count(x, xp, list(ys), list(yps), entry_bound)[1]


def count_iopt_sliding_classes(
    src: IndexedFamily, tgt: IndexedFamily, entry_bound: int
) -> int:
    """Number of componentwise-sliding classes of hom data at the entry bound.

    Rows of the residual matrix slide independently (the identity mediator is
    available on every other row), so the class count is the product of the
    per-row sliding-graph component counts.
    """
    ys = tuple(c[0].size for c in tgt.components)
    yps = tuple(c[1].size for c in tgt.components)
    total = 1
    for x, xp in src.components:
        total *= _row_class_count(x.size, xp.size, ys, yps, entry_bound)
    return total


def count_indexed_optics(src: IndexedFamily, tgt: IndexedFamily, entry_bound: int) -> int:
    """Number of representative triples (matrix, forwards, backwards)."""
    ys = tuple(c[0].size for c in tgt.components)
    yps = tuple(c[1].size for c in tgt.components)
    total = 1
    for x, xp in src.components:
        row_total = 0
        for row in itertools.product(range(entry_bound + 1), repeat=len(ys)):
            fsize = sum(m * y for m, y in zip(row, ys))
            bsize = sum(yp * m for m, yp in zip(row, yps))
            row_total += fsize**x.size * xp.size**bsize
        total *= row_total
    return total


def enumerate_indexed_optics(
    src: IndexedFamily, tgt: IndexedFamily, entry_bound: int, ceiling: int = 10**5
):
    """Every representative at the entry bound; refuses above the ceiling."""
    expected = count_indexed_optics(src, tgt, entry_bound)
    if expected > ceiling:
        raise EnumerationCeilingError(
            f"indexed optic enumeration of size {expected} exceeds ceiling {ceiling}"
        )
    ys = [c[0] for c in tgt.components]
    yps = [c[1] for c in tgt.components]
    ncols = tgt.index.size
    per_row_choices = []
    for x, xp in src.components:
        choices = []
        for row in itertools.product(
            [FinSet(s) for s in range(entry_bound + 1)], repeat=ncols
        ):
            _, fsize = fwd_layout(row, ys)
            _, bsize = bwd_layout(row, yps)
            for f in all_functions(x, FinSet(fsize)):
                for b in all_functions(FinSet(bsize), xp):
                    choices.append((row, f, b))
        per_row_choices.append(choices)
    for combo in itertools.product(*per_row_choices):
        entries = tuple(row for row, _, _ in combo)
        matrix = ResidualMatrix(src.index, tgt.index, entries)
        yield IndexedOptic(
            src,
            tgt,
            matrix,
            tuple(f for _, f, _ in combo),
            tuple(b for _, _, b in combo),
        )


def random_indexed_optic(
    rng: random.Random, src: IndexedFamily, tgt: IndexedFamily, entry_bound: int
) -> IndexedOptic:
    """A uniformly structured random representative with nonempty hom data."""
    ys = [c[0] for c in tgt.components]
    yps = [c[1] for c in tgt.components]
    ncols = tgt.index.size
    rows, forwards, backwards = [], [], []
    for x, xp in src.components:
        for _ in range(200):
            row = tuple(FinSet(rng.randint(0, entry_bound)) for _ in range(ncols))
            _, fsize = fwd_layout(row, ys)
            _, bsize = bwd_layout(row, yps)
            if x.size > 0 and fsize == 0:
                continue
            if xp.size == 0 and bsize > 0:
                continue
            break
        else:
            raise ValueError("no nonempty hom data at this entry bound")
        rows.append(row)
        forwards.append(
            FiniteFunction(x, FinSet(fsize), tuple(rng.randrange(fsize) for _ in x))
        )
        backwards.append(
            FiniteFunction(
                FinSet(bsize), xp, tuple(rng.randrange(xp.size) for _ in range(bsize))
            )
        )
    matrix = ResidualMatrix(src.index, tgt.index, tuple(rows))
    return IndexedOptic(src, tgt, matrix, tuple(forwards), tuple(backwards))


# ---------------------------------------------------------------------------
# Polynomial-functor cross-check
# ---------------------------------------------------------------------------


def count_polynomial_nat(
    src: IndexedFamily, tgt: IndexedFamily, probe_bound: int
) -> int:
    """Count families natural against every function between probe-sized sets.

    The functors are the coproducts-of-representables built from the family
    data: an element over Y is (index point, map from the backward object
    into Y, element of the forward object).  The count is probe-relative by
    construction; the probe must contain every source backward object.
    """
    for _, xp in src.components:
        if xp.size > probe_bound:
            raise EnumerationCeilingError(
                "probe bound is below a source direction size"
            )
    probes = [FinSet(n) for n in range(probe_bound + 1)]
    g_elements = {
        y.size: [
            (ip, psi, yv)
            for ip, (yc, ypc) in enumerate(tgt.components)
            for psi in all_functions(ypc, y)
            for yv in yc
        ]
        for y in probes
    }

    def g_apply(h: FiniteFunction, element):
        ip, psi, yv = element
        return (ip, compose_fn(psi, h), yv)

    probe_maps = [
        (y, w, h) for y in probes for w in probes for h in all_functions(y, w)
    ]

    def position_count(a: FinSet) -> int:
        valid = 0
        for g in g_elements[a.size]:
            family = {
                y.size: {phi: g_apply(phi, g) for phi in all_functions(a, y)}
                for y in probes
            }
            ok = True
            for y, w, h in probe_maps:
                for phi, value in family[y.size].items():
                    if family[w.size][compose_fn(phi, h)] != g_apply(h, value):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                valid += 1
        return valid

    total = 1
    for x, xp in src.components:
        total *= position_count(xp) ** x.size
    return total
