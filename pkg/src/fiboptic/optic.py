"""Mixed optics with explicit residual representatives.

An optic here is a concrete triple (residual, forward, backward); the usual
quotient is never materialised.  Equivalence is decided by union-find over
the graph generated by residual morphisms sliding between representatives,
sound always and complete relative to a residual size bound.
"""

from __future__ import annotations

import collections
from dataclasses import dataclass
from typing import Sequence

from . import _kernel
from ._unionfind import UnionFind
from .fincat import (
    CompositionError,
    EnumerationCeilingError,
    FinSet,
    FiniteFunction,
    FiniteKernel,
    all_functions,
    compose_fn,
    compose_kernel,
    fn_to_kernel,
    grid_kernels,
    identity_fn,
    identity_kernel,
    kernel_product,
    product_witness,
)
from .lens import Lens, Pair


class SlideError(ValueError):
    """Raised when a requested slide is obstructed or not uniquely determined."""


# ---------------------------------------------------------------------------
# Action instances
# ---------------------------------------------------------------------------


class CartesianFinSetAction:
    """Finite sets acting on themselves by cartesian product (row-major)."""

    kind = "finset-cartesian"

    def tensor(self, m: FinSet, n: FinSet) -> FinSet:
        return FinSet(m.size * n.size)

    def unit(self) -> FinSet:
        return FinSet(1)

    def initial(self) -> FinSet:
        return FinSet(0)

    def act(self, m: FinSet, x: FinSet) -> FinSet:
        return FinSet(m.size * x.size)

    def ract(self, xp: FinSet, m: FinSet) -> FinSet:
        return FinSet(xp.size * m.size)

    def compose(self, f, g):
        return compose_fn(f, g)

    def identity_mor(self, x: FinSet) -> FiniteFunction:
        return identity_fn(x)

    def act_mor(self, m: FinSet, f: FiniteFunction) -> FiniteFunction:
        """Whisker on the left: m x f."""
        w_dom = product_witness(m, f.dom)
        w_cod = product_witness(m, f.cod)
        table = [0] * w_dom.carrier.size
        for u in m:
            for a in f.dom:
                table[w_dom.pair(u, a)] = w_cod.pair(u, f(a))
        return FiniteFunction(w_dom.carrier, w_cod.carrier, tuple(table))

    def act_obj(self, r: FiniteFunction, x: FinSet) -> FiniteFunction:
        """Whisker on the right: r x x."""
        w_dom = product_witness(r.dom, x)
        w_cod = product_witness(r.cod, x)
        table = [0] * w_dom.carrier.size
        for u in r.dom:
            for a in x:
                table[w_dom.pair(u, a)] = w_cod.pair(r(u), a)
        return FiniteFunction(w_dom.carrier, w_cod.carrier, tuple(table))

    def ract_mor_obj(self, f: FiniteFunction, m: FinSet) -> FiniteFunction:
        """Whisker a backward-side morphism: f x m."""
        w_dom = product_witness(f.dom, m)
        w_cod = product_witness(f.cod, m)
        table = [0] * w_dom.carrier.size
        for a in f.dom:
            for u in m:
                table[w_dom.pair(a, u)] = w_cod.pair(f(a), u)
        return FiniteFunction(w_dom.carrier, w_cod.carrier, tuple(table))

    def ract_obj_mor(self, xp: FinSet, r: FiniteFunction) -> FiniteFunction:
        """Whisker a residual morphism under a backward object: xp x r."""
        w_dom = product_witness(xp, r.dom)
        w_cod = product_witness(xp, r.cod)
        table = [0] * w_dom.carrier.size
        for a in xp:
            for u in r.dom:
                table[w_dom.pair(a, u)] = w_cod.pair(a, r(u))
        return FiniteFunction(w_dom.carrier, w_cod.carrier, tuple(table))

    def left_unitor(self, x: FinSet) -> FiniteFunction:
        return identity_fn(FinSet(x.size))

    def right_unitor(self, xp: FinSet) -> FiniteFunction:
        return identity_fn(FinSet(xp.size))

    def left_mult(self, m: FinSet, n: FinSet, x: FinSet) -> FiniteFunction:
        """m.(n.x) -> (m@n).x; the row-major encodings coincide."""
        return identity_fn(FinSet(m.size * n.size * x.size))

    def right_mult(self, xp: FinSet, m: FinSet, n: FinSet) -> FiniteFunction:
        """xp.(m@n) -> (xp.n).m, the interchange used to compose backwards."""
        dom = product_witness(xp, product_witness(m, n).carrier)
        wmn = product_witness(m, n)
        wxn = product_witness(xp, n)
        cod = product_witness(wxn.carrier, m)
        table = [0] * dom.carrier.size
        for a in xp:
            for u in m:
                for v in n:
                    table[dom.pair(a, wmn.pair(u, v))] = cod.pair(wxn.pair(a, v), u)
        return FiniteFunction(dom.carrier, cod.carrier, tuple(table))

    # Enumeration hooks used by equivalence graphs and oracles.
    def residual_objects(self, bound: int) -> list[FinSet]:
        return [FinSet(n) for n in range(bound + 1)]

    def forward_morphisms(self, x: FinSet, y: FinSet) -> list[FiniteFunction]:
        return all_functions(x, y)

    def backward_morphisms(self, x: FinSet, y: FinSet) -> list[FiniteFunction]:
        return all_functions(x, y)

    def mediator_morphisms(self, m: FinSet, n: FinSet) -> list[FiniteFunction]:
        return all_functions(m, n)


class FinStochAction:
    """Finite stochastic kernels acting on themselves by independent product.

    Morphism enumeration is restricted to the configured denominator grid.
    """

    kind = "finstoch"

    def __init__(self, denominators: Sequence[int] = (1, 2, 3)):
        self.denominators = tuple(denominators)
        self._fn = CartesianFinSetAction()

    def tensor(self, m: FinSet, n: FinSet) -> FinSet:
        return FinSet(m.size * n.size)

    def unit(self) -> FinSet:
        return FinSet(1)

    def initial(self) -> FinSet:
        return FinSet(0)

    def act(self, m: FinSet, x: FinSet) -> FinSet:
        return FinSet(m.size * x.size)

    def ract(self, xp: FinSet, m: FinSet) -> FinSet:
        return FinSet(xp.size * m.size)

    def compose(self, f, g):
        return compose_kernel(f, g)

    def identity_mor(self, x: FinSet) -> FiniteKernel:
        return identity_kernel(x)

    def act_mor(self, m: FinSet, f: FiniteKernel) -> FiniteKernel:
        return kernel_product(identity_kernel(m), f)

    def act_obj(self, r: FiniteKernel, x: FinSet) -> FiniteKernel:
        return kernel_product(r, identity_kernel(x))

    def ract_mor_obj(self, f: FiniteKernel, m: FinSet) -> FiniteKernel:
        return kernel_product(f, identity_kernel(m))

    def ract_obj_mor(self, xp: FinSet, r: FiniteKernel) -> FiniteKernel:
        return kernel_product(identity_kernel(xp), r)

    def left_unitor(self, x: FinSet) -> FiniteKernel:
        return fn_to_kernel(self._fn.left_unitor(x))

    def right_unitor(self, xp: FinSet) -> FiniteKernel:
        return fn_to_kernel(self._fn.right_unitor(xp))

    def left_mult(self, m: FinSet, n: FinSet, x: FinSet) -> FiniteKernel:
        return fn_to_kernel(self._fn.left_mult(m, n, x))

    def right_mult(self, xp: FinSet, m: FinSet, n: FinSet) -> FiniteKernel:
        return fn_to_kernel(self._fn.right_mult(xp, m, n))

    def residual_objects(self, bound: int) -> list[FinSet]:
        return [FinSet(n) for n in range(bound + 1)]

    def forward_morphisms(self, x: FinSet, y: FinSet) -> list[FiniteKernel]:
        return grid_kernels(x, y, self.denominators)

    def backward_morphisms(self, x: FinSet, y: FinSet) -> list[FiniteKernel]:
        return grid_kernels(x, y, self.denominators)

    def mediator_morphisms(self, m: FinSet, n: FinSet) -> list[FiniteKernel]:
        return grid_kernels(m, n, self.denominators)


def finset_cartesian_action() -> CartesianFinSetAction:
    return CartesianFinSetAction()


def finstoch_action(denominators: Sequence[int] = (1, 2, 3)) -> FinStochAction:
    return FinStochAction(denominators)


# ---------------------------------------------------------------------------
# Optics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Optic:
    """A residual representative: forward X -> M.Y, backward Y'.M -> X'."""

    source: Pair
    target: Pair
    residual: FinSet
    forward: object
    backward: object

    def __post_init__(self):
        x, xp = self.source
        y, yp = self.target
        m = self.residual
        if self.forward.dom != x or self.forward.cod.size != m.size * y.size:
            raise ValueError("forward endpoints do not match the action composite")
        if self.backward.cod != xp or self.backward.dom.size != yp.size * m.size:
            raise ValueError("backward endpoints do not match the action composite")


def identity_optic(pair: Pair, act) -> Optic:
    """Unit-residual identity; the unitors make the carriers line up exactly."""
    x, xp = pair
    fwd = identity_fn(FinSet(x.size))
    bwd = identity_fn(FinSet(xp.size))
    if act.kind == "finstoch":
        fwd, bwd = fn_to_kernel(fwd), fn_to_kernel(bwd)
    return Optic(pair, pair, act.unit(), fwd, bwd)


def optic_compose(o1: Optic, o2: Optic, act) -> Optic:
    """Composite with residual M@N and explicitly applied coherences."""
    if o1.target != o2.source:
        raise CompositionError("optic target does not match the next source")
    m, n = o1.residual, o2.residual
    _, zp = o2.target
    z = o2.target[0]
    residual = act.tensor(m, n)
    forward = act.compose(
        act.compose(o1.forward, act.act_mor(m, o2.forward)),
        act.left_mult(m, n, z),
    )
    backward = act.compose(
        act.compose(act.right_mult(zp, m, n), act.ract_mor_obj(o2.backward, m)),
        o1.backward,
    )
    return Optic(o1.source, o2.target, residual, forward, backward)


@dataclass(frozen=True)
class SlidingEdge:
    """A reparametrisation along ``mediator`` between two representatives."""

    from_optic: Optic
    to_optic: Optic
    mediator: object


def check_sliding_edge(edge: SlidingEdge, act) -> bool:
    y, yp = edge.from_optic.target
    r = edge.mediator
    lhs = act.compose(edge.from_optic.forward, act.act_obj(r, y))
    rhs = act.compose(act.ract_obj_mor(yp, r), edge.to_optic.backward)
    return lhs == edge.to_optic.forward and rhs == edge.from_optic.backward


def _solve_post_factor(h: FiniteFunction, e: FiniteFunction) -> FiniteFunction:
    """The unique t with e;t = h, when it exists."""
    values: list[int | None] = [None] * e.cod.size
    for p in e.dom:
        q = e(p)
        if values[q] is None:
            values[q] = h(p)
        elif values[q] != h(p):
            raise SlideError("morphism does not factor through the mediator")
    if any(v is None for v in values):
        raise SlideError("slide is not uniquely determined (mediator not surjective)")
    return FiniteFunction(e.cod, h.cod, tuple(values))  # type: ignore[arg-type]


def _solve_pre_factor(h: FiniteFunction, e: FiniteFunction) -> FiniteFunction:
    """The unique f with f;e = h, when it exists."""
    preimages: dict[int, list[int]] = collections.defaultdict(list)
    for p in e.dom:
        preimages[e(p)].append(p)
    table = []
    for x in h.dom:
        candidates = preimages.get(h(x), [])
        if not candidates:
            raise SlideError("morphism does not factor through the mediator")
        if len(candidates) > 1:
            raise SlideError("slide is not uniquely determined (mediator not injective)")
        table.append(candidates[0])
    return FiniteFunction(h.dom, e.dom, tuple(table))


def slide(o: Optic, r, direction: str, act) -> Optic:
    """Follow the sliding edge generated by ``r`` from the given end.

    ``direction="forward"`` treats ``o`` as the source end (``r`` leaves its
    residual); ``direction="backward"`` treats it as the target end.  The
    other end must be uniquely determined, otherwise a SlideError is raised.
    """
    if not isinstance(o.forward, FiniteFunction):
        raise SlideError("sliding requires function-valued morphisms")
    y, yp = o.target
    if direction == "forward":
        if r.dom != o.residual:
            raise SlideError("mediator domain must be the residual")
        to_forward = act.compose(o.forward, act.act_obj(r, y))
        to_backward = _solve_post_factor(o.backward, act.ract_obj_mor(yp, r))
        return Optic(o.source, o.target, r.cod, to_forward, to_backward)
    if direction == "backward":
        if r.cod != o.residual:
            raise SlideError("mediator codomain must be the residual")
        from_forward = _solve_pre_factor(o.forward, act.act_obj(r, y))
        from_backward = act.compose(act.ract_obj_mor(yp, r), o.backward)
        return Optic(o.source, o.target, r.dom, from_forward, from_backward)
    raise ValueError("direction must be 'forward' or 'backward'")


# ---------------------------------------------------------------------------
# Sliding graphs and equivalence
# ---------------------------------------------------------------------------


@dataclass
class SlidingGraph:
    source: Pair
    target: Pair
    residual_bound: int
    vertices: list[Optic]
    index: dict
    edges: list[SlidingEdge]

    def vertex_key(self, o: Optic):
        return (o.residual.size, o.forward, o.backward)


def build_sliding_graph(
    source: Pair, target: Pair, act, residual_bound: int, ceiling: int = 10**6
) -> SlidingGraph:
    """All representatives with residual size below the bound, and all slidings."""
    y, yp = target
    x, xp = source
    vertices: list[Optic] = []
    index: dict = {}
    residuals = act.residual_objects(residual_bound)
    forwards = {}
    backwards = {}
    for m in residuals:
        forwards[m.size] = act.forward_morphisms(x, act.act(m, y))
        backwards[m.size] = act.backward_morphisms(act.ract(yp, m), xp)
        if len(vertices) + len(forwards[m.size]) * len(backwards[m.size]) > ceiling:
            raise EnumerationCeilingError("sliding graph exceeds the vertex ceiling")
        for f in forwards[m.size]:
            for b in backwards[m.size]:
                o = Optic(source, target, m, f, b)
                index[(m.size, f, b)] = len(vertices)
                vertices.append(o)
    edges: list[SlidingEdge] = []
    for m in residuals:
        for n in residuals:
            for r in act.mediator_morphisms(m, n):
                whisk_f = act.act_obj(r, y)
                whisk_b = act.ract_obj_mor(yp, r)
                for f in forwards[m.size]:
                    to_forward = act.compose(f, whisk_f)
                    for b2 in backwards[n.size]:
                        from_optic = Optic(
                            source, target, m, f, act.compose(whisk_b, b2)
                        )
                        to_optic = Optic(source, target, n, to_forward, b2)
                        edges.append(SlidingEdge(from_optic, to_optic, r))
    return SlidingGraph(source, target, residual_bound, vertices, index, edges)


@dataclass(frozen=True)
class EquivReport:
    equivalent: bool
    vertex_count: int
    component_count: int
    witness_path: tuple[SlidingEdge, ...] | None
    note: str


def optic_equiv_report(
    o1: Optic, o2: Optic, act, residual_bound: int, ceiling: int = 10**6
) -> EquivReport:
    """Connectivity of two representatives in the bounded sliding graph."""
    if o1.source != o2.source or o1.target != o2.target:
        raise ValueError("optics must share source and target")
    if o1.residual.size > residual_bound or o2.residual.size > residual_bound:
        raise ValueError("residual exceeds the stated bound")
    graph = build_sliding_graph(o1.source, o1.target, act, residual_bound, ceiling)
    uf = UnionFind(len(graph.vertices))
    adjacency: dict[int, list[tuple[int, SlidingEdge]]] = collections.defaultdict(list)
    for edge in graph.edges:
        a = graph.index[graph.vertex_key(edge.from_optic)]
        b = graph.index[graph.vertex_key(edge.to_optic)]
        uf.union(a, b)
        adjacency[a].append((b, edge))
        adjacency[b].append((a, edge))
    i1 = graph.index[graph.vertex_key(o1)]
    i2 = graph.index[graph.vertex_key(o2)]
    components = uf.component_count()
    if uf.find(i1) != uf.find(i2):
        return EquivReport(
            False,
            len(graph.vertices),
            components,
            None,
            f"not connected within residual bound {residual_bound}",
        )
    # Breadth-first search for a witness path of sliding edges.
    previous: dict[int, tuple[int, SlidingEdge]] = {}
    queue = collections.deque([i1])
    seen = {i1}
    while queue:
        v = queue.popleft()
        if v == i2:
            break
        for w, edge in adjacency[v]:
            if w not in seen:
                seen.add(w)
                previous[w] = (v, edge)
                queue.append(w)
    path = []
    v = i2
    while v != i1:
        v, edge = previous[v]
        path.append(edge)
    path.reverse()
    return EquivReport(True, len(graph.vertices), components, tuple(path), "connected")


def optic_equiv(o1: Optic, o2: Optic, act, residual_bound: int) -> bool:
    return optic_equiv_report(o1, o2, act, residual_bound).equivalent


def cartesian_collapse_counts(
    x: int, xp: int, y: int, yp: int, residual_bound: int
) -> tuple[int, int]:
    """Vertex and component counts of the cartesian sliding graph (fast path)."""
    return _kernel.sliding_component_count(x, xp, [y], [yp], residual_bound)


# ---------------------------------------------------------------------------
# Cartesian normal forms
# ---------------------------------------------------------------------------


def normalize_cartesian(o: Optic, act) -> Lens:
    """Collapse a cartesian optic to the lens it represents."""
    if act.kind != "finset-cartesian":
        raise ValueError("normalization requires the cartesian finite-set action")
    x, xp = o.source
    y, yp = o.target
    m = o.residual
    wmy = product_witness(m, y)
    wym = product_witness(yp, m)
    wxy = product_witness(x, yp)
    get_table = []
    put_table = [0] * wxy.carrier.size
    for xi in x:
        u, yi = wmy.unpair(o.forward(xi))
        get_table.append(yi)
        for ypi in yp:
            put_table[wxy.pair(xi, ypi)] = o.backward(wym.pair(ypi, u))
    return Lens(
        o.source,
        o.target,
        FiniteFunction(x, y, tuple(get_table)),
        FiniteFunction(wxy.carrier, xp, tuple(put_table)),
    )


def lens_to_optic(l: Lens, act) -> Optic:
    """The copy-coparametrised representative of a lens (residual = X)."""
    if act.kind != "finset-cartesian":
        raise ValueError("the lens embedding requires the cartesian action")
    x, xp = l.source
    y, yp = l.target
    wxy = product_witness(x, y)
    wyx = product_witness(yp, x)
    wxyp = product_witness(x, yp)
    forward = FiniteFunction(
        x, wxy.carrier, tuple(wxy.pair(xi, l.get(xi)) for xi in x)
    )
    table = [0] * wyx.carrier.size
    for ypi in yp:
        for xi in x:
            table[wyx.pair(ypi, xi)] = l.put(wxyp.pair(xi, ypi))
    backward = FiniteFunction(wyx.carrier, xp, tuple(table))
    return Optic(l.source, l.target, FinSet(x.size), forward, backward)
