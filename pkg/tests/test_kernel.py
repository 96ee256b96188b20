import itertools

import pytest

from fiboptic._kernel import (
    IMPLEMENTATION,
    estimate_work,
    sliding_component_count,
    sliding_component_count_with,
)
from fiboptic._unionfind import UnionFind
from fiboptic.fincat import EnumerationCeilingError, FinSet
from fiboptic.lens import lens_hom_count
from fiboptic.optic import build_sliding_graph, finset_cartesian_action


def both(*args):
    out = [sliding_component_count_with("python", *args)]
    try:
        out.append(sliding_component_count_with("cython", *args))
    except ValueError:
        pass
    assert len(set(out)) == 1
    return out[0]


class TestAgainstExplicitGraph:
    """The kernel must match a from-first-principles graph construction."""

    @pytest.mark.parametrize(
        "x,xp,y,yp,bound",
        [
            (2, 2, 2, 2, 2),
            (1, 2, 2, 1, 2),
            (2, 1, 1, 2, 2),
            (0, 2, 2, 2, 2),
            (2, 0, 2, 2, 2),
            (2, 2, 0, 1, 2),
            (1, 1, 2, 0, 2),
            (2, 2, 2, 2, 1),
        ],
    )
    def test_matches_graph_builder(self, x, xp, y, yp, bound):
        act = finset_cartesian_action()
        graph = build_sliding_graph(
            (FinSet(x), FinSet(xp)), (FinSet(y), FinSet(yp)), act, bound
        )
        uf = UnionFind(len(graph.vertices))
        for edge in graph.edges:
            uf.union(
                graph.index[graph.vertex_key(edge.from_optic)],
                graph.index[graph.vertex_key(edge.to_optic)],
            )
        expected = (len(graph.vertices), uf.component_count())
        assert both(x, xp, [y], [yp], bound) == expected


class TestFrozenInstances:
    def test_flagship_collapse(self):
        assert both(2, 2, [2], [2], 2) == (272, 64)

    def test_components_equal_lens_counts(self):
        for x, xp, y, yp in itertools.product(range(3), repeat=4):
            bound = max(2, x)
            _, components = both(x, xp, [y], [yp], bound)
            assert components == lens_hom_count(x, xp, y, yp)

    def test_indexed_row_graph(self):
        vertices, components = both(2, 2, [2, 2], [2, 2], 2)
        assert vertices == 21792
        assert components == (2 * 4 + 2 * 4) ** 2

    def test_empty_target_family(self):
        assert both(2, 2, [], [], 2) == (0, 0)
        assert both(0, 2, [], [], 2) == (1, 1)


class TestGuards:
    def test_vertex_ceiling(self):
        with pytest.raises(EnumerationCeilingError):
            sliding_component_count(2, 2, [2], [2], 2, max_vertices=10)

    def test_ops_ceiling(self):
        with pytest.raises(EnumerationCeilingError):
            sliding_component_count(2, 2, [2], [2], 2, max_ops=10)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            sliding_component_count(2, 2, [2], [2, 1], 2)
        with pytest.raises(ValueError):
            sliding_component_count(-1, 2, [2], [2], 2)

    def test_estimate_matches_vertices(self):
        vertices, _ = estimate_work(2, 2, [2], [2], 2)
        assert vertices == 272


class TestImplementationSelection:
    def test_selected_implementation_is_known(self):
        assert IMPLEMENTATION in {"python", "cython"}

    def test_twins_agree_on_a_spread(self):
        cases = []
        for x in range(3):
            for xp in range(3):
                cases.append((x, xp, [1], [2], 2))
                cases.append((x, xp, [2, 1], [0, 2], 2))
                cases.append((x, xp, [0, 2], [2, 2], 1))
        for case in cases:
            both(*case)
