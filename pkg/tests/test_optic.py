import itertools
import random

import pytest

from fiboptic.fincat import FinSet, FiniteFunction, all_functions, constant_fn
from fiboptic.lens import enumerate_lenses, identity_lens, lens_compose, lens_hom_count
from fiboptic.optic import (
    Optic,
    SlideError,
    SlidingEdge,
    build_sliding_graph,
    cartesian_collapse_counts,
    check_sliding_edge,
    finset_cartesian_action,
    finstoch_action,
    identity_optic,
    lens_to_optic,
    normalize_cartesian,
    optic_compose,
    optic_equiv,
    optic_equiv_report,
    slide,
)

ACT = finset_cartesian_action()


def pair(a, b):
    return (FinSet(a), FinSet(b))


def random_optic(rng, source, target, residual_size):
    x, xp = source
    y, yp = target
    m = FinSet(residual_size)
    fwd = rng.choice(all_functions(x, FinSet(m.size * y.size)))
    bwd = rng.choice(all_functions(FinSet(yp.size * m.size), xp))
    return Optic(source, target, m, fwd, bwd)


class TestCompose:
    def test_identity_optic_is_unit_up_to_equivalence(self):
        rng = random.Random(5)
        src, tgt = pair(2, 2), pair(2, 2)
        for _ in range(5):
            o = random_optic(rng, src, tgt, 2)
            composite = optic_compose(o, identity_optic(tgt, ACT), ACT)
            assert optic_equiv(composite, o, ACT, residual_bound=2)

    def test_two_identities(self):
        src = pair(2, 2)
        composite = optic_compose(identity_optic(src, ACT), identity_optic(src, ACT), ACT)
        assert optic_equiv(composite, identity_optic(src, ACT), ACT, residual_bound=2)

    def test_normalization_is_a_functor(self):
        rng = random.Random(9)
        a, b, c = pair(2, 2), pair(2, 1), pair(1, 2)
        for _ in range(20):
            o1 = random_optic(rng, a, b, rng.randint(1, 2))
            o2 = random_optic(rng, b, c, rng.randint(1, 2))
            lhs = normalize_cartesian(optic_compose(o1, o2, ACT), ACT)
            rhs = lens_compose(normalize_cartesian(o1, ACT), normalize_cartesian(o2, ACT))
            assert lhs == rhs

    def test_finstoch_unit_law(self):
        act = finstoch_action((1, 2))
        src = pair(2, 2)
        o = identity_optic(src, act)
        composite = optic_compose(o, o, act)
        assert composite.residual.size == 1
        assert composite.forward.is_identity()
        assert composite.backward.is_identity()


class TestSlide:
    def test_identity_mediator_is_a_fixpoint(self):
        rng = random.Random(2)
        o = random_optic(rng, pair(2, 2), pair(2, 2), 2)
        r = FiniteFunction(FinSet(2), FinSet(2), (0, 1))
        assert slide(o, r, "forward", ACT) == o
        assert slide(o, r, "backward", ACT) == o

    def test_collapse_to_point_factors_backward(self):
        # Build the source end so its backward part is constant on fibres.
        y, yp = FinSet(2), FinSet(2)
        src, tgt = pair(2, 2), (y, yp)
        m = FinSet(2)
        r = constant_fn(m, FinSet(1), 0)
        f = FiniteFunction(src[0], FinSet(4), (1, 2))
        b_over_unit = FiniteFunction(FinSet(2), src[1], (1, 0))
        whisk = ACT.ract_obj_mor(yp, r)
        o = Optic(src, tgt, m, f, ACT.compose(whisk, b_over_unit))
        slid = slide(o, r, "forward", ACT)
        assert slid.residual.size == 1
        assert slid.backward == b_over_unit
        edge = SlidingEdge(o, slid, r)
        assert check_sliding_edge(edge, ACT)

    def test_obstructed_slide_raises(self):
        src, tgt = pair(2, 2), pair(2, 2)
        m = FinSet(2)
        r = constant_fn(m, FinSet(1), 0)
        f = FiniteFunction(src[0], FinSet(4), (0, 3))
        # backward depends on the residual fibre, so it cannot factor.
        b = FiniteFunction(FinSet(4), src[1], (0, 1, 0, 1))
        o = Optic(src, tgt, m, f, b)
        with pytest.raises(SlideError):
            slide(o, r, "forward", ACT)

    def test_slide_composes_along_mediators(self):
        rng = random.Random(4)
        src, tgt = pair(2, 2), pair(2, 2)
        surjections = [
            f
            for f in all_functions(FinSet(2), FinSet(2))
            if set(f.table) == {0, 1}
        ]
        for _ in range(30):
            r = rng.choice(surjections)
            s = rng.choice(surjections)
            o = random_optic(rng, src, tgt, 2)
            try:
                one = slide(slide(o, r, "forward", ACT), s, "forward", ACT)
            except SlideError:
                continue
            two = slide(o, ACT.compose(r, s), "forward", ACT)
            assert one == two


class TestEquivalence:
    def test_single_edge_connects(self):
        rng = random.Random(6)
        src, tgt = pair(2, 2), pair(2, 2)
        count = 0
        for _ in range(40):
            o = random_optic(rng, src, tgt, 2)
            r = rng.choice(all_functions(FinSet(2), FinSet(2)))
            try:
                other = slide(o, r, "forward", ACT)
            except SlideError:
                continue
            count += 1
            assert optic_equiv(o, other, ACT, residual_bound=2)
        assert count > 0

    def test_equal_normal_forms_are_equivalent(self):
        rng = random.Random(8)
        src, tgt = pair(2, 2), pair(2, 2)
        seen = {}
        for _ in range(30):
            o = random_optic(rng, src, tgt, rng.randint(1, 2))
            key = normalize_cartesian(o, ACT)
            if key in seen:
                assert optic_equiv(o, seen[key], ACT, residual_bound=2)
            seen[key] = o

    def test_different_gets_are_inequivalent(self):
        src, tgt = pair(2, 2), pair(2, 2)
        lens_a = identity_lens(src)
        lenses = enumerate_lenses(src, tgt)
        other = next(l for l in lenses if l.get.table != lens_a.get.table)
        report = optic_equiv_report(
            lens_to_optic(lens_a, ACT), lens_to_optic(other, ACT), ACT, residual_bound=2
        )
        assert not report.equivalent
        assert "not connected" in report.note

    def test_witness_path_edges_hold(self):
        rng = random.Random(12)
        src, tgt = pair(2, 1), pair(1, 2)
        o1 = random_optic(rng, src, tgt, 1)
        o2 = random_optic(rng, src, tgt, 2)
        report = optic_equiv_report(o1, o2, ACT, residual_bound=2)
        if report.equivalent:
            assert report.witness_path
            for edge in report.witness_path:
                assert check_sliding_edge(edge, ACT)

    def test_residual_bound_respected(self):
        rng = random.Random(3)
        o = random_optic(rng, pair(1, 1), pair(1, 1), 2)
        with pytest.raises(ValueError):
            optic_equiv(o, o, ACT, residual_bound=1)

    def test_congruence_on_samples(self):
        rng = random.Random(21)
        a, b, c = pair(2, 2), pair(2, 2), pair(1, 1)
        for _ in range(10):
            o1 = random_optic(rng, a, b, 2)
            r = rng.choice(all_functions(FinSet(2), FinSet(2)))
            try:
                o1_slid = slide(o1, r, "forward", ACT)
            except SlideError:
                continue
            o2 = random_optic(rng, b, c, rng.randint(1, 2))
            lhs = optic_compose(o1, o2, ACT)
            rhs = optic_compose(o1_slid, o2, ACT)
            assert normalize_cartesian(lhs, ACT) == normalize_cartesian(rhs, ACT)


class TestCollapseCounts:
    def test_flagship_instance(self):
        assert cartesian_collapse_counts(2, 2, 2, 2, 2) == (272, 64)

    def test_graph_builder_agrees_on_flagship(self):
        graph = build_sliding_graph(pair(2, 2), pair(2, 2), ACT, 2)
        assert len(graph.vertices) == 272

    def test_all_small_homs_collapse_to_lens_counts(self):
        for x, xp, y, yp in itertools.product(range(3), repeat=4):
            bound = max(2, x)
            _, components = cartesian_collapse_counts(x, xp, y, yp, bound)
            assert components == lens_hom_count(x, xp, y, yp)


class TestNormalForms:
    def test_identity_norm(self):
        src = pair(2, 2)
        assert normalize_cartesian(identity_optic(src, ACT), ACT) == identity_lens(src)

    def test_copy_optic_normalizes_to_its_lens(self):
        rng = random.Random(13)
        for l in rng.sample(enumerate_lenses(pair(2, 2), pair(2, 1)), 10):
            assert normalize_cartesian(lens_to_optic(l, ACT), ACT) == l

    def test_normalization_constant_on_slides(self):
        rng = random.Random(14)
        src, tgt = pair(2, 2), pair(2, 2)
        for _ in range(25):
            o = random_optic(rng, src, tgt, 2)
            r = rng.choice(all_functions(FinSet(2), FinSet(2)))
            try:
                other = slide(o, r, "forward", ACT)
            except SlideError:
                continue
            assert normalize_cartesian(o, ACT) == normalize_cartesian(other, ACT)

    def test_requires_cartesian_instance(self):
        o = identity_optic(pair(1, 1), finstoch_action())
        with pytest.raises(ValueError):
            normalize_cartesian(o, finstoch_action())
