import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fiboptic.fincat import (
    EnumerationCeilingError,
    FinSet,
    FiniteFunction,
    all_functions,
    product_witness,
)
from fiboptic.lens import (
    Container,
    DepLens,
    Lens,
    constant_container,
    count_dlens_hom,
    dlens_compose,
    enumerate_dlens_hom,
    enumerate_lenses,
    identity_dlens,
    identity_lens,
    lens_compose,
    lens_hom_count,
    lens_to_dlens,
)


def pair(x, xp):
    return (FinSet(x), FinSet(xp))


def sample_lenses(rng, source, target, k):
    all_ = enumerate_lenses(source, target)
    return rng.sample(all_, min(k, len(all_)))


class TestLensCompose:
    def test_identity_right(self):
        rng = random.Random(1)
        for l1 in sample_lenses(rng, pair(2, 2), pair(2, 2), 10):
            assert lens_compose(l1, identity_lens(pair(2, 2))) == l1
            assert lens_compose(identity_lens(pair(2, 2)), l1) == l1

    def test_two_identities(self):
        ident = identity_lens(pair(2, 2))
        assert lens_compose(ident, ident) == ident

    def test_against_pointwise_formula(self):
        rng = random.Random(7)
        src, mid, tgt = pair(2, 2), pair(2, 1), pair(1, 2)
        for l1 in sample_lenses(rng, src, mid, 6):
            for l2 in sample_lenses(rng, mid, tgt, 6):
                composite = lens_compose(l1, l2)
                w_xz = product_witness(src[0], tgt[1])
                w_xy = product_witness(src[0], mid[1])
                w_yz = product_witness(mid[0], tgt[1])
                for x in src[0]:
                    assert composite.get(x) == l2.get(l1.get(x))
                    for z in tgt[1]:
                        expected = l1.put(
                            w_xy.pair(x, l2.put(w_yz.pair(l1.get(x), z)))
                        )
                        assert composite.put(w_xz.pair(x, z)) == expected

    def test_hom_count_formula(self):
        assert lens_hom_count(2, 2, 2, 2) == 64
        assert len(enumerate_lenses(pair(2, 2), pair(2, 2))) == 64
        assert lens_hom_count(0, 2, 2, 2) == 1


class TestContainers:
    def test_count_empty_positions(self):
        src = Container(FinSet(0), ())
        tgt = constant_container(FinSet(2), FinSet(1))
        assert count_dlens_hom(src, tgt) == 1

    def test_count_mixed_directions(self):
        src = Container(FinSet(2), (FinSet(1), FinSet(2)))
        tgt = Container(FinSet(1), (FinSet(2),))
        assert count_dlens_hom(src, tgt) == 4
        assert len(enumerate_dlens_hom(src, tgt)) == 4

    def test_count_matches_lens_count_on_constant(self):
        src = constant_container(FinSet(2), FinSet(2))
        tgt = constant_container(FinSet(1), FinSet(2))
        assert count_dlens_hom(src, tgt) == 16
        assert count_dlens_hom(src, tgt) == lens_hom_count(2, 2, 1, 2)

    def test_empty_direction_blocks(self):
        src = Container(FinSet(2), (FinSet(0), FinSet(1)))
        tgt = Container(FinSet(1), (FinSet(2),))
        assert count_dlens_hom(src, tgt) == 0
        assert enumerate_dlens_hom(src, tgt) == []

    def test_singleton_everything(self):
        c = constant_container(FinSet(1), FinSet(1))
        homs = enumerate_dlens_hom(c, c)
        assert len(homs) == 1

    @given(st.data())
    @settings(max_examples=40, deadline=None)
    def test_count_equals_enumeration(self, data):
        sizes = st.integers(0, 2)
        na = data.draw(sizes)
        nc = data.draw(sizes)
        src = Container(
            FinSet(na),
            tuple(FinSet(data.draw(sizes)) for _ in range(na)),
        )
        tgt = Container(
            FinSet(nc),
            tuple(FinSet(data.draw(sizes)) for _ in range(nc)),
        )
        homs = enumerate_dlens_hom(src, tgt, ceiling=5000)
        assert len(homs) == count_dlens_hom(src, tgt)
        assert len(set(homs)) == len(homs)

    def test_enumeration_ceiling(self):
        src = constant_container(FinSet(2), FinSet(2))
        tgt = constant_container(FinSet(2), FinSet(2))
        with pytest.raises(EnumerationCeilingError):
            enumerate_dlens_hom(src, tgt, ceiling=3)


class TestEmbedding:
    def test_identity_lens_embeds_to_identity(self):
        ident = identity_lens(pair(2, 2))
        assert lens_to_dlens(ident) == identity_dlens(constant_container(FinSet(2), FinSet(2)))

    def test_functorial_on_samples(self):
        rng = random.Random(3)
        src, mid, tgt = pair(2, 1), pair(1, 2), pair(2, 2)
        for l1 in sample_lenses(rng, src, mid, 8):
            for l2 in sample_lenses(rng, mid, tgt, 8):
                embedded = dlens_compose(lens_to_dlens(l1), lens_to_dlens(l2))
                assert embedded == lens_to_dlens(lens_compose(l1, l2))

    def test_non_invertible_get(self):
        src, tgt = pair(2, 1), pair(1, 1)
        l = Lens(
            src,
            tgt,
            FiniteFunction(FinSet(2), FinSet(1), (0, 0)),
            FiniteFunction(FinSet(2), FinSet(1), (0, 0)),
        )
        d = lens_to_dlens(l)
        assert d.forward.table == (0, 0)


class TestDepLensCompose:
    def test_identity(self):
        c = Container(FinSet(2), (FinSet(1), FinSet(2)))
        d = identity_dlens(c)
        for other in enumerate_dlens_hom(c, c):
            assert dlens_compose(other, d) == other
            assert dlens_compose(d, other) == other

    def test_associativity_sampled(self):
        rng = random.Random(11)
        a = Container(FinSet(2), (FinSet(2), FinSet(1)))
        b = Container(FinSet(1), (FinSet(2),))
        c = Container(FinSet(2), (FinSet(1), FinSet(2)))
        d = Container(FinSet(1), (FinSet(1),))
        for _ in range(40):
            f = rng.choice(enumerate_dlens_hom(a, b))
            g = rng.choice(enumerate_dlens_hom(b, c))
            h = rng.choice(enumerate_dlens_hom(c, d))
            assert dlens_compose(dlens_compose(f, g), h) == dlens_compose(
                f, dlens_compose(g, h)
            )
