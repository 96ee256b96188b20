import itertools
import random

import pytest

from fiboptic.fincat import EnumerationCeilingError, FinSet
from fiboptic.lens import count_dlens_hom, dlens_compose, identity_dlens
from fiboptic.indexed import (
    IndexedFamily,
    IndexedOptic,
    ResidualMatrix,
    count_indexed_optics,
    count_iopt_sliding_classes,
    count_polynomial_nat,
    enumerate_indexed_optics,
    family_to_container,
    identity_indexed_optic,
    identity_matrix,
    iopt_compose,
    iopt_to_dlens,
    matrix_multiply,
    random_indexed_optic,
)
from fiboptic.lens import lens_to_dlens
from fiboptic.optic import (
    Optic,
    finset_cartesian_action,
    normalize_cartesian,
    optic_compose,
)

ACT = finset_cartesian_action()


def fam(*pairs):
    return IndexedFamily(
        FinSet(len(pairs)), tuple((FinSet(a), FinSet(b)) for a, b in pairs)
    )


def const_fam(n, x, xp):
    return fam(*([(x, xp)] * n))


class TestIdentityMatrix:
    def test_singleton(self):
        m = identity_matrix(FinSet(1), ACT)
        assert m.entry(0, 0).size == 1

    def test_two_by_two(self):
        m = identity_matrix(FinSet(2), ACT)
        sizes = [[m.entry(i, j).size for j in range(2)] for i in range(2)]
        assert sizes == [[1, 0], [0, 1]]

    def test_unit_under_composition(self):
        f = fam((2, 1), (1, 2))
        ident = identity_indexed_optic(f, ACT)
        rng = random.Random(0)
        for _ in range(10):
            o = random_indexed_optic(rng, f, fam((2, 2), (1, 1)), 2)
            left = iopt_compose(ident, o, ACT)
            assert iopt_to_dlens(left) == iopt_to_dlens(o)
            ident_t = identity_indexed_optic(o.target, ACT)
            right = iopt_compose(o, ident_t, ACT)
            assert iopt_to_dlens(right) == iopt_to_dlens(o)


class TestMatrixMultiply:
    def test_identity_preserves_sizes(self):
        m = ResidualMatrix(
            FinSet(2),
            FinSet(2),
            ((FinSet(2), FinSet(1)), (FinSet(0), FinSet(2))),
        )
        out = matrix_multiply(m, identity_matrix(FinSet(2), ACT), ACT)
        assert [[e.size for e in row] for row in out.entries] == [
            [2, 1],
            [0, 2],
        ]

    def test_one_by_one(self):
        m = ResidualMatrix(FinSet(1), FinSet(1), ((FinSet(2),),))
        n = ResidualMatrix(FinSet(1), FinSet(1), ((FinSet(3),),))
        assert matrix_multiply(m, n, ACT).entry(0, 0).size == 6

    def test_row_times_column(self):
        m = ResidualMatrix(FinSet(1), FinSet(2), ((FinSet(2), FinSet(3)),))
        n = ResidualMatrix(FinSet(2), FinSet(1), ((FinSet(1),), (FinSet(2),)))
        assert matrix_multiply(m, n, ACT).entry(0, 0).size == 2 * 1 + 3 * 2

    def test_associativity_of_sizes(self):
        sizes = [FinSet(s) for s in range(3)]
        rng = random.Random(1)
        for _ in range(20):
            a = ResidualMatrix(
                FinSet(2),
                FinSet(2),
                tuple(tuple(rng.choice(sizes) for _ in range(2)) for _ in range(2)),
            )
            b = ResidualMatrix(
                FinSet(2),
                FinSet(2),
                tuple(tuple(rng.choice(sizes) for _ in range(2)) for _ in range(2)),
            )
            c = ResidualMatrix(
                FinSet(2),
                FinSet(2),
                tuple(tuple(rng.choice(sizes) for _ in range(2)) for _ in range(2)),
            )
            lhs = matrix_multiply(matrix_multiply(a, b, ACT), c, ACT)
            rhs = matrix_multiply(a, matrix_multiply(b, c, ACT), ACT)
            assert [[e.size for e in row] for row in lhs.entries] == [
                [e.size for e in row] for row in rhs.entries
            ]


class TestComposition:
    def test_singleton_indices_agree_with_plain_optics(self):
        rng = random.Random(3)
        a, b, c = fam((2, 2)), fam((2, 1)), fam((1, 2))
        for _ in range(15):
            o1 = random_indexed_optic(rng, a, b, 2)
            o2 = random_indexed_optic(rng, b, c, 2)
            composite = iopt_compose(o1, o2, ACT)
            plain1 = Optic(
                a.components[0], b.components[0], o1.matrix.entry(0, 0),
                o1.forwards[0], o1.backwards[0],
            )
            plain2 = Optic(
                b.components[0], c.components[0], o2.matrix.entry(0, 0),
                o2.forwards[0], o2.backwards[0],
            )
            plain = optic_compose(plain1, plain2, ACT)
            assert composite.forwards[0] == plain.forward
            assert composite.backwards[0] == plain.backward
            assert composite.matrix.entry(0, 0).size == plain.residual.size

    def test_normalization_functorial_on_samples(self):
        rng = random.Random(5)
        a = fam((2, 2), (1, 1))
        b = fam((1, 2), (2, 1))
        c = fam((2, 2), (2, 2))
        for _ in range(25):
            o1 = random_indexed_optic(rng, a, b, 2)
            o2 = random_indexed_optic(rng, b, c, 2)
            lhs = iopt_to_dlens(iopt_compose(o1, o2, ACT))
            rhs = dlens_compose(iopt_to_dlens(o1), iopt_to_dlens(o2))
            assert lhs == rhs

    def test_associativity_up_to_normalization(self):
        rng = random.Random(7)
        a, b = fam((2, 1), (1, 2)), fam((1, 1), (2, 2))
        c, d = fam((2, 2)), fam((1, 1))
        for _ in range(10):
            o1 = random_indexed_optic(rng, a, b, 2)
            o2 = random_indexed_optic(rng, b, c, 2)
            o3 = random_indexed_optic(rng, c, d, 2)
            lhs = iopt_compose(iopt_compose(o1, o2, ACT), o3, ACT)
            rhs = iopt_compose(o1, iopt_compose(o2, o3, ACT), ACT)
            assert iopt_to_dlens(lhs) == iopt_to_dlens(rhs)


class TestNormalization:
    def test_identity_maps_to_identity(self):
        f = fam((2, 1), (1, 2))
        ident = identity_indexed_optic(f, ACT)
        assert iopt_to_dlens(ident) == identity_dlens(family_to_container(f))

    def test_singleton_agrees_with_lens_normalization(self):
        rng = random.Random(9)
        a, b = fam((2, 2)), fam((2, 1))
        for _ in range(15):
            o = random_indexed_optic(rng, a, b, 2)
            plain = Optic(
                a.components[0], b.components[0], o.matrix.entry(0, 0),
                o.forwards[0], o.backwards[0],
            )
            assert iopt_to_dlens(o) == lens_to_dlens(normalize_cartesian(plain, ACT))

    def test_enumeration_count_and_roundtrip(self):
        src, tgt = fam((1, 1)), fam((1, 1), (1, 1))
        optics = list(enumerate_indexed_optics(src, tgt, 1))
        assert len(optics) == count_indexed_optics(src, tgt, 1) == 4
        classes = {iopt_to_dlens(o) for o in optics}
        assert len(classes) == count_iopt_sliding_classes(src, tgt, 1) == 2

    def test_enumeration_ceiling(self):
        src, tgt = fam((2, 2)), fam((2, 2), (2, 2))
        with pytest.raises(EnumerationCeilingError):
            list(enumerate_indexed_optics(src, tgt, 2, ceiling=10))


class TestSlidingClasses:
    @pytest.mark.parametrize(
        "src,tgt",
        [
            (fam((2, 2)), fam((2, 2), (2, 2))),
            (fam((2, 1), (1, 2)), fam((1, 1),)),
            (fam((1, 2), (2, 0)), fam((2, 1), (0, 2))),
            (fam((0, 0)), fam((2, 2),)),
            (fam((2, 2), (2, 2)), fam((2, 2), (2, 2))),
        ],
    )
    def test_matches_dependent_lens_count(self, src, tgt):
        classes = count_iopt_sliding_classes(src, tgt, 2)
        expected = count_dlens_hom(family_to_container(src), family_to_container(tgt))
        assert classes == expected


class TestPolynomialCount:
    def test_trivial_singleton(self):
        f = fam((1, 1))
        assert count_polynomial_nat(f, f, 2) == 1

    def test_empty_source_index(self):
        src = IndexedFamily(FinSet(0), ())
        tgt = fam((2, 2))
        assert count_polynomial_nat(src, tgt, 2) == 1

    def test_probe_guard(self):
        src = fam((1, 3))
        with pytest.raises(EnumerationCeilingError):
            count_polynomial_nat(src, src, 2)

    @pytest.mark.parametrize("n_src,x,xp", [(1, 1, 2), (2, 2, 1), (1, 2, 2)])
    @pytest.mark.parametrize("n_tgt,y,yp", [(1, 1, 1), (2, 2, 2), (1, 0, 2)])
    def test_constant_families_match_dependent_lens_count(
        self, n_src, x, xp, n_tgt, y, yp
    ):
        src, tgt = const_fam(n_src, x, xp), const_fam(n_tgt, y, yp)
        expected = count_dlens_hom(family_to_container(src), family_to_container(tgt))
        assert count_polynomial_nat(src, tgt, 2) == expected
