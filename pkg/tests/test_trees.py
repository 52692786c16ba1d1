import random
from fractions import Fraction

import pytest

from fracphi.errors import DimensionMismatch, NoiseProduct
from fracphi.homogeneity import SKNumber
from fracphi.treeparse import parse_tree
from fracphi.trees import (
    XI,
    Comb,
    homogeneity,
    in_grammar,
    leaves,
    missing_count,
    monomial,
    node,
    plant,
    planted,
    product,
    stats,
    symmetry_factor,
    symmetry_factor_from_presentation,
    to_text,
    unit,
    unit_vector,
    zero,
)

Z = zero()
E1 = unit_vector(1)
I_XI = planted(Z, XI)
CUBE = node(Z, [(Z, XI)] * 3)


def test_monomial_product():
    x1 = monomial(E1)
    assert product(x1, x1) == monomial((0, 2, 0, 0))


def test_product_of_planted_noises_is_canonical():
    t = product(I_XI, I_XI)
    assert t is node(Z, [(Z, XI), (Z, XI)])
    assert to_text(t) == "I(Xi)*I(Xi)"


def test_unit():
    assert product(CUBE, unit()) is CUBE


def test_noise_product_rejected():
    with pytest.raises(NoiseProduct):
        product(XI, I_XI)


def test_plant():
    assert plant(Z, XI) == Comb.single(I_XI)
    assert plant(Z, monomial(E1)) == Comb()
    assert homogeneity(planted(E1, XI)) == SKNumber(Fraction(-5, 2), 1, -1)


def test_dimension_checked():
    with pytest.raises(DimensionMismatch):
        node((0, 0), [(Z, XI)])


@pytest.mark.parametrize("tree, expected", [(XI, 1), (CUBE, 6), (monomial((2, 0, 0, 0)), 2)])
def test_symmetry_factor(tree, expected):
    assert symmetry_factor(tree) == expected


def test_symmetry_factor_from_presentation():
    assert symmetry_factor_from_presentation(Z, [(Z, XI)] * 3) == 6
    assert symmetry_factor_from_presentation(Z, [(Z, XI), (Z, CUBE)]) == 6
    assert symmetry_factor_from_presentation(Z, []) == 1


def test_homogeneity_examples():
    assert homogeneity(CUBE) == SKNumber(Fraction(-9, 2), 3, -3)
    assert homogeneity(planted(Z, I_XI)) == SKNumber(Fraction(-3, 2), 3, -1)
    assert homogeneity(monomial(unit_vector(0))) == SKNumber(0, 2, 0)


@pytest.mark.parametrize("tree, m", [(XI, 0), (I_XI, 2), (CUBE, 0)])
def test_missing_count(tree, m):
    assert missing_count(tree) == m


def test_stats():
    assert stats(XI) == stats(XI).__class__(1, SKNumber(), SKNumber(), True, True)
    t = parse_tree("X^(0,1,0,0) I(Xi) I(Xi)")
    st = stats(t)
    assert (st.leaves, st.poly_degree, st.edge_degree, st.is_full) == (2, SKNumber(1), SKNumber(), False)
    assert stats(CUBE).leaves == 3 and stats(CUBE).is_full


def test_hash_consing_is_order_free():
    a = node(E1, [(Z, CUBE), (Z, XI)])
    b = node(E1, [(Z, XI), (Z, CUBE)])
    assert a is b


def test_products_commute_and_associate(negative_trees):
    rng = random.Random(3)
    pool = [t for t in negative_trees if not t.is_noise and len(t.children) <= 1]
    for _ in range(200):
        a, b, c = (rng.choice(pool) for _ in range(3))
        assert product(a, b) is product(b, a)
        assert product(product(a, b), c) is product(a, product(b, c))
        assert homogeneity(product(a, b)) == homogeneity(a) + homogeneity(b)


def test_kappa_counts_noises(negative_trees):
    for t in negative_trees:
        assert homogeneity(t).ck == -leaves(t)
        assert in_grammar(t)


def test_generated_non_polynomial_homogeneities_are_never_integers(trees_2s):
    for t in trees_2s:
        if not t.is_monomial:
            h = homogeneity(t)
            assert h.ck < 0


def test_full_trees_have_no_decorations(trees_2s):
    for t in trees_2s:
        st = stats(t)
        if st.is_full and not t.is_monomial:
            assert st.poly_degree == SKNumber() and st.edge_degree == SKNumber()
            assert missing_count(t) == 0


def test_presentations_agree(negative_trees):
    rng = random.Random(11)
    pool = [XI] + [t for t in negative_trees if not t.is_monomial][:30]
    for _ in range(300):
        k = tuple(rng.randint(0, 2) for _ in range(4))
        factors = [(rng.choice([Z, E1]), rng.choice(pool)) for _ in range(rng.randint(0, 4))]
        t = node(k, factors)
        assert symmetry_factor_from_presentation(k, factors) == symmetry_factor(t)
