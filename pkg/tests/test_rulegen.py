import time
from fractions import Fraction

import pytest

from fracphi.errors import NotSubcritical
from fracphi.homogeneity import NOISE, SKNumber
from fracphi.rulegen import classify, count_edges, generate, oracle_generate
from fracphi.treeparse import parse_tree
from fracphi.trees import XI, homogeneity, in_grammar, is_full, missing_count, monomial, planted, zero

S = Fraction(9, 10)
TWO_S = SKNumber(0, 2, 0)


def test_negative_set_at_nine_tenths():
    cls = classify(generate(S, SKNumber()))
    assert set(cls.W) == {XI, parse_tree("I(Xi)I(Xi)I(Xi)")}
    assert set(cls.dW) == {
        parse_tree("I(Xi)I(Xi)I(I(Xi)I(Xi)I(Xi))"),
        parse_tree("I(Xi)I(I(Xi)I(Xi)I(Xi))I(I(Xi)I(Xi)I(Xi))"),
        parse_tree("I(I(Xi)I(Xi)I(Xi))I(I(Xi)I(Xi)I(Xi))I(I(Xi)I(Xi)I(Xi))"),
    }


@pytest.mark.parametrize("s", [Fraction(3, 4), Fraction(7, 10)])
def test_not_subcritical(s):
    with pytest.raises(NotSubcritical) as info:
        generate(s, SKNumber())
    assert info.value.witness == parse_tree("I(Xi)I(Xi)I(Xi)")


@pytest.mark.parametrize("s", [Fraction(9, 10), Fraction(19, 20)])
def test_seeds_present(s):
    ts = generate(s, TWO_S, max_poly_degree=1)
    assert XI in ts and planted(zero(), XI) in ts and monomial((0, 1, 0, 0)) in ts


@pytest.mark.parametrize("s", [Fraction(4, 5), Fraction(5, 6)])
def test_seeds_present_below_zero(s):
    # the 2s cutoff is out of reach this close to the critical value
    ts = generate(s, SKNumber())
    assert XI in ts and planted(zero(), XI) in ts


def test_classes_are_disjoint_from_monomials():
    cls = classify(generate(S, TWO_S))
    p = set(cls.P)
    assert not p & set(cls.W) and not p & set(cls.V)


def test_noise_is_strictly_lowest(trees_2s):
    for t in trees_2s:
        if t is not XI:
            assert NOISE.lt(homogeneity(t), S)
        assert in_grammar(t)


def test_monotone_in_cutoff():
    small = set(generate(S, SKNumber(-1)))
    assert small <= set(generate(S, SKNumber()))


def test_empty_below_noise():
    assert len(oracle_generate(S, NOISE, max_edges=4)) == 0
    assert len(generate(S, NOISE)) == 0


@pytest.mark.parametrize("s", [Fraction(4, 5), Fraction(9, 10), Fraction(19, 20)])
def test_matches_oracle(s):
    ts = generate(s, SKNumber())
    oracle = oracle_generate(s, SKNumber(), max_edges=8)
    assert {t for t in ts if count_edges(t) <= 8} == set(oracle)


def test_negative_set_shrinks_with_s():
    sizes = [len(classify(generate(Fraction(n, 40), SKNumber())).W) for n in range(32, 40)]
    assert sizes == sorted(sizes, reverse=True)


def test_negative_set_counts():
    counts = {s: len(classify(generate(s, SKNumber())).W)
              for s in (Fraction(4, 5), Fraction(5, 6), Fraction(9, 10), Fraction(19, 20))}
    assert counts == {Fraction(4, 5): 8, Fraction(5, 6): 6, Fraction(9, 10): 2, Fraction(19, 20): 1}


def test_edge_decorated_noise_joins_the_negative_set_at_four_fifths():
    cls = classify(generate(Fraction(4, 5), SKNumber()))
    full = [t for t in cls.W if is_full(t)]
    assert len(full) == 5
    for t in full:
        assert missing_count(t) == 0
    assert planted((0, 0, 1, 0), XI) in cls.W


def test_deterministic():
    a = generate(S, TWO_S)
    b = generate(S, TWO_S)
    assert a.trees == b.trees
    assert a.to_json() == b.to_json()


def test_generation_is_fast():
    t0 = time.perf_counter()
    generate(Fraction(4, 5), SKNumber())
    assert time.perf_counter() - t0 < 10
