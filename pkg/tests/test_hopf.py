import random
from fractions import Fraction

import pytest

from fracphi.errors import GraftIntoNoise, InvalidNode, MissingGeneratorValue, StarIntoNoise
from fracphi.homogeneity import SKNumber
from fracphi.hopf import (
    Character,
    HopfStructure,
    act,
    act_by_star,
    act_planted,
    convolve,
    graft,
    graft_at,
    inner,
    invert,
    star,
    up,
)
from fracphi.rulegen import classify, generate
from fracphi.treeparse import parse, parse_tree
from fracphi.trees import XI, Comb, homogeneity, monomial, node, planted, symmetry_factor, unit, unit_vector, zero

S = Fraction(9, 10)
Z = zero()
E1 = unit_vector(1)
X1 = monomial(E1)
ONE = unit()
I_XI = planted(Z, XI)
SQUARE = parse_tree("I(Xi)I(Xi)")
CUBE = parse_tree("I(Xi)I(Xi)I(Xi)")
HOPF = HopfStructure(S)


def test_graft_at_root():
    t = graft_at(XI, Z, 0, I_XI)
    assert t is SQUARE
    assert homogeneity(t) == SKNumber(-3, 2, -2)


def test_graft_at_leaf_rejected():
    with pytest.raises(InvalidNode):
        graft_at(XI, Z, 1, I_XI)
    with pytest.raises(InvalidNode):
        graft_at(XI, Z, 7, I_XI)


def test_graft_into_square_has_one_inner_node():
    assert graft(XI, Z, SQUARE) == Comb.single(CUBE)


def test_graft_into_unit_and_noise():
    assert graft(CUBE, Z, ONE) == Comb.single(planted(Z, CUBE))
    with pytest.raises(GraftIntoNoise):
        graft(XI, Z, XI)


def test_graft_through_polynomial_decoration():
    # the lowered edge I_{-e1} is not admissible, so only the undeformed term survives
    assert graft(CUBE, Z, X1) == Comb.single(node(E1, [(Z, CUBE)]))
    assert graft(CUBE, E1, X1) == parse(f"X^(0,1,0,0) I[(0,1,0,0)]({'I(Xi)I(Xi)I(Xi)'}) + I(I(Xi)I(Xi)I(Xi))")


def test_up():
    assert up(Z, SQUARE) == Comb.single(SQUARE)
    assert up(E1, I_XI) == Comb.single(node(E1, [(Z, XI)]))
    assert up(E1, SQUARE) == parse("X^(0,1,0,0) I(Xi)I(Xi)")


def test_star():
    assert star(ONE, CUBE) == Comb.single(CUBE)
    assert star(X1, SQUARE) == up(E1, SQUARE)
    assert star(node(Z, [(Z, CUBE)]), X1) == Comb.single(node(E1, [(Z, CUBE)]))
    with pytest.raises(StarIntoNoise):
        star(X1, XI)


def test_star_adds_homogeneity(negative_trees):
    mu = node(Z, [(Z, planted(Z, CUBE))])
    for tau in negative_trees[:60]:
        if tau.is_noise:
            continue
        for t in star(mu, tau):
            assert homogeneity(t) == homogeneity(mu) + homogeneity(tau)


def test_coaction_examples():
    assert HOPF.coaction(XI) == Comb.single((XI, ONE))
    t = parse_tree("X^(0,1,0,0) I(Xi)I(Xi)")
    assert HOPF.coaction(t) == Comb({(t, ONE): 1, (SQUARE, X1): 1})


def test_coproduct_plus():
    assert HOPF.coproduct_plus(X1) == Comb({(ONE, X1): 1, (X1, ONE): 1})
    assert HOPF.coproduct_plus(ONE) == Comb.single((ONE, ONE))
    x2 = monomial((0, 0, 1, 0))
    assert len(HOPF.coproduct_plus(node((0, 1, 1, 0)))) == 4
    assert HOPF.coproduct_plus(node((0, 1, 1, 0)))[(X1, x2)] == 1


def test_inner():
    assert inner(CUBE, CUBE) == 6
    assert inner(XI, I_XI) == 0
    assert inner(Comb.single(CUBE, 2), Comb.single(CUBE, 3)) == 36


def test_act_on_monomial():
    g = Character.from_dict({X1: Fraction(3, 2)})
    assert act(HOPF, g, X1) == Comb({X1: 1, ONE: Fraction(3, 2)})


def test_identity_and_full_trees_in_w():
    ident = Character.identity()
    g = Character.random(5)
    for tau in generate(S, SKNumber()):
        assert act(HOPF, ident, tau) == Comb.single(tau)
    for tau in classify(generate(S, SKNumber())).W:
        assert act(HOPF, g, tau) == Comb.single(tau)
        assert act(HOPF, g, planted(Z, tau)) == Comb.single(planted(Z, tau))


def test_missing_generator():
    g = Character.from_dict({})
    with pytest.raises(MissingGeneratorValue):
        act(HOPF, g, X1)


def test_convolve_and_invert_on_primitives():
    g1, g2 = Character.random(1), Character.random(2)
    assert convolve(HOPF, g1, g2)(X1) == g1(X1) + g2(X1)
    assert invert(HOPF, g1)(X1) == -g1(X1)
    assert invert(HOPF, Character.identity())(X1) == 0
    assert convolve(HOPF, g1, Character.identity())(X1) == g1(X1)


def test_inverse_is_a_two_sided_unit(negative_trees):
    forests = set()
    for tau in negative_trees:
        forests.update(mu for _, mu in HOPF.coaction(tau))
    forests = sorted(forests, key=lambda t: t.key)
    for seed in range(200):
        g = Character.random(seed)
        left = convolve(HOPF, invert(HOPF, g), g)
        right = convolve(HOPF, g, invert(HOPF, g))
        for mu in forests[:12]:
            expected = 1 if mu == ONE else 0
            assert left(mu) == expected and right(mu) == expected


def test_group_law(negative_trees):
    rng = random.Random(0)
    for i in range(100):
        g1, g2 = Character.random(f"a{i}"), Character.random(f"b{i}")
        tau = rng.choice(negative_trees)
        assert act(HOPF, convolve(HOPF, g1, g2), tau) == act(HOPF, g1, act(HOPF, g2, tau))


def test_duality_pinned_instance():
    sigma = parse_tree("X^(0,1,0,0) I(Xi)I(Xi)")
    assert HOPF.duality_sides(X1, SQUARE, sigma) == (2, 2)


def test_duality_on_negative_trees(negative_trees):
    for sigma in negative_trees[:80]:
        for tau in negative_trees:
            if tau.is_noise or homogeneity(sigma).lt(homogeneity(tau), S):
                continue
            for mu in HOPF.forests_of_degree(homogeneity(sigma) - homogeneity(tau), sigma):
                lhs, rhs = HOPF.duality_sides(mu, tau, sigma)
                assert lhs == rhs


def test_coassociativity(negative_trees):
    for tau in negative_trees:
        left, right = HOPF.coassociativity_sides(tau)
        assert left == right


def test_action_by_star_matches_coaction(negative_trees):
    g = Character.random(9)
    for tau in negative_trees[:40]:
        direct = act(HOPF, g, tau)
        for sigma in negative_trees:
            if homogeneity(tau).lt(homogeneity(sigma), S) or sigma.is_noise:
                continue
            assert act_by_star(HOPF, g, tau, sigma) == direct.get(sigma, Fraction(0)) * symmetry_factor(sigma)


def test_planted_components(negative_trees):
    g = Character.random(4)
    for tau in negative_trees[:60]:
        if tau.is_monomial:
            continue
        for m in (Z, E1):
            p = planted(m, tau)
            assert act_planted(HOPF, g, m, tau) == act(HOPF, g, p)


def test_function_like_sector():
    ts = generate(S, SKNumber(0, 2, 0))
    cls = classify(ts)
    allowed = {planted(Z, t) for t in cls.V}
    g = Character.random(3)
    for tau in cls.V[:300]:
        for key in act(HOPF, g, planted(Z, tau)):
            assert key.is_monomial or key in allowed
