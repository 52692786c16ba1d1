import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracphi.coherence import (
    CUBIC,
    Coherence,
    Jet,
    Remainder,
    alpha,
    alpha_closed_form,
    alpha_prime,
    build_V,
    cubic_shape,
    dpd_check,
    gamma_on_expr,
    gradient_V,
    jet_derive,
    jet_shift,
    star_table_expected,
    base_point_check,
    square_check,
    gradient_check,
    lemma224_check,
    square_V,
    truncate,
    upsilon,
    upsilon_star,
)
from fracphi.errors import (
    BetaOutOfRange,
    ExcludedTree,
    GammaOutOfRange,
    IdentityViolation,
    NotInGrammar,
)
from fracphi.homogeneity import SKNumber
from fracphi.hopf import Character, HopfStructure, star
from fracphi.rulegen import classify, generate
from fracphi.treeparse import parse_tree
from fracphi.trees import XI, homogeneity, node, planted, symmetry_factor, unit, unit_vector, zero

S = Fraction(9, 10)
G = SKNumber(Fraction(13, 10))
Z = zero()
E1 = unit_vector(1)
V0 = Jet.var(Z)
I_XI = planted(Z, XI)
CUBE = parse_tree("I(Xi)I(Xi)I(Xi)")


@pytest.fixture(scope="module")
def rem():
    return Remainder(S, G)


def test_jet_derivatives():
    assert jet_derive(CUBIC, Z) == V0 * V0 * -3
    assert jet_derive(CUBIC, E1) == Jet()
    assert jet_derive(jet_derive(jet_derive(CUBIC, Z), Z), Z) == -6


def test_jet_shift():
    x1 = Jet.var(E1)
    assert jet_shift(V0 * -6, E1) == x1 * -6
    assert jet_shift(Jet.const(5), E1) == Jet()
    assert jet_shift(V0 * V0, E1) == V0 * x1 * 2


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(-4, 4)), min_size=1, max_size=4),
       st.fractions(min_value=-3, max_value=3, max_denominator=5),
       st.fractions(min_value=-3, max_value=3, max_denominator=5))
def test_shift_is_a_derivation(terms, a, b):
    f = Jet()
    for p, c in terms:
        f = f + (Jet.var(Z, p) * c if p else Jet.const(c))
    point = {Z: a, E1: b}
    shifted = jet_shift(f, E1)
    # d/dx f(v(x)) = f'(v) v_x, checked at a rational point
    assert shifted.evaluate(point) == jet_derive(f, Z).evaluate(point) * b


def test_noise_value_is_minus_one():
    assert upsilon(XI) == -1


def test_cube_rule(negative_trees):
    for t in negative_trees:
        if t.is_monomial or t.k != Z or len(t.children) != 3:
            continue
        (m1, a), (m2, b), (m3, c) = t.children
        if m1 == m2 == m3 == Z:
            assert upsilon(t) == upsilon(a) * upsilon(b) * upsilon(c) * -6


def test_edge_decorations_vanish(negative_trees):
    for t in negative_trees:
        if t.is_monomial:
            continue
        assert upsilon(node(Z, [(E1, t)])) == Jet()
        if any(m != Z for v in [t] for m, _ in v.children):
            assert upsilon(t) == Jet()


def test_outside_grammar():
    with pytest.raises(NotInGrammar):
        upsilon(node(Z, [(Z, XI)] * 4))


def test_shapes():
    shape = cubic_shape(CUBE)
    assert (shape.c, shape.shape, shape.power) == (6, "v", 0)
    assert cubic_shape(I_XI).jet() == V0 * V0 * 3
    t = parse_tree("X^(0,1,0,0) I(Xi)I(Xi)")
    shape = cubic_shape(t)
    assert (shape.shape, shape.direction) == ("vX", 1)
    assert cubic_shape(planted(E1, XI)).shape == "zero"


def test_shape_law_and_constants_on_the_negative_set(negative_trees):
    w = set(classify(generate(S, SKNumber())).W)
    for t in negative_trees:
        if t.is_monomial:
            continue
        shape = cubic_shape(t)
        assert shape.jet() == upsilon(t)
        if t in w:
            assert upsilon(t).is_constant()


def test_star_with_unit():
    assert upsilon_star(unit(), CUBE) == upsilon(CUBE)


def test_star_table_square_case():
    sigma = parse_tree("I(Xi)I(Xi)")
    mu = node(Z, [(Z, sigma)])
    got = Coherence().comb(star(mu, I_XI))
    assert got == V0 * upsilon(sigma) * 6
    assert star_table_expected(I_XI, mu) == got


def test_star_table_constant_case():
    mu = node(E1)
    assert upsilon_star(mu, CUBE) == Jet()
    assert Coherence().comb(star(mu, CUBE)) == Jet()


def test_alpha_values():
    a = alpha(I_XI, S)
    assert a.value == Fraction(1, 3)
    assert alpha(XI, S) == a
    assert alpha(CUBE, S).value == 3 * a.value
    assert alpha_closed_form(I_XI, S) == alpha(I_XI, S)


def test_alpha_exclusion():
    with pytest.raises(ExcludedTree):
        alpha_closed_form(XI, S)
    with pytest.raises(ExcludedTree):
        alpha_closed_form(node(E1), S)


def test_alpha_at_the_noise_is_not_different():
    # the raw closed form evaluated on the noise coincides with alpha there
    assert alpha_prime(XI, S) == alpha(XI, S)


@pytest.mark.parametrize("s", [Fraction(4, 5), Fraction(9, 10)])
def test_alpha_closed_form_everywhere(s):
    for t in generate(s, SKNumber()):
        if t.is_noise or t.is_monomial:
            continue
        assert alpha(t, s) == alpha_closed_form(t, s)
        assert alpha_closed_form(planted(Z, t), s) == alpha_closed_form(t, s)


def test_build_V_keys(rem):
    v = build_V(S, G)
    assert v[unit()] == V0
    cls = rem.classes
    expected = {unit()} | {node(unit_vector(j)) for j in (1, 2, 3)}
    expected |= {planted(Z, t) for t in cls.v_range(SKNumber(), G) if upsilon(t)}
    assert set(v) == expected
    w = {planted(Z, t) for t in cls.W}
    assert not set(v) & w


def test_gamma_range():
    with pytest.raises(GammaOutOfRange):
        build_V(S, SKNumber(2))
    with pytest.raises(GammaOutOfRange):
        Remainder(S, SKNumber(1))


def test_truncation(rem):
    v = rem.V()
    assert truncate(v, SKNumber(100), S) == v
    low = rem.V(SKNumber(Fraction(1, 2)))
    assert not any(t.is_monomial and t != unit() for t in low)
    a, b = SKNumber(Fraction(7, 10)), SKNumber(Fraction(11, 10))
    assert truncate(truncate(v, a, S), b, S) == truncate(v, a, S)
    with pytest.raises(BetaOutOfRange):
        rem.V(SKNumber(2))


def test_square(rem):
    sq = square_V(S, G, SKNumber(Fraction(1, 2)))
    assert sq[unit()] == V0 * V0
    assert sq[unit()] * 3 == upsilon(I_XI)
    assert not any(t.is_monomial and t != unit() for t in sq)
    with pytest.raises(BetaOutOfRange):
        square_V(S, G, SKNumber(Fraction(3, 2)))


def test_gradient():
    grad = gradient_V(S, 1, G)
    assert grad[unit()] == Jet.var(E1)
    for t in grad:
        if t != unit():
            assert homogeneity(t).is_positive(S)
            assert all(m == E1 for m, _ in t.children)


def test_identity_character(rem):
    v = rem.V()
    assert gamma_on_expr(HopfStructure(S), Character.identity(), v) == v


def test_remainder_identity():
    report = dpd_check(S, G)
    assert report.ok and report.epsilon == Fraction(1, 20)
    assert report.delta_checked > 0 and not report.delta_failures


def test_remainder_identity_falsifies_nothing_for_either_sign():
    # the identity is covariant under the sign of the noise value
    assert dpd_check(S, G, coherence=Coherence(noise_value=1)).ok


def test_sign_is_pinned_by_the_square_identity(rem):
    flipped = Remainder(S, G, coherence=Coherence(noise_value=1))
    report = square_check(flipped, Character.random(1), SKNumber(Fraction(1, 2)))
    assert not report.ok
    with pytest.raises(IdentityViolation):
        report.raise_if_failed()
    assert square_check(rem, Character.random(1), SKNumber(Fraction(1, 2))).ok


def test_symmetry_identity_for_three_noises():
    t = node(Z, [(Z, XI)] * 3)
    assert symmetry_factor(t) == 6 * symmetry_factor(XI) ** 3


def test_symmetry_identity_for_distinct_members():
    w = classify(generate(Fraction(4, 5), SKNumber())).W
    full = [t for t in w if t.k == Z][:3]
    a, b, c = full
    t = node(Z, [(Z, a), (Z, b), (Z, c)])
    assert symmetry_factor(t) == symmetry_factor(a) * symmetry_factor(b) * symmetry_factor(c)


def test_character_identities(rem):
    rng = random.Random(0)
    for i in range(8):
        ch = Character.random(f"c{i}")
        beta = SKNumber(Fraction(rng.randint(1, 13), 10))
        assert base_point_check(rem, ch, beta).ok
        assert square_check(rem, ch, SKNumber(Fraction(rng.randint(1, 10), 10))).ok
        assert lemma224_check(rem, ch, SKNumber(Fraction(rng.randint(11, 13), 10))).ok
        for j in (1, 2, 3):
            assert gradient_check(rem, ch, j).ok


def test_gradient_has_undescribed_components(rem):
    report = gradient_check(rem, Character.random(2), 1)
    assert report.ok
    assert "I[(0,1,0,0)](I(Xi)*I(Xi))" in report.extra


def test_constant_shape_component(rem):
    ch = Character.random(6)
    tau = parse_tree("I(Xi)I(Xi)I(I(Xi)I(Xi)I(Xi))")
    shape = cubic_shape(tau)
    assert shape.shape == "v" and shape.power == 0
    direct = rem.act(ch, rem.V())
    assert direct[planted(Z, tau)] * symmetry_factor(tau) == shape.c

