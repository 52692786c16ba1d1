"""Verification suites shared by the command line and the test-suite.

Every suite returns a :class:`SuiteResult` with the number of instances
checked and a rendering of the first counterexamples.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .coherence import (
    Coherence,
    Remainder,
    alpha,
    alpha_closed_form,
    alpha_prime,
    cubic_shape,
    dpd_check,
    jet_text,
    star_table_expected,
    base_point_check,
    square_check,
    gradient_check,
    lemma224_check,
)
from .errors import ExcludedTree, FracPhiError
from .homogeneity import SKNumber, as_fraction
from .hopf import Character, HopfStructure, act, convolve, invert, star
from .rulegen import classify, generate
from .treeparse import parse_tree
from .trees import (
    XI,
    Comb,
    Tree,
    edge_degree,
    homogeneity,
    in_grammar,
    is_full,
    missing_count,
    node,
    planted,
    poly_degree,
    symmetry_factor,
    symmetry_factor_from_presentation,
    to_text,
    unit,
    unit_vector,
    zero,
)

__all__ = ["SuiteResult", "SUITES", "run_suite", "pinned_duality"]

TWO_S = SKNumber(0, 2, 0)
MAX_REPORTED = 5


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, message: str) -> None:
        self.failures.append(message)

    def render(self) -> str:
        lines = [f"{self.name}: {'PASS' if self.passed else 'FAIL'} ({self.checked} checked)"]
        lines += [f"  counterexample: {f}" for f in self.failures[:MAX_REPORTED]]
        if len(self.failures) > MAX_REPORTED:
            lines.append(f"  ... {len(self.failures) - MAX_REPORTED} more")
        lines += [f"  note: {n}" for n in self.notes]
        return "\n".join(lines)


def _fmt(*trees: Tree) -> str:
    return ", ".join(to_text(t) for t in trees)


# ------------------------------------------------------------------ duality


def pinned_duality(d: int = 3) -> tuple[Fraction, Fraction]:
    """``<X^{e1} * I(Xi)^2, X^{e1} I(Xi)^2>`` and ``<I(Xi)^2 (x) X^{e1}, Delta X^{e1} I(Xi)^2>``."""
    hopf = HopfStructure(Fraction(9, 10), d)
    mu = node(unit_vector(1, d))
    tau = parse_tree("I(Xi)I(Xi)", d)
    sigma = parse_tree("X^(0,1,0,0) I(Xi)I(Xi)", d)
    return hopf.duality_sides(mu, tau, sigma)


def duality(s=Fraction(9, 10), cutoff: SKNumber = SKNumber(), samples: int = 1000, seed: int = 7,
            d: int = 3) -> SuiteResult:
    s = as_fraction(s)
    out = SuiteResult("duality")
    hopf = HopfStructure(s, d)
    trees = list(generate(s, cutoff, d))
    for sigma in trees:
        hs = homogeneity(sigma)
        for tau in trees:
            if tau.is_noise or hs.lt(homogeneity(tau), s):
                continue
            for mu in hopf.forests_of_degree(hs - homogeneity(tau), sigma):
                lhs, rhs = hopf.duality_sides(mu, tau, sigma)
                out.checked += 1
                if lhs != rhs:
                    out.fail(f"mu, tau, sigma = {_fmt(mu, tau, sigma)}: {lhs} != {rhs}")
    exhaustive = out.checked
    rng = random.Random(seed)
    for _ in range(samples):
        sigma = rng.choice(trees)
        terms = sorted(hopf.coaction(sigma), key=lambda p: (p[0].key, p[1].key))
        if rng.random() < 0.5 and terms:
            tau, mu = rng.choice(terms)
        else:
            tau = rng.choice(trees)
            options = hopf.forests_of_degree(homogeneity(sigma) - homogeneity(tau), sigma)
            mu = rng.choice(options) if options else unit(d)
        if tau.is_noise:
            continue
        lhs, rhs = hopf.duality_sides(mu, tau, sigma)
        out.checked += 1
        if lhs != rhs:
            out.fail(f"fuzz mu, tau, sigma = {_fmt(mu, tau, sigma)}: {lhs} != {rhs}")
    lhs, rhs = pinned_duality(d)
    out.checked += 1
    if (lhs, rhs) != (2, 2):
        out.fail(f"pinned instance gives ({lhs}, {rhs}), expected (2, 2)")
    out.notes.append(f"{exhaustive} exhaustive triples below {cutoff} at s = {s}; pinned instance ({lhs}, {rhs})")
    return out


# ----------------------------------------------------------------- Hopf laws


def coassociativity(s=Fraction(9, 10), cutoff: SKNumber = SKNumber(), d: int = 3) -> SuiteResult:
    s = as_fraction(s)
    out = SuiteResult("coassociativity")
    hopf = HopfStructure(s, d)
    forests: set[Tree] = set()
    for tau in generate(s, cutoff, d):
        left, right = hopf.coassociativity_sides(tau)
        out.checked += 1
        if left != right:
            out.fail(f"coaction on {to_text(tau)}")
        forests.update(mu for _, mu in hopf.coaction(tau))
    for mu in sorted(forests, key=lambda t: t.key):
        left, right = hopf.coassociativity_sides(mu, plus=True)
        out.checked += 1
        if left != right:
            out.fail(f"forest coproduct on {to_text(mu)}")
    return out


def group(s=Fraction(9, 10), cutoff: SKNumber = SKNumber(), samples: int = 500, seed: int = 7,
          d: int = 3) -> SuiteResult:
    s = as_fraction(s)
    out = SuiteResult("group")
    hopf = HopfStructure(s, d)
    trees = list(generate(s, cutoff, d))
    rng = random.Random(seed)
    for i in range(samples):
        g1 = Character.random(f"{seed}:{i}:1")
        g2 = Character.random(f"{seed}:{i}:2")
        tau = rng.choice(trees)
        composed = act(hopf, g1, act(hopf, g2, tau))
        out.checked += 1
        if act(hopf, convolve(hopf, g1, g2), tau) != composed:
            out.fail(f"group law on {to_text(tau)} with {g1.label}, {g2.label}")
        out.checked += 1
        if act(hopf, invert(hopf, g1), act(hopf, g1, tau)) != Comb.single(tau):
            out.fail(f"inverse law on {to_text(tau)} with {g1.label}")
    return out


# --------------------------------------------------------------- coherence


def meeting_pairs(hopf: HopfStructure, trees: list[Tree]) -> list[tuple[Tree, Tree]]:
    """Pairs ``(mu, tau)`` with ``tau`` in ``trees`` such that ``mu * tau`` can have a
    component in ``trees``; every other pair stars outside the set."""
    s = hopf.s
    pairs: set[tuple[Tree, Tree]] = set()
    for rho in trees:
        hr = homogeneity(rho)
        for tau in trees:
            if tau.is_noise or hr.lt(homogeneity(tau), s):
                continue
            for mu in hopf.forests_of_degree(hr - homogeneity(tau), rho):
                pairs.add((mu, tau))
    return sorted(pairs, key=lambda p: (p[1].key, p[0].key))


def morphism(s=Fraction(9, 10), cutoff: SKNumber = SKNumber(), d: int = 3) -> SuiteResult:
    """``Upsilon[mu * tau]`` against the product rule, on pairs meeting ``T_{<cutoff}``."""
    s = as_fraction(s)
    out = SuiteResult("morphism")
    hopf = HopfStructure(s, d)
    coh = Coherence(d=d)
    trees = list(generate(s, cutoff, d))
    for mu, tau in meeting_pairs(hopf, trees):
        out.checked += 1
        if coh.comb(star(mu, tau)) != coh.star(mu, tau):
            out.fail(f"mu, tau = {_fmt(mu, tau)}")
    return out


def shapes(s=Fraction(9, 10), d: int = 3) -> SuiteResult:
    """Shape law on the negative trees, vanishing rules and the four-case star table."""
    s = as_fraction(s)
    out = SuiteResult("shapes")
    hopf = HopfStructure(s, d)
    coh = Coherence(d=d)
    z = zero(d)
    ts = list(generate(s, SKNumber(), d))
    negative = [t for t in ts if not t.is_monomial]
    branches: dict[str, int] = {}
    for tau in negative:
        out.checked += 1
        try:
            shape = cubic_shape(tau, coh)
        except FracPhiError as exc:
            out.fail(f"shape of {to_text(tau)}: {exc}")
            continue
        if shape.shape == "v" and shape.c and shape.power != missing_count(tau):
            out.fail(f"{to_text(tau)}: power {shape.power} but m = {missing_count(tau)}")
        for j in range(1, d + 1):
            out.checked += 1
            if coh(node(z, [(unit_vector(j, d), tau)])):
                out.fail(f"Upsilon[I_{j}({to_text(tau)})] != 0")
        if edge_degree(tau) != SKNumber() and coh(tau):
            out.fail(f"edge-decorated {to_text(tau)} has Upsilon = {jet_text(coh(tau))}")
    one = unit(d)
    for mu, tau in meeting_pairs(hopf, ts):
        if mu == one or tau.is_monomial:
            continue
        out.checked += 1
        shape = cubic_shape(tau, coh)
        label = f"{shape.shape}{shape.power if shape.shape == 'v' else ''}"
        branches[label] = branches.get(label, 0) + 1
        direct = coh.comb(star(mu, tau))
        if star_table_expected(tau, mu, coh) != direct:
            out.fail(f"star table at mu, tau = {_fmt(mu, tau)}: {jet_text(direct)}")
    out.notes.append("star-table cases by shape of Upsilon[tau]: " +
                     ", ".join(f"{k}: {v}" for k, v in sorted(branches.items())))
    return out


# ------------------------------------------------------------ remainder


def dpd(s=Fraction(9, 10), gamma: SKNumber = SKNumber.const(Fraction(13, 10)), d: int = 3) -> SuiteResult:
    out = SuiteResult("dpd")
    report = dpd_check(s, gamma, d=d)
    out.checked = len(set(report.lhs) | set(report.rhs)) + report.delta_checked
    if report.first_difference is not None:
        t = report.first_difference
        out.fail(f"coefficient of {to_text(t)}: {jet_text(report.lhs.get(t, {}))} vs "
                 f"{jet_text(report.rhs.get(t, {}))}")
    out.failures += report.delta_failures
    out.notes.append(f"epsilon = {report.epsilon}, {len(report.lhs)} components below gamma = {gamma}")
    return out


def _beta(rng: random.Random, lo: Fraction, hi: Fraction) -> SKNumber:
    """Random rational in ``(lo, hi]`` on a grid of step ``(hi - lo) / 40``."""
    return SKNumber.const(lo + (hi - lo) * Fraction(rng.randint(1, 40), 40))


def lemmas(s=Fraction(9, 10), gamma: SKNumber = SKNumber.const(Fraction(13, 10)), samples: int = 50,
           seed: int = 7, d: int = 3) -> SuiteResult:
    """Character identities for ``V``, its square, its gradient and its planted components."""
    s = as_fraction(s)
    out = SuiteResult("lemmas")
    rem = Remainder(s, gamma, d)
    g = gamma.value(s)
    rng = random.Random(seed)
    extra: set[str] = set()
    for i in range(samples):
        ch = Character.random(f"{seed}:{i}")
        reports = [
            base_point_check(rem, ch, _beta(rng, Fraction(0), g)),
            square_check(rem, ch, _beta(rng, Fraction(0), Fraction(1))),
            lemma224_check(rem, ch, _beta(rng, Fraction(1), g)),
        ]
        reports += [gradient_check(rem, ch, j) for j in range(1, d + 1)]
        for rep in reports:
            out.checked += rep.checked
            out.failures += [f"{rep.name}: {f}" for f in rep.failures]
            extra.update(rep.extra)
    if extra:
        out.notes.append("gradient components outside V_{1,gamma}: " + ", ".join(sorted(extra)))
    return out


# -------------------------------------------------------------- exponent


def alpha_suite(s_values=(Fraction(4, 5), Fraction(9, 10)), cutoff: SKNumber = SKNumber(), d: int = 3) -> SuiteResult:
    out = SuiteResult("alpha")
    for s in s_values:
        s = as_fraction(s)
        for tau in generate(s, cutoff, d):
            if tau.is_monomial or tau.is_noise:
                continue
            out.checked += 1
            if alpha(tau, s) != alpha_closed_form(tau, s):
                out.fail(f"s = {s}: {to_text(tau)}: {alpha(tau, s)} != {alpha_closed_form(tau, s)}")
        try:
            alpha_closed_form(XI, s)
            out.fail(f"s = {s}: the noise was not excluded")
        except ExcludedTree:
            pass
        a, b = alpha(XI, s), alpha_prime(XI, s)
        relation = "equal" if a == b else "different"
        out.notes.append(f"s = {s}: noise excluded; alpha(Xi) = {a}, "
                         f"closed form at Xi = {b} ({relation})")
    return out


# ------------------------------------------------------------- structure


def _edge_free(t: Tree) -> bool:
    return edge_degree(t) == SKNumber()


def negative_set(s=Fraction(9, 10), edge_free: bool = False, d: int = 3) -> SuiteResult:
    """Members of ``W`` are full with ``m = 0``; ``W \\ {Xi}`` is exactly the ternary
    products of planted members lying below ``-2s``.

    ``edge_free`` restricts the first two laws to trees without edge decorations.
    """
    s = as_fraction(s)
    out = SuiteResult(f"negative set{' (edge-free)' if edge_free else ''} s={s}")
    cls = classify(generate(s, SKNumber(), d))
    wset = set(cls.W)
    z = zero(d)
    for tau in cls.W:
        if edge_free and not _edge_free(tau):
            continue
        out.checked += 1
        if not in_grammar(tau) or missing_count(tau) != 0 or not is_full(tau):
            out.fail(f"W member {to_text(tau)} is not full with m = 0")
        if tau.is_noise:
            continue
        out.checked += 1
        ternary = (
            not any(tau.k) and len(tau.children) == 3
            and all(m == z and c in wset for m, c in tau.children)
        )
        if not ternary:
            out.fail(f"W member {to_text(tau)} is not a product of three planted W members")
    for t in cls.dW:
        out.checked += 1
        if (homogeneity(t) + TWO_S).is_negative(s):
            out.fail(f"ternary product {to_text(t)} of W members lies below -2s but is not in W")
    out.notes.append(f"|W| = {len(cls.W)}, |dW| = {len(cls.dW)}")
    return out


def trivial_action(s=Fraction(9, 10), cutoff: SKNumber = SKNumber(), scope: str = "full",
                   d: int = 3) -> SuiteResult:
    """``Delta tau = tau (x) 1`` and ``Delta I(tau) = I(tau) (x) 1`` for every full ``tau``
    (``scope="full"``) or for every ``tau`` in ``W`` (``scope="W"``)."""
    s = as_fraction(s)
    out = SuiteResult(f"trivial action ({scope}) s={s}")
    hopf = HopfStructure(s, d)
    ts = generate(s, cutoff, d)
    if scope == "W":
        trees = classify(ts).W
    elif scope == "full":
        trees = [t for t in ts if not t.is_monomial and is_full(t)]
    else:
        raise ValueError(f"unknown scope {scope!r}")
    one, z = unit(d), zero(d)
    for tau in trees:
        for t in (tau, planted(z, tau)):
            out.checked += 1
            got = hopf.coaction(t)
            if got != Comb.single((t, one)):
                extra = sorted((p for p in got if p != (t, one)), key=lambda p: (p[0].key, p[1].key))
                out.fail(f"{to_text(t)} has coaction term {_fmt(*extra[0])}")
    return out


def decoration_table(s=Fraction(9, 10), edge_free: bool = False, d: int = 3) -> SuiteResult:
    """Negative trees have ``(m, |n|)`` in ``{(0,0), (1,0), (2,0), (1,1)}`` and
    ``|I(tau)| < 1`` forces ``n = 0``; ``edge_free`` skips edge-decorated trees."""
    s = as_fraction(s)
    out = SuiteResult(f"decoration table{' (edge-free)' if edge_free else ''} s={s}")
    allowed = {(0, 0), (1, 0), (2, 0), (1, 1)}
    for tau in generate(s, SKNumber(), d):
        if tau.is_monomial or (edge_free and not _edge_free(tau)):
            continue
        m, n = missing_count(tau), poly_degree(tau)
        out.checked += 1
        if (m, n.value(s)) not in allowed:
            out.fail(f"{to_text(tau)} has (m, |n|) = ({m}, {n})")
        out.checked += 1
        if (homogeneity(tau) + TWO_S).lt(SKNumber.const(1), s) and n != SKNumber():
            out.fail(f"{to_text(tau)} has |I(tau)| < 1 and polynomial decoration {n}")
    return out


def structure(s=Fraction(9, 10), d: int = 3) -> SuiteResult:
    """All structural laws at one ``s``, with per-law counts in the notes."""
    s = as_fraction(s)
    out = SuiteResult(f"structure s={s}")
    parts = [negative_set(s, d=d), negative_set(s, edge_free=True, d=d),
             trivial_action(s, scope="full", d=d), trivial_action(s, scope="W", d=d),
             decoration_table(s, d=d), decoration_table(s, edge_free=True, d=d)]
    for part in parts:
        out.checked += part.checked
        out.failures += [f"[{part.name}] {f}" for f in part.failures]
        out.notes.append(f"{part.name}: {'PASS' if part.passed else 'FAIL'} "
                         f"({len(part.failures)} of {part.checked} fail)")
        out.notes += part.notes
    return out


# -------------------------------------------------------- symmetry factors


def symmetry(samples: int = 1000, seed: int = 7, d: int = 3) -> SuiteResult:
    out = SuiteResult("symmetry")
    rng = random.Random(seed)
    pool = [XI] + [t for t in generate(Fraction(9, 10), SKNumber(), d) if not t.is_monomial][:40]
    edges = [zero(d), unit_vector(1, d)]
    for _ in range(samples):
        k = tuple(rng.randint(0, 2) for _ in range(d + 1))
        n = rng.randint(0, 4)
        base = [(rng.choice(edges), rng.choice(pool)) for _ in range(rng.randint(1, 2))]
        factors = [rng.choice(base) for _ in range(n)]
        rng.shuffle(factors)
        t = node(k, factors)
        out.checked += 1
        a, b = symmetry_factor(t), symmetry_factor_from_presentation(k, factors)
        if a != b:
            out.fail(f"{to_text(t)}: {a} != {b}")
    return out


SUITES = {
    "duality": duality,
    "coassociativity": coassociativity,
    "group": group,
    "morphism": morphism,
    "shapes": shapes,
    "dpd": dpd,
    "lemma224": lemmas,
    "alpha": alpha_suite,
    "structure": structure,
    "negative-set": negative_set,
    "trivial-action": trivial_action,
    "decoration-table": decoration_table,
    "symmetry": symmetry,
}


def run_suite(name: str, **kwargs) -> SuiteResult:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    return fn(**kwargs)
