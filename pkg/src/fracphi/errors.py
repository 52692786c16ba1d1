"""Exception types shared across the package."""

from __future__ import annotations


class FracPhiError(Exception):
    """Base class for all package errors."""


class NoiseProduct(FracPhiError, ValueError):
    """The tree product was asked to multiply the noise atom."""


class DimensionMismatch(FracPhiError, ValueError):
    """Multi-indices of different lengths were combined."""


class NotSubTernary(FracPhiError, ValueError):
    """A node carries more than three branches."""


class NotInGrammar(FracPhiError, ValueError):
    """A tree is not produced by the generation rule."""


class NotSubcritical(FracPhiError, ValueError):
    """The rule is not subcritical; ``witness`` has homogeneity at most that of the noise."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class InvalidNode(FracPhiError, ValueError):
    """A node handle is out of range or points at a noise leaf."""


class GraftIntoNoise(FracPhiError, ValueError):
    """Grafting onto the noise atom is undefined."""


class StarIntoNoise(FracPhiError, ValueError):
    """The star product into the noise atom is undefined."""


class MissingGeneratorValue(FracPhiError, KeyError):
    """A character was evaluated on a generator it does not know."""


class ShapeViolation(FracPhiError, ValueError):
    """A coherence coefficient has none of the expected cubic shapes."""


class IdentityViolation(FracPhiError, AssertionError):
    """An algebraic identity failed; ``key`` is the first differing tree."""

    def __init__(self, message: str, key=None):
        super().__init__(message)
        self.key = key


class GammaOutOfRange(FracPhiError, ValueError):
    """The regularity parameter lies outside the admissible interval."""


class BetaOutOfRange(FracPhiError, ValueError):
    """A truncation level lies outside the admissible interval."""


class ExcludedTree(FracPhiError, ValueError):
    """The closed-form exponent is not defined for this tree."""


class TreeSyntaxError(FracPhiError, SyntaxError):
    """Malformed tree expression; ``position`` is the character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class Blowup(FracPhiError, RuntimeError):
    """A simulation exceeded its sup-norm guard."""


class MissingGradient(FracPhiError, ValueError):
    """A germ seminorm of order above one needs a gradient that is not available."""
