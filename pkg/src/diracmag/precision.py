"""Working-precision policies.

Every numerical routine takes a :class:`PrecisionPolicy`.  The policy owns an
mpmath context: ``mpmath.fp`` (plain binary64 floats) for the fast mode, or a
private :class:`mpmath.MPContext` for extended precision.  Private contexts
keep the working precision out of mpmath's global state, so policies can be
used from several threads at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

# CODATA 2018 and CODATA 1986 inverse fine-structure constants.
ALPHA_INVERSE_2018 = "137.035999084"
ALPHA_INVERSE_1986 = "137.0359895"

DEFAULT_DIGITS = 50


@lru_cache(maxsize=None)
def _context(digits):
    if digits is None:
        return mpmath.fp
    ctx = mpmath.MPContext()
    ctx.dps = digits
    return ctx


@dataclass(frozen=True)
class PrecisionPolicy:
    """Working precision, series work limits and tolerance contract.

    ``digits`` is ``None`` for binary64.  ``tolerance`` is the relative
    accuracy every summation is asked to reach; ``term_cap`` bounds the
    number of terms any single series may consume.
    """

    digits: int | None = DEFAULT_DIGITS
    tolerance: float | None = None
    term_cap: int = 500_000

    def __post_init__(self):
        if self.digits is not None and self.digits < 16:
            raise ValueError("extended precision needs at least 16 digits")
        if self.tolerance is None:
            tol = 1e-13 if self.digits is None else 10.0 ** (-(self.digits // 2))
            object.__setattr__(self, "tolerance", tol)
        if self.term_cap < 16:
            raise ValueError("term_cap must be at least 16")

    @classmethod
    def fast64(cls, **kwargs) -> PrecisionPolicy:
        return cls(digits=None, **kwargs)

    @classmethod
    def extended(cls, digits: int = DEFAULT_DIGITS, **kwargs) -> PrecisionPolicy:
        return cls(digits=digits, **kwargs)

    @classmethod
    def parse(cls, text: str) -> PrecisionPolicy:
        """Parse ``"fast64"`` or ``"extended:N"``."""
        text = text.strip().lower()
        if text == "fast64":
            return cls.fast64()
        if text == "extended":
            return cls.extended()
        if text.startswith("extended:"):
            try:
                digits = int(text.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"bad precision setting {text!r}") from None
            return cls.extended(digits)
        raise ValueError(f"bad precision setting {text!r}; use fast64 or extended:N")

    @property
    def ctx(self):
        return _context(self.digits)

    @property
    def is_fast(self) -> bool:
        return self.digits is None

    @property
    def eps(self) -> float:
        """Unit roundoff of the working precision."""
        if self.digits is None:
            return 2.0 ** -53
        return float(self.ctx.eps)

    @property
    def label(self) -> str:
        return "fast64" if self.digits is None else f"extended:{self.digits}"

    def num(self, value):
        """Convert ``value`` (int, str, Fraction, float or mpf) to a working real."""
        ctx = self.ctx
        if isinstance(value, Fraction):
            return ctx.mpf(value.numerator) / value.denominator
        if isinstance(value, str):
            if self.is_fast:
                return float(Fraction(value))
            if "/" in value:
                return self.num(Fraction(value))
            return ctx.mpf(value)
        if self.is_fast:
            return float(value)
        return ctx.mpf(value)

    def alpha(self, alpha=None):
        """Fine-structure constant as a working real; default CODATA 2018."""
        if alpha is None:
            return 1 / self.num(ALPHA_INVERSE_2018)
        return self.num(alpha)


DEFAULT_POLICY = PrecisionPolicy()


def resolve(policy: PrecisionPolicy | None) -> PrecisionPolicy:
    return DEFAULT_POLICY if policy is None else policy


def alpha_from_inverse(inverse, policy: PrecisionPolicy | None = None):
    """Return ``1/inverse`` at working precision (inverse as string keeps all digits)."""
    policy = resolve(policy)
    return 1 / policy.num(inverse)


class CompensatedSum:
    """Neumaier compensated accumulator; works for floats and mpf alike."""

    __slots__ = ("total", "comp", "abs_total")

    def __init__(self, zero=0.0):
        self.total = zero
        self.comp = zero * 0
        self.abs_total = zero * 0

    def add(self, x):
        t = self.total + x
        if abs(self.total) >= abs(x):
            self.comp += (self.total - t) + x
        else:
            self.comp += (x - t) + self.total
        self.total = t
        self.abs_total += abs(x)

    @property
    def value(self):
        return self.total + self.comp


def compensated_sum(values, zero=0.0, largest_first=False):
    """Sum ``values``; returns ``(sum, sum_of_abs)``.

    With ``largest_first`` the items are accumulated by decreasing magnitude,
    which limits digit loss for alternating sums of large terms.
    """
    items = list(values)
    if largest_first:
        items.sort(key=abs, reverse=True)
    acc = CompensatedSum(zero)
    for x in items:
        acc.add(x)
    return acc.value, acc.abs_total


def relative_difference(a, b) -> float:
    scale = max(abs(a), abs(b))
    if scale == 0:
        return 0.0
    return float(abs(a - b) / scale)


def as_float(x) -> float:
    return float(x)


def isclose_rel(a, b, rel) -> bool:
    return math.isclose(float(a), float(b), rel_tol=rel, abs_tol=0.0)
