"""Exact arithmetic on the lattice of base-n fractions.

Everything here is a pure function of rational inputs.  The carrier type is
``fractions.Fraction``; ``NAdic`` is a canonical mantissa/exponent view of the
subring Z[1/n] used where digit positions matter (digit classes, tail
reductions, vertex indexing).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import ParseError

RationalLike = "int | Fraction | str | NAdic"


def as_fraction(q) -> Fraction:
    """Coerce ints, strings like '5/16', NAdic values, and Fractions."""
    if isinstance(q, Fraction):
        return q
    if isinstance(q, bool):
        raise TypeError("bool is not a rational value")
    if isinstance(q, int):
        return Fraction(q)
    if isinstance(q, NAdic):
        return q.value
    if isinstance(q, str):
        return parse_rational(q)
    raise TypeError(f"not a rational value: {q!r}")


def parse_rational(text: str) -> Fraction:
    """Parse 'a' or 'a/b' with optional sign; reject anything else."""
    if not isinstance(text, str):
        raise ParseError(f"not a rational literal: {text!r}")
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational literal: {text!r}") from exc
    return value


def format_rational(q) -> str:
    """Render a Fraction as 'a/b', or 'a' when the denominator is one."""
    q = as_fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def is_smooth(d: int, n: int) -> bool:
    """True when every prime factor of d divides n (so d divides a power of n)."""
    if d == 0:
        return False
    d = abs(d)
    while d != 1:
        g = gcd(d, n)
        if g == 1:
            return False
        while d % g == 0:
            d //= g
    return True


def power_exponent(q, n: int) -> int | None:
    """Return k with q == n**k, or None when q is not an integral power of n."""
    q = as_fraction(q)
    if q <= 0:
        return None
    if q.numerator == 1 and q.denominator == 1:
        return 0
    if q.denominator == 1:
        m, k = q.numerator, 0
        while m % n == 0:
            m //= n
            k += 1
        return k if m == 1 else None
    if q.numerator == 1:
        k = power_exponent(Fraction(q.denominator), n)
        return -k if k is not None else None
    return None


def trailing_zeros(i: int, n: int) -> int:
    """Number of trailing base-n zero digits of a nonzero integer."""
    if i == 0:
        raise ValueError("trailing_zeros is undefined at zero")
    i = abs(i)
    count = 0
    while i % n == 0:
        i //= n
        count += 1
    return count


@dataclass(frozen=True)
class NAdic:
    """Canonical form a / n**e of an element of Z[1/n].

    Canonical means e == 0, or n does not divide a.  The mantissa may be any
    integer (zero is stored as 0 / n**0).
    """

    base: int
    mantissa: int
    exponent: int

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be at least 2")
        if self.exponent < 0:
            raise ValueError("exponent must be nonnegative")
        if self.mantissa == 0:
            if self.exponent != 0:
                raise ValueError("zero must be stored with exponent 0")
        elif self.exponent > 0 and self.mantissa % self.base == 0:
            raise ValueError("mantissa must not be divisible by the base")

    @property
    def value(self) -> Fraction:
        return Fraction(self.mantissa, self.base**self.exponent)

    def __str__(self) -> str:
        return format_rational(self.value)


def to_nadic(q, n: int) -> NAdic | None:
    """Canonical base-n form of q, or None when q is outside Z[1/n]."""
    q = as_fraction(q)
    if not is_smooth(q.denominator, n) and q.denominator != 1:
        return None
    if q == 0:
        return NAdic(n, 0, 0)
    # Find the least e with q * n**e integral, then strip surplus factors.
    e = 0
    scaled = q
    while scaled.denominator != 1:
        scaled *= n
        e += 1
    a = scaled.numerator
    while e > 0 and a % n == 0:
        a //= n
        e -= 1
    return NAdic(n, a, e)


def is_nadic(q, n: int) -> bool:
    return to_nadic(q, n) is not None


def digit_class(q, n: int) -> int:
    """Digit-sum residue of q modulo n-1 (the casting-out-nines value).

    Defined on Z[1/n] only; this is the unique ring homomorphism onto the
    integers mod n-1 sending n to 1, so a / n**e maps to a mod (n-1).
    For n == 2 the value is always 0.
    """
    nad = q if isinstance(q, NAdic) and q.base == n else to_nadic(q, n)
    if nad is None:
        raise ValueError(f"digit_class needs a base-{n} fraction, got {q}")
    if n == 2:
        return 0
    return nad.mantissa % (n - 1)


@dataclass(frozen=True)
class PointClass:
    """Where a rational sits relative to the base-n lattice."""

    base: int
    is_integer: bool
    is_nadic: bool
    nadic: NAdic | None
    digit_class: int | None

    @property
    def in_zero_class(self) -> bool | None:
        if self.digit_class is None:
            return None
        return self.digit_class == 0


def classify_point(q, n: int) -> PointClass:
    """Report lattice membership and digit class of a rational point."""
    q = as_fraction(q)
    nad = to_nadic(q, n)
    cls = None if nad is None else (0 if n == 2 else nad.mantissa % (n - 1))
    return PointClass(
        base=n,
        is_integer=q.denominator == 1,
        is_nadic=nad is not None,
        nadic=nad,
        digit_class=cls,
    )


@dataclass(frozen=True)
class CirclePoint:
    """A point of the circle of integer circumference r, reduced to [0, r)."""

    value: Fraction
    circumference: int

    def __post_init__(self):
        if self.circumference < 1:
            raise ValueError("circumference must be a positive integer")
        if not (0 <= self.value < self.circumference):
            raise ValueError("circle point must be reduced to [0, r)")


def reduce_to_circle(q, r: int) -> Fraction:
    """Reduce a rational modulo the integer circumference r into [0, r)."""
    q = as_fraction(q)
    return q - (q // r) * r


def keep_last_digits(q, k: int, n: int) -> NAdic:
    """Drop all but the last k base-n digits of a circle point.

    The point lives on the circle of circumference n-1 and must have
    exponent at least k; the result is the point's image under e-k
    applications of the multiply-by-n circle map, where e is its exponent.
    For a / n**e this is (a mod (n-1)·n**k) / n**k, re-canonicalised.
    """
    if k < 0:
        raise ValueError("digit count must be nonnegative")
    nad = q if isinstance(q, NAdic) and q.base == n else to_nadic(q, n)
    if nad is None:
        raise ValueError(f"keep_last_digits needs a base-{n} fraction, got {q}")
    r = n - 1
    if not (0 <= nad.value < r):
        raise ValueError(f"point must lie on the circle [0, {r})")
    if nad.exponent < k:
        raise ValueError(
            f"point has exponent {nad.exponent}, below the requested {k} digits"
        )
    reduced = nad.mantissa % (r * n**k)
    shifted = Fraction(reduced, n**k)
    result = to_nadic(shifted, n)
    assert result is not None
    return result
