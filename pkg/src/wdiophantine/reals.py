"""Computable reals: exact objects that emit nested dyadic brackets on demand.

Every value ``x`` answers ``interval(k)`` with ``[floor(x 2^k)/2^k, floor(x 2^k)/2^k + 2^-k]``.
Because the left end is a floor on a dyadic grid, brackets for increasing ``k``
are nested and the answer depends on ``k`` alone.

Values that happen to be dyadic rationals (``sqrt(2)*sqrt(2)``, ``0*golden``)
cannot be floored by refinement; they raise :class:`PrecisionLimited` once the
refinement cap is exhausted.  Pass exact rationals as :class:`fractions.Fraction`
instead.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from math import factorial, floor, isqrt
from typing import Callable

from .errors import DomainError, PrecisionLimited

MAX_EXTRA_BITS = 4096


def _floor_frac(r: Fraction) -> int:
    return r.numerator // r.denominator


class ComputableReal:
    """Base class. Subclasses implement ``_bounds(prec)``.

    ``_bounds(prec)`` must return Fractions ``lo <= x <= hi`` whose width tends
    to zero as ``prec`` grows (roughly ``2**-prec``).
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._floors: dict[int, int] = {}

    def _bounds(self, prec: int) -> tuple[Fraction, Fraction]:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def floor_scaled(self, k: int) -> int:
        """Exact ``floor(x * 2**k)``."""
        with self._lock:
            hit = self._floors.get(k)
        if hit is not None:
            return hit
        scale = Fraction(2) ** k if k >= 0 else Fraction(1, 2 ** (-k))
        extra = 8
        while extra <= MAX_EXTRA_BITS:
            lo, hi = self._bounds(k + extra)
            f_lo = _floor_frac(lo * scale)
            f_hi = _floor_frac(hi * scale)
            if f_lo == f_hi:
                with self._lock:
                    self._floors[k] = f_lo
                return f_lo
            extra *= 2
        raise PrecisionLimited(
            f"cannot floor {self.describe()} at 2^-{k}; value may be dyadic rational"
        )

    def interval(self, k: int) -> tuple[Fraction, Fraction]:
        """Nested bracket of width exactly ``2**-k``."""
        n = self.floor_scaled(k)
        return Fraction(n, 2**k), Fraction(n + 1, 2**k)

    def __float__(self) -> float:
        lo, _ = self.interval(64)
        return float(lo)

    def __repr__(self) -> str:
        return f"ComputableReal({self.describe()})"

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        return _Sum(self, _lift(other))

    __radd__ = __add__

    def __neg__(self):
        return _Scale(self, Fraction(-1))

    def __sub__(self, other):
        return _Sum(self, _Scale(_lift(other), Fraction(-1)))

    def __rsub__(self, other):
        return _Sum(_lift(other), _Scale(self, Fraction(-1)))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return _Scale(self, Fraction(other))
        return _Prod(self, _lift(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division of a computable real by zero")
            return _Scale(self, 1 / Fraction(other))
        return NotImplemented


def _lift(v) -> ComputableReal:
    if isinstance(v, ComputableReal):
        return v
    if isinstance(v, (int, Fraction)):
        return _Const(Fraction(v))
    raise TypeError(f"cannot combine computable real with {type(v).__name__}")


def _frac_str(r: Fraction) -> str:
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


class _Const(ComputableReal):
    def __init__(self, value: Fraction):
        super().__init__()
        self.value = value

    def _bounds(self, prec):
        return self.value, self.value

    def describe(self):
        s = _frac_str(self.value)
        return f"({s})" if self.value < 0 or "/" in s else s


class _Sum(ComputableReal):
    def __init__(self, a: ComputableReal, b: ComputableReal):
        super().__init__()
        self.a, self.b = a, b

    def _bounds(self, prec):
        a_lo, a_hi = self.a._bounds(prec + 1)
        b_lo, b_hi = self.b._bounds(prec + 1)
        return a_lo + b_lo, a_hi + b_hi

    def describe(self):
        if isinstance(self.b, _Scale) and self.b.factor == -1:
            return f"({self.a.describe()}-{self.b.a.describe()})"
        return f"({self.a.describe()}+{self.b.describe()})"


class _Scale(ComputableReal):
    def __init__(self, a: ComputableReal, factor: Fraction):
        super().__init__()
        self.a, self.factor = a, factor

    def _bounds(self, prec):
        extra = max(abs(self.factor.numerator).bit_length() - self.factor.denominator.bit_length(), 0)
        lo, hi = self.a._bounds(prec + extra + 1)
        lo, hi = lo * self.factor, hi * self.factor
        return (lo, hi) if lo <= hi else (hi, lo)

    def describe(self):
        if self.factor == -1:
            return f"(-{self.a.describe()})"
        if self.factor.numerator == 1:
            return f"({self.a.describe()}/{self.factor.denominator})"
        return f"({_frac_str(self.factor)}*{self.a.describe()})"


class _Prod(ComputableReal):
    def __init__(self, a: ComputableReal, b: ComputableReal):
        super().__init__()
        self.a, self.b = a, b

    def _bounds(self, prec):
        a0, a1 = self.a._bounds(4)
        b0, b1 = self.b._bounds(4)
        mag = max(abs(a0), abs(a1), abs(b0), abs(b1), Fraction(1))
        extra = _floor_frac(mag).bit_length() + 2
        a_lo, a_hi = self.a._bounds(prec + extra)
        b_lo, b_hi = self.b._bounds(prec + extra)
        cands = (a_lo * b_lo, a_lo * b_hi, a_hi * b_lo, a_hi * b_hi)
        return min(cands), max(cands)

    def describe(self):
        return f"({self.a.describe()}*{self.b.describe()})"


class Sqrt(ComputableReal):
    """Square root of a non-negative rational."""

    def __init__(self, radicand):
        super().__init__()
        self.radicand = Fraction(radicand)
        if self.radicand < 0:
            raise DomainError("square root of a negative rational")

    def _bounds(self, prec):
        s = isqrt(_floor_frac(self.radicand * 4**prec))
        return Fraction(s, 2**prec), Fraction(s + 1, 2**prec)

    def describe(self):
        return f"sqrt({_frac_str(self.radicand)})"


class Liouville(ComputableReal):
    """``sum_{n>=1} base**-(n!)``."""

    def __init__(self, base: int = 10):
        super().__init__()
        if base < 2:
            raise DomainError("Liouville base must be at least 2")
        self.base = int(base)

    def _bounds(self, prec):
        n = 1
        # tail after n terms is below 2 * base^-((n+1)!)
        while (factorial(n + 1) * (self.base.bit_length() - 1)) < prec + 1:
            n += 1
        s = sum(Fraction(1, self.base ** factorial(j)) for j in range(1, n + 1))
        return s, s + Fraction(2, self.base ** factorial(n + 1))

    def describe(self):
        return f"liouville({self.base})"


class ContinuedFraction(ComputableReal):
    """``[a0; a1, a2, ...]`` with ``a_n = rule(n, q_{n-1})`` for ``n >= 1``.

    ``rule`` receives the index and the previous convergent denominator so that
    growth rules like ``a_{n+1} = q_n`` can be written directly.
    """

    def __init__(self, rule: Callable[[int, int], int], name: str = "custom", a0: int = 0):
        super().__init__()
        self.rule = rule
        self.name = name
        self.quotients = [int(a0)]
        # convergents p_n/q_n, n = 0, 1, ...
        self._p = [int(a0)]
        self._q = [1]
        self._p_prev, self._q_prev = 1, 0

    def _extend(self):
        n = len(self.quotients)
        a = int(self.rule(n, self._q[-1]))
        if a <= 0:
            raise DomainError(f"partial quotient a_{n}={a} is not a positive integer")
        self.quotients.append(a)
        p_m2 = self._p[-2] if len(self._p) > 1 else 1
        q_m2 = self._q[-2] if len(self._q) > 1 else 0
        self._p.append(a * self._p[-1] + p_m2)
        self._q.append(a * self._q[-1] + q_m2)

    def convergents(self, count: int) -> list[tuple[int, int]]:
        with self._lock:
            while len(self._q) < count:
                self._extend()
            return list(zip(self._p[:count], self._q[:count]))

    def _bounds(self, prec):
        with self._lock:
            while len(self._q) < 2 or (self._q[-1] * self._q[-2]).bit_length() <= prec:
                self._extend()
            a = Fraction(self._p[-1], self._q[-1])
            b = Fraction(self._p[-2], self._q[-2])
        return (a, b) if a <= b else (b, a)

    def describe(self):
        return f"cf({self.name})"


# named partial-quotient rules ------------------------------------------------

def _ones(n, q):
    return 1


def _index(n, q):
    return n


def _square_growth(n, q):
    # a_{n+1} = q_n gives q_{n+1} ~ q_n^2
    return max(q, 1)


CF_RULES: dict[str, Callable[[int, int], int]] = {
    "ones": _ones,
    "index": _index,
    "square": _square_growth,
}


def continued_fraction(rule: str | Callable[[int, int], int], a0: int = 0) -> ContinuedFraction:
    if isinstance(rule, str):
        try:
            fn = CF_RULES[rule]
        except KeyError:
            raise DomainError(f"unknown continued-fraction rule {rule!r}; known: {sorted(CF_RULES)}") from None
        return ContinuedFraction(fn, name=rule, a0=a0)
    return ContinuedFraction(rule, name=getattr(rule, "__name__", "custom"), a0=a0)


def golden() -> ComputableReal:
    """(sqrt(5) - 1)/2, the fractional part of the golden ratio."""
    return (Sqrt(5) - 1) / 2


def quadratic_tail(index: int) -> ComputableReal:
    """Fractional part of sqrt of the index-th non-square integer >= 2 (sqrt(2)-1, sqrt(3)-1, sqrt(5)-2, ...)."""
    n, seen = 1, -1
    while seen < index:
        n += 1
        if isqrt(n) ** 2 != n:
            seen += 1
    return Sqrt(n) - isqrt(n)


def as_exact_or_real(v):
    """Normalise a coordinate: ints/Fractions/decimal strings become Fraction."""
    if isinstance(v, ComputableReal):
        return v
    if isinstance(v, float):
        if v != v or v in (float("inf"), float("-inf")):
            raise DomainError("non-finite coordinate")
        return Fraction(v)
    return Fraction(v)


def floor_of(v) -> int:
    if isinstance(v, Fraction):
        return floor(v)
    return v.floor_scaled(0)
