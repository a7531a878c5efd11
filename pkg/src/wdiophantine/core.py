"""Weights, target vectors and weighted quasi-norms with exact threshold tests.

Weights are exact rationals ``w_i = n_i / m`` with a common denominator ``m``.
A quasi-norm contribution ``|v|**(1/w_i) = |v|**(m/n_i)`` is never evaluated as a
real number when a decision is needed; both sides of a comparison are raised to
integer powers instead, e.g. ``|v|**(m/n_i) <= r``  iff  ``|v|**m <= r**n_i``.

Coordinates are either :class:`fractions.Fraction` or
:class:`~wdiophantine.reals.ComputableReal`; the latter are held as dyadic
brackets of width ``2**-P``.  A comparison whose outcome depends on the
unresolved part of a bracket raises :class:`PrecisionLimited`.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Iterable, Iterator

import mpmath

from .errors import DimensionMismatch, DomainError, PrecisionLimited
from .reals import ComputableReal, as_exact_or_real

DEFAULT_PRECISION = int(os.environ.get("WDA_PRECISION", "256"))
DEFAULT_MESH = Fraction(1, 32)

INF = math.inf


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


# --------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class Weight:
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        ents = tuple(Fraction(e) for e in self.entries)
        object.__setattr__(self, "entries", ents)
        if not ents:
            raise DomainError("a weight needs at least one entry")
        if any(e < 0 or e > 1 for e in ents):
            raise DomainError(f"weight entries must lie in [0, 1]: {self}")
        if sum(ents) != 1:
            raise DomainError(f"weight entries must sum to 1, got {sum(ents)}")

    @classmethod
    def of(cls, *entries) -> "Weight":
        if len(entries) == 1 and not isinstance(entries[0], (int, Fraction, str)):
            entries = tuple(entries[0])
        return cls(tuple(Fraction(e) for e in entries))

    @classmethod
    def standard(cls, d: int) -> "Weight":
        return cls(tuple(Fraction(1, d) for _ in range(d)))

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def denominator(self) -> int:
        """Common denominator m."""
        return reduce(_lcm, (e.denominator for e in self.entries), 1)

    @property
    def numerators(self) -> tuple[int, ...]:
        m = self.denominator
        return tuple(int(e * m) for e in self.entries)

    @property
    def is_proper(self) -> bool:
        return all(0 < e < 1 for e in self.entries)

    @property
    def w_min(self) -> Fraction:
        return min(self.entries)

    @property
    def w_max(self) -> Fraction:
        return max(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __str__(self):
        return ",".join(_frac_str(e) for e in self.entries)


def _frac_str(r: Fraction) -> str:
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


@dataclass(frozen=True)
class WeightSet:
    """Finite sample of a set of weights (closure-invariance justifies sampling)."""

    weights: tuple[Weight, ...]

    def __post_init__(self):
        ws = tuple(self.weights)
        object.__setattr__(self, "weights", ws)
        if not ws:
            raise DomainError("weight set must be nonempty")
        d = ws[0].d
        if any(w.d != d for w in ws):
            raise DimensionMismatch("all weights in a set must have equal dimension")

    @classmethod
    def of(cls, *weights) -> "WeightSet":
        return cls(tuple(w if isinstance(w, Weight) else Weight.of(*w) for w in weights))

    @classmethod
    def grid(cls, d: int, mesh=DEFAULT_MESH, where=None) -> "WeightSet":
        """All proper weights whose entries are positive multiples of ``mesh``.

        ``where`` optionally filters the grid (e.g. ``lambda w: w[0] >= 0.95``).
        """
        mesh = Fraction(mesh)
        steps = 1 / mesh
        if steps.denominator != 1:
            raise DomainError("mesh must be 1/N")
        n = int(steps)
        out = []
        for head in product(range(1, n), repeat=d - 1):
            last = n - sum(head)
            if last < 1:
                continue
            w = Weight(tuple(Fraction(k, n) for k in (*head, last)))
            if w.is_proper and (where is None or where(w)):
                out.append(w)
        if not out:
            raise DomainError(f"no proper weights of dimension {d} at mesh {mesh}")
        return cls(tuple(out))

    @property
    def d(self) -> int:
        return self.weights[0].d

    @property
    def w_min(self) -> Fraction:
        return min(w.w_min for w in self.weights)

    @property
    def w_max(self) -> Fraction:
        return max(w.w_max for w in self.weights)

    def __iter__(self) -> Iterator[Weight]:
        return iter(self.weights)

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, i):
        return self.weights[i]


def weight_restriction(w: Weight, i: int) -> Weight:
    """Drop the first ``i`` entries of ``w``; they must all be zero."""
    if not 1 <= i <= w.d - 1:
        raise DomainError(f"restriction index {i} outside 1..{w.d - 1}")
    if any(e != 0 for e in w.entries[:i]):
        raise DomainError(f"cannot restrict {w}: a dropped entry is nonzero")
    return Weight(w.entries[i:])


# --------------------------------------------------------------------------
# target vectors


class TargetVector:
    """A point of R^d held exactly (rationals) or as width-2^-P brackets."""

    def __init__(self, coords: Iterable, precision_bits: int = DEFAULT_PRECISION):
        self.coords = tuple(as_exact_or_real(c) for c in coords)
        if not self.coords:
            raise DomainError("target vector needs at least one coordinate")
        if precision_bits < 16:
            raise DomainError("precision must be at least 16 bits")
        self.precision_bits = int(precision_bits)
        lo, hi, den = [], [], []
        for c in self.coords:
            if isinstance(c, Fraction):
                lo.append(c.numerator)
                hi.append(c.numerator)
                den.append(c.denominator)
            else:
                n = c.floor_scaled(self.precision_bits)
                lo.append(n)
                hi.append(n + 1)
                den.append(1 << self.precision_bits)
        self._lo, self._hi, self._den = tuple(lo), tuple(hi), tuple(den)

    @property
    def d(self) -> int:
        return len(self.coords)

    @property
    def is_rational(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coords)

    def bracket(self, i: int) -> tuple[int, int, int]:
        """``(lo, hi, den)`` with ``lo/den <= x_i <= hi/den``."""
        return self._lo[i], self._hi[i], self._den[i]

    def fraction_midpoints(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(self._lo[i] + self._hi[i], 2 * self._den[i]) for i in range(self.d))

    def floats(self) -> tuple[float, ...]:
        return tuple(float(f) for f in self.fraction_midpoints())

    def mp_coords(self):
        with mpmath.workprec(self.precision_bits + 16):
            return [mpmath.mpf(f.numerator) / f.denominator for f in self.fraction_midpoints()]

    def residual(self, q: int, i: int) -> tuple[int, int, int, int]:
        """Nearest integer ``p`` to ``q x_i`` (ties toward -inf) and the bracket of ``q x_i - p``."""
        lo, hi, den = self._lo[i], self._hi[i], self._den[i]
        # p = ceil(q*lo/den - 1/2)
        p = -((den - 2 * q * lo) // (2 * den))
        return p, q * lo - p * den, q * hi - p * den, den

    def with_precision(self, precision_bits: int) -> "TargetVector":
        return TargetVector(self.coords, precision_bits)

    def describe(self) -> list[str]:
        return [_frac_str(c) if isinstance(c, Fraction) else c.describe() for c in self.coords]

    def __repr__(self):
        return f"TargetVector([{', '.join(self.describe())}], P={self.precision_bits})"


def as_target(x, precision_bits: int | None = None) -> TargetVector:
    if isinstance(x, TargetVector):
        if precision_bits is not None and precision_bits != x.precision_bits:
            return x.with_precision(precision_bits)
        return x
    if isinstance(x, (ComputableReal, Fraction, int)):
        x = (x,)
    return TargetVector(x, precision_bits or DEFAULT_PRECISION)


# --------------------------------------------------------------------------
# quasi-norm values

# A term is either ("c", value) with value in {0, 1, inf}, or
# ("p", lo, hi, den, n) meaning |v|**(m/n) with |v| in [lo/den, hi/den], lo >= 0.


def _abs_bracket(lo: int, hi: int) -> tuple[int, int]:
    if lo >= 0:
        return lo, hi
    if hi <= 0:
        return -hi, -lo
    return 0, max(-lo, hi)


def _cmp_pow(a, na: int, b, nb: int):
    """Compare ``A**na`` with ``B**nb`` for non-negative brackets A, B."""
    a_lo, a_hi, a_den = a
    b_lo, b_hi, b_den = b
    g = math.gcd(na, nb)
    na //= g
    nb //= g
    da, db = a_den**na, b_den**nb
    if a_hi**na * db < b_lo**nb * da:
        return -1
    if a_lo**na * db > b_hi**nb * da:
        return 1
    if a_lo == a_hi and b_lo == b_hi:
        return 0
    return None


def _cmp_terms(s, t):
    """-1/0/1 for s <(=,>) t, None when undecided."""
    if s[0] == "c" and t[0] == "c":
        return (s[1] > t[1]) - (s[1] < t[1])
    if s[0] == "c":
        r = _cmp_terms(t, s)
        return None if r is None else -r
    # s is a power term |v|**(m/n)
    _, lo, hi, den, n = s
    if t[0] == "c":
        if t[1] == INF:
            return -1
        if t[1] == 0:
            if lo > 0:
                return 1
            return 0 if hi == 0 else None
        # against 1: |v| vs 1
        return _cmp_pow((lo, hi, den), 1, (1, 1, 1), 1)
    _, lo2, hi2, den2, n2 = t
    # |v|**(m/n) vs |u|**(m/n2)  <=>  |v|**n2 vs |u|**n
    return _cmp_pow((lo, hi, den), n2, (lo2, hi2, den2), n)


def _kleene_all(vals):
    out = True
    for v in vals:
        if v is False:
            return False
        if v is None:
            out = None
    return out


def _kleene_any(vals):
    out = False
    for v in vals:
        if v is True:
            return True
        if v is None:
            out = None
    return out


def _decided(v, what: str) -> bool:
    if v is None:
        raise PrecisionLimited(f"cannot decide {what} at the working precision")
    return v


@dataclass
class QuasiNormValue:
    """The value ``max_i |v_i|**(1/w_i)`` kept in exactly comparable form."""

    weight: Weight
    terms: tuple
    precision_bits: int
    approx: mpmath.mpf = field(repr=False, default=None)

    def __post_init__(self):
        if self.approx is None:
            self.approx = self._approx()

    def _approx(self):
        m = self.weight.denominator
        with mpmath.workprec(self.precision_bits):
            best = mpmath.mpf(0)
            for t in self.terms:
                if t[0] == "c":
                    v = mpmath.inf if t[1] == INF else mpmath.mpf(t[1])
                else:
                    _, lo, hi, den, n = t
                    base = mpmath.mpf(lo + hi) / (2 * den)
                    v = base ** (mpmath.mpf(m) / n) if base > 0 else mpmath.mpf(0)
                best = max(best, v)
            return best

    # threshold tests ---------------------------------------------------
    def _vs_root(self, num: int, den: int, s: int, strict: bool):
        """Three-valued test of ``value (<|<=) (num/den)**(1/s)``."""
        m = self.weight.denominator
        res = []
        for t in self.terms:
            if t[0] == "c":
                c = t[1]
                if c == 0:
                    res.append(num > 0 if strict else True)
                elif c == INF:
                    res.append(False)
                else:
                    res.append(num > den if strict else num >= den)
                continue
            _, lo, hi, vden, n = t
            # |v|**(m/n) vs (num/den)**(1/s)  <=>  |v|**(m s) vs (num/den)**n
            r = _cmp_pow((lo, hi, vden), m * s, (num, num, den), n)
            if r is None:
                res.append(None)
            else:
                res.append(r < 0 if strict else r <= 0)
        return _kleene_all(res)

    def leq(self, r, strict: bool = False) -> bool:
        """Exact ``value <= r`` (or ``<`` when ``strict``) for rational ``r >= 0``."""
        r = Fraction(r)
        if r < 0:
            return False
        v = self._vs_root(r.numerator, r.denominator, 1, strict)
        return _decided(v, f"quasi-norm {'<' if strict else '<='} {r}")

    def lt(self, r) -> bool:
        return self.leq(r, strict=True)

    def leq_power(self, base, exponent, strict: bool = False) -> bool:
        """Exact ``value <= base**exponent`` for rational base > 0 and rational exponent."""
        base = Fraction(base)
        e = Fraction(exponent)
        if base <= 0:
            raise DomainError("threshold base must be positive")
        # base**(a/b) = (base**a)**(1/b)
        a, b = e.numerator, e.denominator
        R = base**a
        v = self._vs_root(R.numerator, R.denominator, b, strict)
        return _decided(v, f"quasi-norm vs {base}^{e}")

    def is_zero(self) -> bool:
        return all((t[0] == "c" and t[1] == 0) or (t[0] == "p" and t[2] == 0) for t in self.terms)

    # norm vs norm ------------------------------------------------------
    def _lt3(self, other, strict=True):
        return _kleene_any(
            _kleene_all(
                (lambda r: None if r is None else (r < 0 if strict else r <= 0))(_cmp_terms(s, t))
                for s in self.terms
            )
            for t in other.terms
        )

    def compare(self, other: "QuasiNormValue") -> int:
        if self.weight != other.weight:
            raise DomainError("cannot compare quasi-norms of different weights")
        if self._lt3(other) is True:
            return -1
        if other._lt3(self) is True:
            return 1
        if self._lt3(other, strict=False) is True and other._lt3(self, strict=False) is True:
            return 0
        raise PrecisionLimited("cannot order two quasi-norm values at the working precision")

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def log(self):
        with mpmath.workprec(self.precision_bits):
            return mpmath.log(self.approx) if self.approx > 0 else -mpmath.inf

    def __float__(self):
        return float(self.approx)


def _terms_for(brackets, w: Weight):
    """Build comparison terms from signed brackets ``(lo, hi, den)`` per coordinate."""
    m = w.denominator
    terms = []
    for (lo, hi, den), wi in zip(brackets, w.entries):
        a_lo, a_hi = _abs_bracket(lo, hi)
        if wi == 0:
            c = _cmp_pow((a_lo, a_hi, den), 1, (1, 1, 1), 1)
            if c is None:
                raise PrecisionLimited("cannot compare a zero-weight coordinate with 1")
            terms.append(("c", 0 if c < 0 else (1 if c == 0 else INF)))
        else:
            terms.append(("p", a_lo, a_hi, den, int(wi * m)))
    return tuple(terms)


def norm_of_brackets(brackets, w: Weight, precision_bits: int) -> QuasiNormValue:
    return QuasiNormValue(w, _terms_for(brackets, w), precision_bits)


def _check_dims(x: TargetVector, w: Weight):
    if x.d != w.d:
        raise DimensionMismatch(f"vector has dimension {x.d}, weight has dimension {w.d}")


def quasi_norm(x, w: Weight) -> QuasiNormValue:
    """``max_{w_i != 0} |x_i|**(1/w_i)``; zero-weight coordinates follow the limit convention."""
    x = as_target(x)
    _check_dims(x, w)
    return norm_of_brackets([x.bracket(i) for i in range(x.d)], w, x.precision_bits)


def quasi_norm_leq(x, w: Weight, r) -> bool:
    return quasi_norm(x, w).leq(r)


__all__ = [
    "DEFAULT_PRECISION",
    "QuasiNormValue",
    "TargetVector",
    "Weight",
    "WeightSet",
    "as_target",
    "norm_of_brackets",
    "quasi_norm",
    "quasi_norm_leq",
    "weight_restriction",
]
