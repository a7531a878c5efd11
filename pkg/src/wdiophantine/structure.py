"""Integer structure behind simultaneous approximation.

Linear Diophantine solution families, the gcd decomposition of consecutive
best approximants, constructive families of points with known exponents, and an
empirical probe comparing exponents on a subspace and on a curve inside it.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .approx import best_sequence, epsilon_singular_certificate, sigma_hat_W_estimate
from .core import TargetVector, Weight, WeightSet, as_target
from .errors import (
    ContainmentViolation,
    DimensionMismatch,
    DomainError,
    InsufficientData,
    IntegralityViolation,
    TerminatedRational,
)
from .reals import CF_RULES, ContinuedFraction, continued_fraction, quadratic_tail

STABLE_RUN = 3


# --------------------------------------------------------------------------
# aX - bY = c


@dataclass(frozen=True)
class SolutionFamily:
    """All integer solutions ``(x0 + n*sx, y0 + n*sy)`` of ``aX - bY = c``."""

    a: int
    b: int
    c: int
    base: tuple[int, int]
    steps: tuple[int, int]
    g: int

    def at(self, n: int) -> tuple[int, int]:
        return self.base[0] + n * self.steps[0], self.base[1] + n * self.steps[1]

    def contains(self, X: int, Y: int) -> bool:
        if self.a * X - self.b * Y != self.c:
            return False
        sx, sy = self.steps
        dx, dy = X - self.base[0], Y - self.base[1]
        if sx:
            return dx % sx == 0 and dx // sx * sy == dy
        return dx == 0 and dy % sy == 0

    def as_dict(self):
        return {"a": self.a, "b": self.b, "c": self.c, "base": list(self.base), "steps": list(self.steps), "g": self.g}


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """``(g, s, t)`` with ``a s + b t = g >= 0``."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        k, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - k * s1
        t0, t1 = t1, t0 - k * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def solve_linear_diophantine(a: int, b: int, c: int) -> SolutionFamily | None:
    """Canonical solution family of ``aX - bY = c``, or None when ``gcd(a, b)`` does not divide ``c``."""
    a, b, c = int(a), int(b), int(c)
    if a == 0 and b == 0:
        raise DomainError("(a, b) must not be (0, 0)")
    g, s, t = _egcd(a, b)
    if c % g:
        return None
    k = c // g
    x0, y0 = s * k, -t * k
    sx, sy = b // g, a // g
    if sx:
        n = -(x0 // abs(sx)) * (1 if sx > 0 else -1)
        x0, y0 = x0 + n * sx, y0 + n * sy
    return SolutionFamily(a, b, c, (x0, y0), (sx, sy), g)


# --------------------------------------------------------------------------
# consecutive best approximants


@dataclass
class PairRow:
    n: int
    q: int
    q_next: int
    p: tuple[int, ...]
    p_next: tuple[int, ...]
    r: int
    xy: tuple[int, int]
    c: tuple[int, ...]
    ell: tuple[int, ...]
    k: tuple[int, ...]
    err: float
    bound_ok: bool
    ratio: tuple[Fraction, Fraction] | None
    label: str = "undecided"
    jump_checks: dict = field(default_factory=dict)
    gcd_side_condition: bool | None = None

    def reconstructs(self) -> bool:
        x_n, y_n = self.xy
        if x_n * self.q_next - y_n * self.q != self.r:
            return False
        for i in range(len(self.p)):
            if self.ell[i] * self.r != self.c[i]:
                return False
            if self.p[i] * self.r != self.ell[i] * x_n * self.r + self.k[i] * self.q:
                return False
            if self.p_next[i] * self.r != self.ell[i] * y_n * self.r + self.k[i] * self.q_next:
                return False
        return True

    def as_dict(self):
        return {
            "n": self.n,
            "q_n": self.q,
            "q_next": self.q_next,
            "p_n": list(self.p),
            "p_next": list(self.p_next),
            "r_n": self.r,
            "x_n": self.xy[0],
            "y_n": self.xy[1],
            "c": list(self.c),
            "ell": list(self.ell),
            "k": list(self.k),
            "err": self.err,
            "bound_ok": self.bound_ok,
            "ratio": None if self.ratio is None else [str(v) for v in self.ratio],
            "label": self.label,
            "jump_checks": self.jump_checks,
            "gcd_side_condition": self.gcd_side_condition,
        }


@dataclass
class PairDecomposition:
    x: TargetVector
    delta: Fraction
    Q_max: int
    rows: list[PairRow]
    classification: str
    coefficients: tuple[Fraction, Fraction] | None
    identity_holds: bool | None

    def all_bounds_hold(self) -> bool:
        return all(r.bound_ok for r in self.rows)

    def all_reconstruct(self) -> bool:
        return all(r.reconstructs() for r in self.rows)

    def columns(self):
        keys = ["n", "q_n", "q_next", "r_n", "x_n", "y_n", "c", "ell", "k", "err", "bound_ok", "label"]
        out = {k: [] for k in keys}
        for r in self.rows:
            d = r.as_dict()
            for k in keys:
                out[k].append(d[k])
        return out

    def as_dict(self):
        return {
            "x": self.x.describe(),
            "delta": str(self.delta),
            "Q_max": self.Q_max,
            "precision_bits": self.x.precision_bits,
            "classification": self.classification,
            "coefficients": None if self.coefficients is None else [str(v) for v in self.coefficients],
            "identity_holds": self.identity_holds,
            "rows": [r.as_dict() for r in self.rows],
        }


def _row(n, a, b, x: TargetVector, delta: Fraction) -> PairRow:
    q, qn = a.q, b.q
    r = math.gcd(q, qn)
    fam = solve_linear_diophantine(qn, q, r)
    x_n, y_n = fam.base
    c, ell, k = [], [], []
    for i in range(x.d):
        ci = a.p[i] * qn - b.p[i] * q
        if ci % r:
            raise IntegralityViolation(f"c_{n},{i}={ci} not divisible by r_n={r}")
        li = ci // r
        num = (a.p[i] - li * x_n) * r
        if num % q:
            raise IntegralityViolation(f"k_{n},{i} is not an integer (numerator {num}, q_n={q})")
        c.append(ci)
        ell.append(li)
        k.append(num // q)
    prec = x.precision_bits
    with mpmath.workprec(prec):
        xs = x.mp_coords()
        err = max(abs(q * xs[i] - a.p[i]) for i in range(x.d))
        bound = 2 * mpmath.mpf(qn) ** (1 - mpmath.mpf(delta.numerator) / delta.denominator)
        bound_ok = all(abs(ci) < bound for ci in c)
    ratio = None
    if x.d == 2 and ell[0] != 0:
        rho = Fraction(ell[1], ell[0])
        ratio = (rho, (k[1] - rho * k[0]) / r)
    return PairRow(n, q, qn, a.p, b.p, r, (x_n, y_n), tuple(c), tuple(ell), tuple(k), float(err), bound_ok, ratio)


def _jump_checks(row: PairRow, delta: Fraction) -> dict:
    d = float(delta)
    growth = (d - 0.5) / (1 - d)
    decay = (d * d - d / 2) / (1 - d)
    return {
        "gap_growth": row.q_next > row.q**growth,
        "error_decay": row.err < row.q ** (-decay),
    }


def consecutive_pair_analysis(x, delta, Q_max: int, *, stable_run: int = STABLE_RUN) -> PairDecomposition:
    """Decompose consecutive sup-norm best approximants with ``err_n < q_{n+1}^-delta``.

    For each selected pair the gcd ``r_n`` of the denominators, a solution of
    ``x_n q_{n+1} - y_n q_n = r_n`` and, per coordinate, the integers ``c``,
    ``ell = c / r_n`` and ``k`` are recorded.  In dimension 2 the pair
    ``(ell_2/ell_1, (k_2 - rho k_1)/r_n)`` is tracked: ``stable_run`` consecutive
    repeats label a stable run whose value ``(a, b)`` satisfies
    ``p_2 = a p_1 + b q`` along it.
    """
    x = as_target(x)
    delta = Fraction(delta) if not isinstance(delta, float) else Fraction(repr(delta))
    if not Fraction(3, 4) < delta < 1:
        raise DomainError("delta must lie in (3/4, 1)")
    # the standard-weight quasi-norm orders vectors exactly like the sup-norm
    seq = best_sequence(x, Weight.standard(x.d), Q_max)
    rows = []
    with mpmath.workprec(x.precision_bits):
        xs = x.mp_coords()
        for n, (a, b) in enumerate(zip(seq.entries, seq.entries[1:])):
            err = max(abs(a.q * xs[i] - a.p[i]) for i in range(x.d))
            if err < mpmath.mpf(b.q) ** (-mpmath.mpf(delta.numerator) / delta.denominator):
                rows.append(_row(n, a, b, x, delta))
    if not rows:
        raise InsufficientData(f"no consecutive pair with err_n < q_(n+1)^-{delta} below Q_max={Q_max}")

    # run-length labelling over consecutive indices
    run = 0
    for k, row in enumerate(rows):
        prev = rows[k - 1] if k else None
        if prev is not None and prev.n == row.n - 1 and row.ratio is not None and row.ratio == prev.ratio:
            run += 1
        else:
            run = 1 if row.ratio is not None else 0
        if run >= stable_run:
            for j in range(k - stable_run + 1, k + 1):
                rows[j].label = "stable"
        elif prev is not None and prev.ratio is not None and row.ratio != prev.ratio:
            row.label = "jump"
        if row.label == "jump":
            row.jump_checks = _jump_checks(row, delta)
            row.gcd_side_condition = math.gcd(row.p[0], row.q) ** 2 < row.q

    last = rows[-1]
    coeffs, holds = None, None
    if last.label == "stable":
        classification = "stable"
        coeffs = last.ratio
        with mpmath.workprec(x.precision_bits):
            xs = x.mp_coords()
            a, b = coeffs
            gap = abs(xs[1] - (mpmath.mpf(a.numerator) / a.denominator) * xs[0] - mpmath.mpf(b.numerator) / b.denominator)
            holds = bool(gap < mpmath.mpf(2) ** (-x.precision_bits + 4))
    elif last.label == "jump":
        classification = "jump"
    else:
        classification = "undecided"
    return PairDecomposition(x, delta, Q_max, rows, classification, coeffs, holds)


# --------------------------------------------------------------------------
# exponent relation


def exponent_relation_check(sigma2) -> Fraction:
    """``sigma1 = (sigma2^2 - sigma2/2)/(1 - sigma2)`` for ``sigma2`` in ``[3/4, 1)``.

    At 3/4 the relation has its fixed point; strictly inside the range ``sigma1 > sigma2``.
    """
    s = Fraction(repr(sigma2)) if isinstance(sigma2, float) else Fraction(sigma2)
    if not Fraction(3, 4) <= s < 1:
        raise DomainError("sigma2 must lie in [3/4, 1)")
    s1 = (s * s - s / 2) / (1 - s)
    if s > Fraction(3, 4):
        assert s1 > s
    return s1


# --------------------------------------------------------------------------
# constructions


@dataclass
class HyperplanePoint:
    x: TargetVector
    weight: Weight
    i: int
    predicted_epsilon: Fraction

    def verify(self, Q_max: int, tolerance=Fraction(1, 5)):
        """Certificate at ``predicted - tolerance``."""
        return epsilon_singular_certificate(self.x, WeightSet((self.weight,)), self.predicted_epsilon - Fraction(tolerance), Q_max)

    def as_dict(self):
        return {"x": self.x.describe(), "weight": str(self.weight), "i": self.i, "predicted_epsilon": str(self.predicted_epsilon)}


def hyperplane_point(w: Weight, i: int, rational_part, irrational_spec=None, precision_bits=None) -> HyperplanePoint:
    """Point with rational head ``Q^i`` and irrational tail, with its predicted exponent.

    The predicted exponent is ``1/(1 - (w_1 + ... + w_i))``.  Tails default to
    badly approximable quadratic irrationals so the prediction is sharp.
    """
    d = w.d
    if not 1 <= i <= d - 1:
        raise DomainError(f"need 1 <= i <= d-1, got i={i} for d={d}")
    head = [Fraction(v) for v in rational_part]
    if len(head) != i:
        raise DimensionMismatch(f"rational head has {len(head)} entries, expected {i}")
    s = sum(w.entries[:i], Fraction(0))
    if s == 1:
        raise DomainError("weight head sums to 1; predicted exponent is infinite")
    if irrational_spec is None:
        tail = [quadratic_tail(k) for k in range(d - i)]
    else:
        tail = list(irrational_spec)
        if len(tail) != d - i:
            raise DimensionMismatch(f"irrational tail has {len(tail)} entries, expected {d - i}")
    x = as_target(head + tail, precision_bits)
    return HyperplanePoint(x, w, i, 1 / (1 - s))


# known (sigma, sigma_hat) for the named rules
_CF_ORACLES = {"ones": (Fraction(1), Fraction(1)), "index": (Fraction(1), Fraction(1)), "square": (Fraction(2), Fraction(1))}


@dataclass
class CFVector:
    x: TargetVector
    real: ContinuedFraction
    sigma: Fraction | None
    sigma_hat: Fraction

    def growth_estimate(self, count: int = 12) -> float:
        """``max log q_{n+1} / log q_n`` over the last half of the first ``count`` convergents."""
        qs = [q for _, q in self.real.convergents(count) if q > 1]
        ratios = [math.log(b) / math.log(a) for a, b in zip(qs, qs[1:])]
        return max(ratios[len(ratios) // 2 :])


def continued_fraction_vector(rule, precision_bits=None) -> CFVector:
    """One-dimensional target from a partial-quotient rule, with its classical exponents."""
    if isinstance(rule, str) and rule not in CF_RULES:
        raise DomainError(f"unknown rule {rule!r}")
    real = continued_fraction(rule)
    sigma = _CF_ORACLES.get(rule)[0] if isinstance(rule, str) else None
    return CFVector(as_target([real], precision_bits), real, sigma, Fraction(1))


# --------------------------------------------------------------------------
# inheritance probe


@dataclass(frozen=True)
class AffineMap:
    """``s -> A s + b`` from parameters ``s`` to ``R^d``; ``A`` is a list of rows."""

    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]

    @classmethod
    def of(cls, A, b):
        return cls(tuple(tuple(Fraction(v) for v in row) for row in A), tuple(Fraction(v) for v in b))

    @property
    def d(self):
        return len(self.b)

    @property
    def params(self):
        return len(self.A[0]) if self.A else 0

    def __call__(self, s):
        return [_lin(row, s) + bi for row, bi in zip(self.A, self.b)]

    def describe(self):
        return {"A": [[str(v) for v in r] for r in self.A], "b": [str(v) for v in self.b]}


@dataclass(frozen=True)
class PolynomialMap:
    """Each coordinate is ``{exponent tuple: coefficient}`` in the parameters."""

    coords: tuple[tuple[tuple[tuple[int, ...], Fraction], ...], ...]
    params: int

    @classmethod
    def of(cls, coords, params: int):
        out = []
        for poly in coords:
            terms = tuple(sorted((tuple(e), Fraction(c)) for e, c in poly.items() if c != 0))
            for e, _ in terms:
                if len(e) != params:
                    raise DimensionMismatch("monomial exponent length differs from parameter count")
            out.append(terms)
        return cls(tuple(out), params)

    @property
    def d(self):
        return len(self.coords)

    def __call__(self, s):
        out = []
        for poly in self.coords:
            total = Fraction(0)
            for e, c in poly:
                term = c
                for si, ei in zip(s, e):
                    for _ in range(ei):
                        term = term * si
                total = total + term
            out.append(total)
        return out

    def describe(self):
        return [{"".join(map(str, e)): str(c) for e, c in poly} for poly in self.coords]


def _lin(row, s):
    total = Fraction(0)
    for a, si in zip(row, s):
        if a:
            total = total + (si if a == 1 else si * a)
    return total


def _in_column_space(A, v) -> bool:
    """Exact test ``v in col(A)`` by comparing ranks over Q."""
    return _rank([list(r) for r in A]) == _rank([list(r) + [vi] for r, vi in zip(A, v)])


def _rank(M) -> int:
    M = [list(map(Fraction, r)) for r in M]
    rank, cols = 0, len(M[0]) if M else 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(M)) if M[r][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for r in range(len(M)):
            if r != rank and M[r][c] != 0:
                f = M[r][c] / M[rank][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank


def curve_in_subspace(subspace: AffineMap, curve: PolynomialMap) -> bool:
    """Symbolic containment: every monomial coefficient vector of ``curve - b`` lies in ``col(A)``."""
    if subspace.d != curve.d:
        raise DimensionMismatch("subspace and curve live in different dimensions")
    monos = {}
    for i, poly in enumerate(curve.coords):
        for e, c in poly:
            monos.setdefault(e, [Fraction(0)] * curve.d)[i] += c
    const = tuple([0] * curve.params)
    vec = monos.setdefault(const, [Fraction(0)] * curve.d)
    for i in range(curve.d):
        vec[i] -= subspace.b[i]
    return all(_in_column_space(subspace.A, v) for v in monos.values())


def _random_cf(rng: random.Random, max_quotient: int) -> ContinuedFraction:
    seed = rng.getrandbits(64)
    quotients: list[int] = []
    local = random.Random(seed)

    def rule(n, _q):
        while len(quotients) < n:
            quotients.append(local.randint(1, max_quotient))
        return quotients[n - 1]

    return ContinuedFraction(rule, name=f"random[{seed:016x}]")


@dataclass
class InheritanceProbeReport:
    subspace: dict
    curve: dict
    weights: list[str]
    config: dict
    subspace_values: list[float]
    curve_values: list[float]

    @staticmethod
    def _stats(vals):
        finite = [v for v in vals if math.isfinite(v)]
        if not finite:
            return {"median": math.inf, "min": math.inf, "max": math.inf, "count": len(vals)}
        return {"median": statistics.median(vals), "min": min(finite), "max": max(finite), "count": len(vals)}

    @property
    def subspace_stats(self):
        return self._stats(self.subspace_values)

    @property
    def curve_stats(self):
        return self._stats(self.curve_values)

    @property
    def median_gap(self) -> float:
        return abs(self.subspace_stats["median"] - self.curve_stats["median"])

    def as_dict(self):
        return {
            "subspace": self.subspace,
            "curve": self.curve,
            "weights": self.weights,
            "config": self.config,
            "subspace_values": self.subspace_values,
            "curve_values": self.curve_values,
            "subspace_stats": self.subspace_stats,
            "curve_stats": self.curve_stats,
            "median_gap": self.median_gap,
        }


def inheritance_probe(
    subspace: AffineMap,
    curve: PolynomialMap,
    W,
    Q_max: int,
    sample_count: int,
    *,
    seed: int = 0,
    max_quotient: int = 5,
    window: float = 0.5,
) -> InheritanceProbeReport:
    """Sample W-uniform exponent estimates on a subspace and on a curve inside it.

    Parameters are random continued fractions in (0, 1) with bounded partial
    quotients, drawn from a seeded generator; both sample sets share the same
    estimator settings.
    """
    if isinstance(W, Weight):
        W = WeightSet((W,))
    if not curve_in_subspace(subspace, curve):
        raise ContainmentViolation("curve image is not contained in the affine subspace")
    rng = random.Random(seed)

    def estimate(point):
        try:
            return sigma_hat_W_estimate(point, W, Q_max, window=window).value
        except TerminatedRational:
            return math.inf

    sub_vals, cur_vals = [], []
    for _ in range(sample_count):
        s = [_random_cf(rng, max_quotient) for _ in range(subspace.params)]
        sub_vals.append(estimate(subspace(s)))
    for _ in range(sample_count):
        u = [_random_cf(rng, max_quotient) for _ in range(curve.params)]
        cur_vals.append(estimate(curve(u)))
    cfg = {"Q_max": Q_max, "sample_count": sample_count, "seed": seed, "max_quotient": max_quotient, "window": window}
    return InheritanceProbeReport(subspace.describe(), {"coords": curve.describe(), "params": curve.params}, [str(w) for w in W], cfg, sub_vals, cur_vals)
