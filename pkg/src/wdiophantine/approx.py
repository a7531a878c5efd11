"""Dirichlet searches, best-approximation sequences, exponent estimators and
singularity certificates.

All searches canonicalise ``q > 0`` (the error is invariant under
``(p, q) -> (-p, -q)``) and take ``p`` coordinate-wise as the nearest integer
to ``q x_i`` with ties broken downward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath

from .core import (
    QuasiNormValue,
    TargetVector,
    Weight,
    WeightSet,
    as_target,
    norm_of_brackets,
)
from .errors import (
    DimensionMismatch,
    InsufficientData,
    NoSolutionFound,
    PrecisionLimited,
    TerminatedRational,
)
from .scan import DistanceScanner, first_below, record_candidates

DEFAULT_WINDOW = 0.5
DEFAULT_MIN_GAPS = 4
GRID_START = 10
GRID_RATIO = 1.25
MIN_SEQUENCE = 8
EXACT_EPS_DENOMINATOR = 64


@dataclass(frozen=True)
class Approximant:
    q: int
    p: tuple[int, ...]
    err: QuasiNormValue = field(compare=False)
    weight_used: Weight

    def residual_brackets(self, x: TargetVector):
        out = []
        for i, pi in enumerate(self.p):
            lo, hi, den = x.bracket(i)
            out.append((self.q * lo - pi * den, self.q * hi - pi * den, den))
        return out

    def recheck(self, x: TargetVector, threshold_ok: Callable[[QuasiNormValue], bool]) -> bool:
        """Recompute the error of ``q x - p`` from scratch and test it."""
        value = norm_of_brackets(self.residual_brackets(x), self.weight_used, x.precision_bits)
        return threshold_ok(value)

    def as_dict(self):
        return {"q": self.q, "p": list(self.p), "err": mpmath.nstr(self.err.approx, 17)}


def _check(x: TargetVector, w: Weight):
    if x.d != w.d:
        raise DimensionMismatch(f"vector has dimension {x.d}, weight has dimension {w.d}")


def min_error(x, w: Weight, q: int) -> Approximant:
    """Nearest-integer approximant at denominator ``q``."""
    x = as_target(x)
    _check(x, w)
    if q < 1:
        raise ValueError("denominator must be positive")
    p, brackets = [], []
    for i in range(x.d):
        pi, lo, hi, den = x.residual(q, i)
        p.append(pi)
        brackets.append((lo, hi, den))
    return Approximant(q, tuple(p), norm_of_brackets(brackets, w, x.precision_bits), w)


def dirichlet_solve(x, w: Weight, Q: int) -> Approximant:
    """First ``q <= Q`` with ``||q x - p||_w < 1/Q`` (strict, as in the weighted Dirichlet theorem)."""
    x = as_target(x)
    _check(x, w)
    if Q < 1:
        raise ValueError("Q must be at least 1")
    undecided = []
    threshold = Fraction(1, Q)
    for q in first_below(DistanceScanner(x), w, Q, -math.log(Q)):
        a = min_error(x, w, q)
        try:
            if a.err.lt(threshold):
                return a
        except PrecisionLimited:
            undecided.append(q)
    if undecided:
        raise NoSolutionFound(f"undecided candidates {undecided[:5]} at P={x.precision_bits}; raise precision")
    raise NoSolutionFound(f"no q <= {Q} found although every comparison was decided")


@dataclass
class BestSequence:
    entries: list[Approximant]
    terminated: bool
    q_max: int
    weight: Weight
    unresolved_ties: list = field(default_factory=list)

    @property
    def qs(self) -> list[int]:
        return [a.q for a in self.entries]

    def record_at(self, Q: int) -> Approximant:
        """Best approximant with denominator at most ``Q``."""
        best = None
        for a in self.entries:
            if a.q > Q:
                break
            best = a
        if best is None:
            raise ValueError(f"no approximant with q <= {Q}")
        return best

    def intervals(self):
        """``(approximant, Q_lo, Q_hi)``: the ranges of Q on which each record is the minimum."""
        out = []
        for k, a in enumerate(self.entries):
            hi = self.entries[k + 1].q - 1 if k + 1 < len(self.entries) else self.q_max
            out.append((a, a.q, hi))
        return out


def best_sequence(x, w: Weight, Q_max: int) -> BestSequence:
    """Strict-improvement records ``q_1 = 1 < q_2 < ...`` of the minimal error, up to ``Q_max``."""
    x = as_target(x)
    _check(x, w)
    entries: list[Approximant] = []
    ties: list[tuple[int, int]] = []
    for block in record_candidates(DistanceScanner(x), w, Q_max):
        for q in block:
            a = min_error(x, w, int(q))
            if not entries or _improves(x, w, a, entries[-1], ties):
                entries.append(a)
                if a.err.is_zero():
                    return BestSequence(entries, True, Q_max, w, ties)
    return BestSequence(entries, False, Q_max, w, ties)


def _improves(x: TargetVector, w: Weight, a: Approximant, last: Approximant, ties: list) -> bool:
    try:
        return a.err.compare(last.err) < 0
    except PrecisionLimited:
        pass
    # Dependent coordinates produce exact ties between different q, which no
    # bracket refinement can settle.  Retry once at higher precision, then
    # treat the pair as a tie (no strict improvement) and record it.
    hx = x.with_precision(4 * x.precision_bits)
    e_new = norm_of_brackets(a.residual_brackets(hx), w, hx.precision_bits)
    e_old = norm_of_brackets(last.residual_brackets(hx), w, hx.precision_bits)
    try:
        return e_new.compare(e_old) < 0
    except PrecisionLimited:
        ties.append((a.q, last.q))
        return False


# --------------------------------------------------------------------------
# exponent estimates


@dataclass
class ExponentEstimate:
    kind: str
    value: float
    samples: list = field(default_factory=list)
    window_start: int = 0
    config: dict = field(default_factory=dict)
    status: str = "ok"

    @property
    def per_gap_exponents(self):
        return self.samples

    def as_dict(self):
        return {
            "kind": self.kind,
            "value": self.value,
            "status": self.status,
            "window_start": self.window_start,
            "config": self.config,
            "samples": [list(s) for s in self.samples],
        }


def _window_start(count: int, window: float, minimum: int) -> int:
    size = max(minimum, math.ceil(window * count))
    return max(0, count - size)


def _log_err(a: Approximant) -> float:
    return float(a.err.log())


def _sequence_for_exponents(x, w, Q_max, sequence, min_entries=MIN_SEQUENCE):
    seq = sequence if sequence is not None else best_sequence(x, w, Q_max)
    if seq.terminated:
        raise TerminatedRational(
            f"error reached 0 at q={seq.entries[-1].q}; exponent is infinite by convention",
            ExponentEstimate("uniform", math.inf, status="terminated_rational"),
        )
    if len(seq.entries) < min_entries:
        raise InsufficientData(f"best sequence has {len(seq.entries)} entries, need {min_entries}; raise Q_max")
    return seq


def uniform_exponent_estimate(
    x, w: Weight, Q_max: int, *, window: float = DEFAULT_WINDOW, min_gaps: int = DEFAULT_MIN_GAPS, sequence=None,
    min_entries: int = MIN_SEQUENCE,
) -> ExponentEstimate:
    """Finite-scale uniform exponent: min over tail gaps of ``-log err_n / log q_{n+1}``."""
    seq = _sequence_for_exponents(x, w, Q_max, sequence, min_entries)
    e = seq.entries
    gaps = []
    for a, b in zip(e, e[1:]):
        gaps.append((a.q, b.q, -_log_err(a) / math.log(b.q)))
    start = _window_start(len(gaps), window, min_gaps)
    value = min(g[2] for g in gaps[start:])
    cfg = {"Q_max": Q_max, "window": window, "min_gaps": min_gaps, "min_entries": min_entries, "weight": str(w)}
    return ExponentEstimate("uniform", value, gaps, start, cfg)


def ordinary_exponent_estimate(
    x, w: Weight, Q_max: int, *, window: float = DEFAULT_WINDOW, min_gaps: int = DEFAULT_MIN_GAPS, sequence=None,
    min_entries: int = MIN_SEQUENCE,
) -> ExponentEstimate:
    """Finite-scale ordinary exponent: max over the same tail of ``-log err_n / log q_n``.

    The tail covers the left ends of the uniform estimator's gap window plus the
    final record, so the ordinary value never falls below the uniform one.
    """
    seq = _sequence_for_exponents(x, w, Q_max, sequence, min_entries)
    e = seq.entries
    start = _window_start(len(e) - 1, window, min_gaps)
    rows = [(a.q, -_log_err(a) / math.log(a.q)) for a in e if a.q > 1]
    rows_idx = [k for k, a in enumerate(e) if a.q > 1]
    tail = [r for k, r in zip(rows_idx, rows) if k >= start]
    value = max(r[1] for r in tail)
    cfg = {"Q_max": Q_max, "window": window, "min_gaps": min_gaps, "min_entries": min_entries, "weight": str(w)}
    return ExponentEstimate("ordinary", value, rows, start, cfg)


def q_grid(Q_max: int, start: int = GRID_START, ratio: float = GRID_RATIO) -> list[int]:
    out, k = [], 0
    while True:
        Q = int(math.floor(start * ratio**k))
        if Q > Q_max:
            break
        if not out or Q != out[-1]:
            out.append(Q)
        k += 1
    return out


def sigma_hat_W_estimate(
    x,
    W: WeightSet,
    Q_max: int,
    *,
    window: float = DEFAULT_WINDOW,
    min_samples: int = DEFAULT_MIN_GAPS,
    grid_start: int = GRID_START,
    grid_ratio: float = GRID_RATIO,
    sequences=None,
) -> ExponentEstimate:
    """Finite-scale W-uniform exponent on a geometric grid of Q.

    ``eps(Q) = min_w -log(min_{q<=Q} err_w(q)) / log Q``; the estimate is the
    minimum of ``eps`` over the tail of the grid.
    """
    x = as_target(x)
    if isinstance(W, Weight):
        W = WeightSet((W,))
    if sequences is None:
        sequences = [best_sequence(x, w, Q_max) for w in W]
    grid = q_grid(Q_max, grid_start, grid_ratio)
    if len(grid) < min_samples:
        raise InsufficientData(f"Q grid has {len(grid)} points below Q_max={Q_max}")
    samples = []
    for Q in grid:
        per_w = []
        for seq in sequences:
            a = seq.record_at(Q)
            per_w.append(math.inf if a.err.is_zero() else -_log_err(a) / math.log(Q))
        k = min(range(len(per_w)), key=per_w.__getitem__)
        samples.append((Q, k, per_w[k]))
    start = _window_start(len(samples), window, min_samples)
    value = min(s[2] for s in samples[start:])
    cfg = {
        "Q_max": Q_max,
        "window": window,
        "min_samples": min_samples,
        "grid_start": grid_start,
        "grid_ratio": grid_ratio,
        "weights": [str(w) for w in W],
    }
    est = ExponentEstimate("sigma_hat_W", value, samples, start, cfg)
    if math.isinf(value):
        est.status = "terminated_rational"
        raise TerminatedRational("error reached 0 for every weight across the tail window", est)
    return est


# --------------------------------------------------------------------------
# certificates


@dataclass
class Witness:
    Q_lo: int
    Q_hi: int
    weight_index: int
    approximant: Approximant

    def as_dict(self):
        return {"Q_lo": self.Q_lo, "Q_hi": self.Q_hi, "weight_index": self.weight_index, **self.approximant.as_dict()}


@dataclass
class CertificateReport:
    kind: str
    x: TargetVector
    weights: WeightSet
    threshold: Fraction
    Q_range: tuple[int, int]
    Q0: int | None
    witnesses: list[Witness]
    failures: list[tuple[int, int, int]]
    precision_bits: int

    @property
    def success(self) -> bool:
        return self.Q0 is not None

    def witnesses_for(self, weight_index: int) -> list[Witness]:
        return [wt for wt in self.witnesses if wt.weight_index == weight_index]

    def failing_weights(self) -> set[int]:
        return {f[2] for f in self.failures}

    def threshold_ok(self, Q: int) -> Callable[[QuasiNormValue], bool]:
        return _threshold(self.kind, self.threshold, self.precision_bits)(Q)

    def verify_witnesses(self) -> bool:
        """Re-check every witness at both ends of its Q range (monotone in Q)."""
        for wt in self.witnesses:
            for Q in (wt.Q_lo, wt.Q_hi):
                if wt.approximant.q > Q or not wt.approximant.recheck(self.x, self.threshold_ok(Q)):
                    return False
        return True

    def as_dict(self):
        return {
            "kind": self.kind,
            "x": self.x.describe(),
            "weights": [str(w) for w in self.weights],
            "threshold": str(self.threshold),
            "Q_range": list(self.Q_range),
            "Q0": self.Q0,
            "success": self.success,
            "precision_bits": self.precision_bits,
            "witnesses": [wt.as_dict() for wt in self.witnesses],
            "failures": [list(f) for f in self.failures],
        }


def _threshold(kind: str, param: Fraction, prec: int):
    """Factory: ``Q -> (err -> bool)`` deciding the certificate inequality exactly."""
    if kind == "delta_singular":
        return lambda Q: (lambda err: err.leq(param / Q))
    if kind == "dirichlet":
        return lambda Q: (lambda err: err.lt(Fraction(1, Q)))
    if kind == "epsilon_singular":
        if param.denominator <= EXACT_EPS_DENOMINATOR:
            return lambda Q: (lambda err: err.leq_power(Q, -param))

        def via_logs(Q):
            def ok(err):
                if err.is_zero():
                    return True
                with mpmath.workprec(prec):
                    lhs = err.log()
                    rhs = -mpmath.mpf(param.numerator) / param.denominator * mpmath.log(Q)
                    if abs(lhs - rhs) <= mpmath.mpf(2) ** (-prec // 2) * (1 + abs(rhs)):
                        raise PrecisionLimited(f"err vs Q^-{param} at Q={Q} within the precision margin")
                    return lhs < rhs

            return ok

        return via_logs
    raise ValueError(f"unknown certificate kind {kind!r}")


def _threshold_log_Q(kind: str, param: Fraction, log_err: float) -> float:
    """Float estimate of log of the largest Q at which ``err`` still passes."""
    if kind == "delta_singular":
        return math.log(param) - log_err
    if kind == "dirichlet":
        return -log_err
    return -log_err / float(param)


def _last_passing(lo: int, hi: int, ok: Callable[[int], bool], guess: int) -> int:
    """Largest Q in [lo, hi] with ok(Q) for monotone ok (true then false); lo-1 if none."""
    if not ok(lo):
        return lo - 1
    if ok(hi):
        return hi
    g = min(max(guess, lo), hi - 1)
    # bracket [a, b) with ok(a) true, ok(b) false, starting near the float guess
    if ok(g):
        a, b, step = g, None, 1
        while b is None:
            c = min(a + step, hi)
            if ok(c):
                a, step = c, step * 2
            else:
                b = c
    else:
        b, a, step = g, None, 1
        while a is None:
            c = max(b - step, lo)
            if ok(c):
                a = c
            else:
                b, step = c, step * 2
    while b - a > 1:
        mid = (a + b) // 2
        if ok(mid):
            a = mid
        else:
            b = mid
    return a


def _certificate(kind, x, W, param, Q_max, sequences=None) -> CertificateReport:
    x = as_target(x)
    if isinstance(W, Weight):
        W = WeightSet((W,))
    if W.d != x.d:
        raise DimensionMismatch(f"vector has dimension {x.d}, weights have dimension {W.d}")
    make = _threshold(kind, param, x.precision_bits)
    witnesses, failures = [], []
    last_fail = 0
    for k, w in enumerate(W):
        seq = sequences[k] if sequences is not None else best_sequence(x, w, Q_max)
        for a, lo, hi in seq.intervals():
            if a.err.is_zero():
                witnesses.append(Witness(lo, hi, k, a))
                continue
            ok = lambda Q, a=a: make(Q)(a.err)
            guess_log = _threshold_log_Q(kind, param, _log_err(a))
            guess = int(math.exp(min(guess_log, 60.0)))
            top = _last_passing(lo, hi, ok, guess)
            if top >= lo:
                witnesses.append(Witness(lo, top, k, a))
            if top < hi:
                failures.append((max(top + 1, lo), hi, k))
                last_fail = max(last_fail, hi)
    Q0 = max(1, last_fail)
    return CertificateReport(
        kind=kind,
        x=x,
        weights=W,
        threshold=param,
        Q_range=(1, Q_max),
        Q0=Q0 if Q0 < Q_max else None,
        witnesses=witnesses,
        failures=failures,
        precision_bits=x.precision_bits,
    )


def _rational(v) -> Fraction:
    # floats are read through their shortest decimal form: 1.8 -> 9/5
    return Fraction(repr(v)) if isinstance(v, float) else Fraction(v)


def singular_certificate(x, W, delta, Q_max: int, sequences=None) -> CertificateReport:
    """Smallest Q0 such that every Q in (Q0, Q_max] and every w admit ``||qx-p||_w <= delta/Q``, ``q <= Q``.

    ``Q0`` is ``None`` when the last scale ``Q_max`` itself fails.
    """
    delta = _rational(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    return _certificate("delta_singular", x, W, delta, Q_max, sequences)


def epsilon_singular_certificate(x, W, epsilon, Q_max: int, sequences=None) -> CertificateReport:
    """As :func:`singular_certificate` with threshold ``1/Q**epsilon``."""
    epsilon = _rational(epsilon)
    if epsilon < 1:
        raise ValueError("epsilon must be at least 1")
    return _certificate("epsilon_singular", x, W, epsilon, Q_max, sequences)


def dirichlet_certificate(x, W, Q_max: int, sequences=None) -> CertificateReport:
    """Strict Dirichlet inequality at every scale; succeeds with Q0 = 1 for every x."""
    return _certificate("dirichlet", x, W, Fraction(1), Q_max, sequences)
